"""Shared fixtures.

The end-to-end benchmark tests need the Pima Indians diabetes CSV, which
is not redistributed with this repository. Point ECOAMLP_PIDD at a copy
or place it at data/pima_indians_diabetes.csv (see scripts/fetch_pidd.py);
the tests that need it skip with instructions when it is absent.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecoamlp.data import load_csv, pidd_schema  # noqa: E402

DEFAULT_PIDD = Path(__file__).resolve().parent.parent / "data" / "pima_indians_diabetes.csv"


def pidd_csv_path():
    return Path(os.environ.get("ECOAMLP_PIDD", DEFAULT_PIDD))


def require_pidd():
    """Return the PIDD path or skip the calling test with instructions."""
    path = pidd_csv_path()
    if not path.exists():
        pytest.skip(
            f"Pima Indians diabetes CSV not found at {path}; fetch it on a "
            "networked machine with scripts/fetch_pidd.py or set ECOAMLP_PIDD"
        )
    return path


@pytest.fixture(scope="session")
def pidd_dataset():
    path = require_pidd()
    dataset = load_csv(path, pidd_schema())
    if len(dataset) != 768 or dataset.class_counts() != (500, 268):
        pytest.fail(
            f"{path} does not look like the expected table: "
            f"{len(dataset)} rows, class counts {dataset.class_counts()} "
            "(expected 768 rows, 500 negative / 268 positive)"
        )
    return dataset

#!/usr/bin/env python3
"""Fetch the Pima Indians diabetes table used by the benchmark tests.

The file is not redistributed with this repository. Run this script on a
machine with network access (or hand it an already-downloaded copy with
--from-file); it validates the table and writes the canonical CSV to
data/pima_indians_diabetes.csv, where the test suite looks for it. Point
the ECOAMLP_PIDD environment variable somewhere else to override.

Expected table: 768 rows, 8 numeric feature columns, a 0/1 outcome label,
500 negative and 268 positive instances.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.error
import urllib.request
from pathlib import Path

SOURCES = (
    "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv",
    "https://raw.githubusercontent.com/plotly/datasets/master/diabetes.csv",
)

HEADER = (
    "Pregnancies",
    "Glucose",
    "BloodPressure",
    "SkinThickness",
    "Insulin",
    "BMI",
    "DiabetesPedigreeFunction",
    "Age",
    "Outcome",
)

LABEL_ALIASES = {"tested_positive": "1", "tested_negative": "0"}

DEFAULT_OUTPUT = Path(__file__).resolve().parent.parent / "data" / "pima_indians_diabetes.csv"


def parse_rows(text: str, origin: str) -> list:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise SystemExit(f"{origin}: empty file")
    if looks_like_header(rows[0]):
        rows = rows[1:]
    cleaned = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 9:
            raise SystemExit(f"{origin}: row {lineno} has {len(row)} columns, expected 9")
        cells = [c.strip() for c in row]
        label = LABEL_ALIASES.get(cells[-1], cells[-1])
        if label not in ("0", "1"):
            raise SystemExit(f"{origin}: row {lineno}: unexpected label {cells[-1]!r}")
        for col, cell in enumerate(cells[:-1]):
            try:
                float(cell)
            except ValueError:
                raise SystemExit(
                    f"{origin}: row {lineno}, column {HEADER[col]}: not a number: {cell!r}"
                ) from None
        cleaned.append(cells[:-1] + [label])
    return cleaned


def looks_like_header(row: list) -> bool:
    try:
        float(row[0])
        return False
    except ValueError:
        return True


def validate(rows: list, origin: str) -> None:
    if len(rows) != 768:
        raise SystemExit(f"{origin}: expected 768 rows, found {len(rows)}")
    positives = sum(1 for r in rows if r[-1] == "1")
    if (len(rows) - positives, positives) != (500, 268):
        raise SystemExit(
            f"{origin}: expected class counts 500 negative / 268 positive, "
            f"found {len(rows) - positives} / {positives}"
        )


def fetch(url: str) -> str:
    with urllib.request.urlopen(url, timeout=30) as resp:
        return resp.read().decode("utf-8")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--url", help="download from this URL instead of the known mirrors")
    parser.add_argument("--from-file", metavar="PATH",
                        help="validate and install an already-downloaded copy")
    parser.add_argument("--output", metavar="PATH", default=str(DEFAULT_OUTPUT),
                        help=f"where to write the CSV (default: {DEFAULT_OUTPUT})")
    args = parser.parse_args(argv)

    if args.from_file:
        origin = args.from_file
        source = Path(args.from_file)
        if not source.exists():
            print(f"no such file: {source}", file=sys.stderr)
            return 1
        rows = parse_rows(source.read_text(), origin)
        validate(rows, origin)
    else:
        urls = [args.url] if args.url else list(SOURCES)
        rows = None
        errors = []
        for url in urls:
            try:
                rows = parse_rows(fetch(url), url)
                validate(rows, url)
                origin = url
                break
            except (urllib.error.URLError, OSError, SystemExit) as exc:
                errors.append(f"  {url}: {exc}")
                rows = None
        if rows is None:
            print("could not fetch the table from any source:", file=sys.stderr)
            print("\n".join(errors), file=sys.stderr)
            print("download it manually and rerun with --from-file", file=sys.stderr)
            return 1

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    print(f"wrote {out} (768 rows, 500 negative / 268 positive) from {origin}")
    print("the benchmark tests will now pick it up; run: pytest tests/test_acceptance.py")
    return 0


if __name__ == "__main__":
    sys.exit(main())

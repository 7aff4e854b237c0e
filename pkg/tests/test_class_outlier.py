"""Class-outlier component formulas, ranking rules, and oracle agreement."""

from __future__ import annotations

import numpy as np
import pytest

import oracles
from ecoamlp.class_outlier import (
    EPSILON_DEVIATION,
    OutlierParams,
    cof,
    codb_detect,
    codb_score,
    deviation,
    ecodb_detect,
    ecof,
    kdist,
    knn,
    pcl,
    remove_outliers,
    _min_max,
)
from ecoamlp.data import Dataset
from ecoamlp.distance import Measure
from ecoamlp.errors import ConfigError, DataError

from synth import numeric_schema, random_dataset


def line_dataset(points, labels, ids=None):
    """1-D dataset padded with a zero column so correlation is defined."""
    points = np.asarray(points, dtype=np.float64)
    features = np.column_stack([points, np.zeros_like(points)])
    ids = np.arange(len(points)) if ids is None else np.asarray(ids)
    return Dataset(numeric_schema(2), features, np.asarray(labels), ids)


class TestComponents:
    def test_knn_simple_geometry(self):
        ds = line_dataset([0.0, 1.0, 10.0], [0, 0, 1])
        assert knn(ds, 0, k=2, measure=Measure.EUCLIDEAN) == [(1, 1.0), (2, 10.0)]

    def test_knn_excludes_query_and_breaks_ties_by_id(self):
        ds = line_dataset([0.0, 0.0, 0.0, 5.0], [0, 0, 1, 1], ids=[7, 3, 9, 1])
        neighbours = knn(ds, 7, k=3, measure=Measure.EUCLIDEAN)
        assert neighbours == [(3, 0.0), (9, 0.0), (1, 5.0)]

    def test_knn_matches_oracle_on_random_data(self):
        ds = random_dataset(100, 5, seed=0)
        for qid in [0, 13, 57, 99]:
            got = knn(ds, qid, k=5, measure=Measure.EUCLIDEAN)
            want = oracles.knn(ds, qid, 5, "euclidean")
            assert [i for i, _ in got] == [i for i, _ in want]
            for (_, d1), (_, d2) in zip(got, want):
                assert d1 == pytest.approx(d2, abs=1e-9)

    def test_knn_k_bounds(self):
        ds = line_dataset([0.0, 1.0, 2.0], [0, 0, 1])
        with pytest.raises(ConfigError):
            knn(ds, 0, k=3, measure=Measure.EUCLIDEAN)
        with pytest.raises(ConfigError):
            knn(ds, 0, k=0, measure=Measure.EUCLIDEAN)

    def test_pcl_counts_matching_labels(self):
        ds = line_dataset([0.0, 1.0, 2.0, 3.0], [0, 0, 0, 1])
        assert pcl(ds, 0, k=3, measure=Measure.EUCLIDEAN) == pytest.approx(2 / 3)

    def test_pcl_all_same_class_is_one(self):
        ds = line_dataset([0.0, 1.0, 2.0, 9.0], [0, 0, 0, 0])
        assert pcl(ds, 1, k=3, measure=Measure.EUCLIDEAN) == 1.0

    def test_deviation_sums_same_class_distances(self):
        ds = line_dataset([0.0, 1.0, 3.0, 100.0], [0, 0, 0, 1])
        assert deviation(ds, 0, Measure.EUCLIDEAN) == pytest.approx(4.0, abs=1e-12)

    def test_deviation_of_class_singleton_is_zero(self):
        ds = line_dataset([0.0, 1.0, 3.0], [1, 0, 0])
        assert deviation(ds, 0, Measure.EUCLIDEAN) == 0.0

    def test_kdist_sums_neighbour_distances(self):
        ds = line_dataset([0.0, 1.0, 10.0], [0, 0, 1])
        assert kdist(ds, 0, k=2, measure=Measure.EUCLIDEAN) == pytest.approx(11.0, abs=1e-12)

    def test_kdist_zero_for_duplicates(self):
        ds = line_dataset([2.0, 2.0, 2.0, 9.0], [0, 0, 0, 1])
        assert kdist(ds, 0, k=2, measure=Measure.EUCLIDEAN) == 0.0

    def test_components_match_oracle(self):
        ds = random_dataset(40, 4, seed=1)
        for qid in [2, 17, 39]:
            for measure, name in [(Measure.EUCLIDEAN, "euclidean"),
                                  (Measure.CORRELATION, "correlation")]:
                o_pcl, o_dev, o_kd = oracles.components(ds, qid, 7, name)
                assert pcl(ds, qid, 7, measure) == pytest.approx(o_pcl, abs=1e-12)
                assert deviation(ds, qid, measure) == pytest.approx(o_dev, abs=1e-9)
                assert kdist(ds, qid, 7, measure) == pytest.approx(o_kd, abs=1e-9)


class TestScoreFormulas:
    def test_cof_arithmetic(self):
        score, flagged = cof(3, 1.0, 2.0, 4.0, alpha=1.0, beta=1.0)
        assert score == pytest.approx(7.5, abs=1e-12)
        assert not flagged

    def test_cof_epsilon_guard(self):
        score, flagged = cof(3, 0.0, 0.0, 1.0, alpha=100.0, beta=0.1)
        assert flagged
        assert score == pytest.approx(100.0 / EPSILON_DEVIATION + 0.1, rel=1e-12)

    def test_ecof_arithmetic(self):
        assert ecof(3, 2 / 3, 0.25, 0.5) == pytest.approx(2.25, abs=1e-12)

    def test_min_max_boundaries_exact(self):
        values = np.array([2.0, 5.0, 8.0])
        normed = _min_max(values)
        assert normed[0] == 0.0
        assert normed[2] == 1.0
        assert normed[1] == pytest.approx(0.5, abs=1e-12)

    def test_min_max_degenerate_is_zero(self):
        assert _min_max(np.array([3.0, 3.0, 3.0])).tolist() == [0.0, 0.0, 0.0]

    def test_codb_score_composes_components(self):
        ds = random_dataset(30, 3, seed=2)
        params = OutlierParams(k=4, n_outliers=5, measure=Measure.EUCLIDEAN,
                               alpha=10.0, beta=0.5)
        for qid in [0, 11, 29]:
            expected = (
                4 * pcl(ds, qid, 4, params.measure)
                + 10.0 / deviation(ds, qid, params.measure)
                + 0.5 * kdist(ds, qid, 4, params.measure)
            )
            assert codb_score(ds, qid, params) == pytest.approx(expected, abs=1e-12)


class TestEcodbDetect:
    def test_report_has_exactly_n_entries(self):
        ds = random_dataset(30, 3, seed=3)
        report = ecodb_detect(ds, OutlierParams(k=5, n_outliers=7))
        assert len(report.ranked) == 7
        assert len(set(report.outlier_ids)) == 7

    def test_matches_oracle_on_small_dataset(self):
        ds = random_dataset(30, 4, seed=4)
        params = OutlierParams(k=5, n_outliers=6, measure=Measure.CORRELATION)
        got = ecodb_detect(ds, params)
        want = oracles.ecodb(ds, 5, 6, "correlation")
        assert list(got.outlier_ids) == [i for i, _ in want]
        for scored, (_, oscore) in zip(got.ranked, want):
            assert scored.score == pytest.approx(oscore, abs=1e-9)

    def test_scores_recompute_from_reported_components(self):
        ds = random_dataset(40, 4, seed=5)
        params = OutlierParams(k=6, n_outliers=8)
        report = ecodb_detect(ds, params)
        devs = [s.deviation for s in report.ranked]
        kds = [s.kdist for s in report.ranked]

        def norm(x, lo, hi):
            return 0.0 if hi == lo else (x - lo) / (hi - lo)

        for s in report.ranked:
            expected = (
                params.k * s.pcl
                - norm(s.deviation, min(devs), max(devs))
                + norm(s.kdist, min(kds), max(kds))
            )
            assert s.score == pytest.approx(expected, abs=1e-12)

    def test_surrounded_instance_ranks_first(self):
        # id 0 sits in the middle of the other class; its own class is far away
        points = [0.0, 0.2, -0.2, 0.4, -0.4, 50.0, 51.0, 52.0]
        labels = [1, 0, 0, 0, 0, 1, 1, 1]
        ds = line_dataset(points, labels)
        report = ecodb_detect(ds, OutlierParams(k=3, n_outliers=3,
                                                measure=Measure.EUCLIDEAN))
        assert report.outlier_ids[0] == 0

    def test_single_class_relabeling_forces_pcl_one(self):
        ds = random_dataset(25, 3, seed=6)
        relabeled = Dataset(ds.schema, ds.features, np.zeros(len(ds), dtype=np.int64),
                            ds.ids)
        report = ecodb_detect(relabeled, OutlierParams(k=4, n_outliers=5,
                                                       measure=Measure.EUCLIDEAN))
        assert all(s.pcl == 1.0 for s in report.ranked)

    def test_determinism(self):
        ds = random_dataset(35, 4, seed=7)
        params = OutlierParams(k=5, n_outliers=6)
        a = ecodb_detect(ds, params)
        b = ecodb_detect(ds, params)
        assert a.outlier_ids == b.outlier_ids
        assert [s.score for s in a.ranked] == [s.score for s in b.ranked]

    def test_parameter_validation(self):
        ds = random_dataset(10, 3, seed=8)
        with pytest.raises(ConfigError):
            ecodb_detect(ds, OutlierParams(k=10, n_outliers=3))
        with pytest.raises(ConfigError):
            ecodb_detect(ds, OutlierParams(k=3, n_outliers=11))
        with pytest.raises(ConfigError):
            OutlierParams(k=0)
        with pytest.raises(ConfigError):
            OutlierParams(alpha=0.0)
        with pytest.raises(ConfigError):
            OutlierParams(n_outliers=-1)

    def test_json_shape(self):
        ds = random_dataset(20, 3, seed=9)
        report = ecodb_detect(ds, OutlierParams(k=3, n_outliers=4))
        obj = report.to_json_obj()
        assert obj["algorithm"] == "ecodb"
        assert len(obj["outliers"]) == 4
        assert set(obj["outliers"][0]) == {"id", "pcl", "deviation", "kdist",
                                           "score", "flagged"}


class TestCodbDetect:
    def test_matches_oracle(self):
        ds = random_dataset(28, 4, seed=10)
        params = OutlierParams(k=4, n_outliers=5, measure=Measure.EUCLIDEAN,
                               alpha=100.0, beta=0.1)
        got = codb_detect(ds, params)
        want = oracles.codb(ds, 4, 5, "euclidean", 100.0, 0.1)
        assert list(got.outlier_ids) == [i for i, _ in want]
        for scored, (_, oscore) in zip(got.ranked, want):
            assert scored.score == pytest.approx(oscore, rel=1e-9)

    def test_flags_epsilon_case(self):
        # id 3 is its class's only member beyond itself -> deviation 0
        ds = line_dataset([0.0, 1.0, 2.0, 50.0], [0, 0, 0, 1])
        report = codb_detect(ds, OutlierParams(k=2, n_outliers=4,
                                               measure=Measure.EUCLIDEAN))
        by_id = {s.id: s for s in report.ranked}
        assert by_id[3].flagged
        assert not by_id[0].flagged


class TestRemoveOutliers:
    def test_removes_reported_ids_in_order(self):
        ds = random_dataset(30, 3, seed=11)
        report = ecodb_detect(ds, OutlierParams(k=4, n_outliers=6))
        cleaned = remove_outliers(ds, report)
        assert len(cleaned) == 24
        assert set(cleaned.ids) == set(ds.ids) - set(report.outlier_ids)
        assert cleaned.ids.tolist() == sorted(cleaned.ids.tolist())

    def test_zero_outliers_keeps_everything(self):
        ds = random_dataset(15, 3, seed=12)
        report = ecodb_detect(ds, OutlierParams(k=3, n_outliers=0))
        cleaned = remove_outliers(ds, report)
        assert cleaned.ids.tolist() == ds.ids.tolist()
        assert np.array_equal(cleaned.features, ds.features)

    def test_unknown_id_rejected(self):
        ds = random_dataset(15, 3, seed=13)
        report = ecodb_detect(ds, OutlierParams(k=3, n_outliers=2))
        smaller = ds.drop_ids(report.outlier_ids)
        with pytest.raises(DataError):
            remove_outliers(smaller, report)

    def test_redetection_is_disjoint(self):
        ds = random_dataset(40, 4, seed=14)
        params = OutlierParams(k=5, n_outliers=5)
        first = ecodb_detect(ds, params)
        cleaned = remove_outliers(ds, first)
        second = ecodb_detect(cleaned, params)
        assert not set(first.outlier_ids) & set(second.outlier_ids)

"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

core = pytest.importorskip("honest_ate")


def two_point():
    x = np.array([[0.0], [1.0]])
    d = np.array([0, 1], dtype=np.int32)
    return core.Sample(x, d)


def test_two_point_path_and_weights():
    path = core.trace_path(two_point(), core.NormSpec(np.array([1.0]), "2"),
                           target="cate")
    assert path.reached_terminal
    est = core.weights_at(path, mu=1.0, C=1.0)
    assert est.weights == pytest.approx([-1.0, 1.0])
    assert est.maxbias == pytest.approx(1.0)
    assert est.sd == pytest.approx(math.sqrt(2.0))


def test_critical_value_anchors():
    assert core.critical_value(0.0, 0.05) == pytest.approx(1.959964, abs=1e-6)
    assert core.critical_value(2.0, 0.05) == pytest.approx(2.0 + 1.644854,
                                                           abs=5e-4)


def test_matching_and_bias():
    s = two_point()
    norm = core.NormSpec(np.array([1.0]), "2")
    est = core.matching_weights(s, norm, M=1, target="cate")
    lip = core.LipschitzSpec(1.0, norm)
    bias = core.worst_case_bias(np.asarray(est.weights), s, lip, target="cate")
    assert bias == pytest.approx(1.0)


def test_modulus_oracle_matches_two_point():
    s = two_point()
    norm = core.NormSpec(np.array([1.0]), "2")
    lip = core.LipschitzSpec(1.0, norm)
    f, objective = core.solve_modulus_qp(s, lip, "cate",
                                         np.array([1.0, 1.0]), 2.0)
    assert objective == pytest.approx(2.0 + math.sqrt(2.0) * 2.0, rel=1e-6)


def test_pipeline_rows():
    x = np.array([[0.0], [0.0], [1.0], [1.0]])
    d = np.array([0, 0, 1, 1], dtype=np.int32)
    y = np.array([0.0, 2.0, 1.0, 3.0])
    s = core.Sample(x, d, y)
    norm = core.NormSpec(np.array([1.0]), "2")
    rows = core.feasible_pipeline(s, [1.0], norm, target="cate",
                                  nn_neighbors=1)
    assert len(rows) == 3
    for row in rows:
        assert row["estimate"] == pytest.approx(1.0)
        assert row["maxbias"] == pytest.approx(1.0)


def test_errors_surface_as_python_exceptions():
    x = np.array([[0.0], [1.0]])
    d = np.array([1, 1], dtype=np.int32)
    with pytest.raises(Exception):
        core.Sample(x, d)

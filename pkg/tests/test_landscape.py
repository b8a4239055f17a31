import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iclandscape.landscape import (
    AnalyticLandscape,
    CostFunction,
    WalkConfig,
    WalkError,
    WalkFileError,
    deltas_from_columns,
    derive_seed,
    finite_difference_gradient,
    isotropic_direction,
    isotropic_directions,
    lhs_sample,
    make_rng,
    random_walk,
    read_walk_csv,
    walk_over_sample,
    write_manifest,
    write_walk_csv,
)


# -- sampling -------------------------------------------------------------------

def test_lhs_one_dimension_two_points():
    pts = lhs_sample(1, 2, seed=0)
    assert pts.shape == (2, 1)
    lo, hi = sorted(pts[:, 0])
    assert 0.0 <= lo < math.pi <= hi < 2 * math.pi


def test_lhs_one_point_per_bin():
    pts = lhs_sample(3, 100, seed=7)
    for k in range(3):
        counts = np.bincount(np.floor(pts[:, k] / (2 * math.pi) * 100).astype(int), minlength=100)
        assert np.all(counts == 1)


def test_lhs_deterministic():
    np.testing.assert_array_equal(lhs_sample(2, 50, 1), lhs_sample(2, 50, 1))
    assert not np.array_equal(lhs_sample(2, 50, 1), lhs_sample(2, 50, 2))


@pytest.mark.parametrize("m,M", [(0, 5), (2, 1)])
def test_lhs_rejects_bad_sizes(m, M):
    with pytest.raises(ValueError):
        lhs_sample(m, M, 0)


def test_direction_one_dimension_is_sign():
    rng = make_rng(3)
    for _ in range(20):
        assert isotropic_direction(1, rng)[0] in (-1.0, 1.0)


def test_direction_unit_norm():
    rng = make_rng(5)
    for _ in range(100):
        assert abs(np.linalg.norm(isotropic_direction(3, rng)) - 1.0) < 1e-12


def test_directions_are_centred():
    d = isotropic_directions(10, 100_000, make_rng(11))
    stderr = d.std(axis=0, ddof=1) / math.sqrt(len(d))
    assert np.all(np.abs(d.mean(axis=0)) < 4 * stderr)


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
    assert 0 <= derive_seed(2**64 - 1, 5) < 2**64


# -- walks ----------------------------------------------------------------------

def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(0.0, 10, 0)
    with pytest.raises(ValueError):
        WalkConfig(0.1, 1, 0)
    with pytest.raises(ValueError):
        WalkConfig(0.1, 10, -1)


def test_walk_length_defaults():
    cfg = WalkConfig.for_dimension(8)
    assert cfg.step_size == 0.1
    # S + 1 < M = 50 m
    assert cfg.num_steps + 1 < 50 * 8


def test_constant_landscape_has_zero_deltas():
    rec = random_walk(AnalyticLandscape.constant(4, 2.5), WalkConfig(0.3, 50, 1))
    assert np.all(rec.deltas == 0.0)


def test_linear_landscape_deltas_are_directional_derivatives():
    g = np.array([0.3, -1.2, 2.0, 0.5])
    rec = random_walk(AnalyticLandscape.linear(g), WalkConfig(0.1, 200, 4))
    directions = np.diff(rec.points, axis=0) / 0.1
    np.testing.assert_allclose(rec.deltas, directions @ g, atol=1e-12)


def test_walk_record_invariants():
    cost = AnalyticLandscape.cosine(np.linspace(0.5, 1.5, 6))
    rec = random_walk(cost, WalkConfig(0.2, 300, 9))
    assert rec.points.shape == (301, 6)
    assert rec.costs.shape == (301,)
    assert rec.deltas.shape == (300,)
    np.testing.assert_allclose(rec.step_norms, 0.2, rtol=1e-12)
    np.testing.assert_array_equal(rec.deltas, np.diff(rec.costs) / rec.step_norms)
    np.testing.assert_allclose(np.linalg.norm(np.diff(rec.points, axis=0), axis=1), 0.2, rtol=1e-12)


def test_walk_keeps_coordinates_unreduced():
    cost = AnalyticLandscape.cosine(np.ones(2))
    start = np.array([2 * math.pi - 0.01, 0.0])
    rec = random_walk(cost, WalkConfig(0.5, 400, 2, start))
    assert np.max(np.abs(rec.points)) > 2 * math.pi
    np.testing.assert_allclose(rec.costs, np.cos(rec.points).sum(axis=1), atol=1e-12)


def test_walk_determinism():
    cost = AnalyticLandscape.cosine(np.ones(5))
    a = random_walk(cost, WalkConfig(0.1, 100, 17))
    b = random_walk(cost, WalkConfig(0.1, 100, 17))
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.costs, b.costs)


def test_cosine_deltas_are_centred():
    cost = AnalyticLandscape.cosine(np.ones(20))
    rec = random_walk(cost, WalkConfig(0.1, 10_000, 21))
    stderr = rec.deltas.std(ddof=1) / math.sqrt(len(rec.deltas))
    assert abs(rec.deltas.mean()) < 4 * stderr


class _Exploding(CostFunction):
    def __init__(self):
        super().__init__(2, "exploding")

    def _evaluate(self, theta):
        if theta[0] > 0.5:
            raise FloatingPointError("boom")
        return 0.0

    def _evaluate_batch(self, thetas):
        raise FloatingPointError("batch boom")


def test_walk_failure_reports_step():
    start = np.array([0.3, 0.0])
    with pytest.raises(WalkError) as info:
        random_walk(_Exploding(), WalkConfig(0.1, 50, 0, start))
    assert info.value.step >= 1
    assert "walk step" in str(info.value)


def test_cost_rejects_wrong_length():
    with pytest.raises(ValueError):
        AnalyticLandscape.cosine(np.ones(3)).evaluate(np.zeros(2))


def test_periodic_reduction():
    cost = AnalyticLandscape.cosine(np.array([1.0, 2.0]))
    theta = np.array([0.4, 1.3])
    assert cost(theta + 2 * math.pi * np.array([3, -2])) == pytest.approx(cost(theta), abs=1e-12)


def test_walk_over_sample_visits_every_point():
    sample = lhs_sample(3, 40, 2)
    rec = walk_over_sample(AnalyticLandscape.cosine(np.ones(3)), sample, seed=1)
    assert len(rec.points) == 40
    assert sorted(map(tuple, rec.points)) == sorted(map(tuple, sample))
    assert np.all(rec.step_norms > 0)


# -- gradients ------------------------------------------------------------------

def test_fd_gradient_linear():
    g = np.array([1.5, -0.25, 3.0])
    np.testing.assert_allclose(finite_difference_gradient(AnalyticLandscape.linear(g), np.zeros(3)), g, atol=1e-10)


def test_fd_gradient_cosine():
    cost = AnalyticLandscape.cosine(np.ones(2))
    grad = finite_difference_gradient(cost, np.array([math.pi / 2, math.pi / 2]))
    np.testing.assert_allclose(grad, [-1.0, -1.0], atol=1e-8)


def test_fd_gradient_constant():
    grad = finite_difference_gradient(AnalyticLandscape.constant(3, 1.0), np.ones(3))
    np.testing.assert_array_equal(grad, np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=6))
def test_exact_gradient_matches_fd(theta):
    theta = np.array(theta)
    cost = AnalyticLandscape.cosine(np.linspace(0.5, 2.0, len(theta)))
    np.testing.assert_allclose(cost.exact_gradient(theta), finite_difference_gradient(cost, theta), atol=1e-8)


def test_exact_average_sq_norm():
    a = np.array([1.0, 2.0, 3.0])
    assert AnalyticLandscape.cosine(a).exact_average_sq_norm == pytest.approx(7.0)
    assert AnalyticLandscape.linear(a).exact_average_sq_norm == pytest.approx(14.0)
    assert AnalyticLandscape.constant(3).exact_average_sq_norm == 0.0


def test_average_sq_norm_converges_at_root_rate():
    # doubling the walk halves the variance of the mean once steps decorrelate;
    # d = 1 rad keeps the walk's correlation length short against S = 2000
    a = np.linspace(0.5, 1.5, 20)
    cost = AnalyticLandscape.cosine(a)
    target = cost.exact_average_sq_norm

    def error(steps, seed):
        rec = random_walk(cost, WalkConfig(1.0, steps, seed))
        g = cost.exact_gradient(rec.points)
        return np.mean(np.sum(g * g, axis=1)) - target

    seeds = [derive_seed(0, s) for s in range(30)]
    short = [error(2000, s) for s in seeds]
    long = [error(4000, s) for s in seeds]
    ratio = np.std(short, ddof=1) / np.std(long, ddof=1)
    assert 1.2 <= ratio <= 1.7


# -- files ----------------------------------------------------------------------

def test_walk_csv_round_trip(tmp_path):
    cost = AnalyticLandscape.cosine(np.ones(3))
    recs = [random_walk(cost, WalkConfig(0.1, 20, s)) for s in (1, 2)]
    path = tmp_path / "w.csv"
    write_walk_csv(recs, path, theta_path=tmp_path / "t.csv")
    data = read_walk_csv(path)
    assert sorted(data) == [0, 1]
    for rep, rec in enumerate(recs):
        costs, norms = data[rep]
        np.testing.assert_array_equal(costs, rec.costs)
        np.testing.assert_array_equal(deltas_from_columns(costs, norms), rec.deltas)
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "rep,step,theta_0,theta_1,theta_2"


def test_walk_csv_reports_bad_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("rep,step,cost,step_norm\n0,0,1.0,0.0\n0,1,oops,0.1\n")
    with pytest.raises(WalkFileError) as info:
        read_walk_csv(path)
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_walk_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n")
    with pytest.raises(WalkFileError):
        read_walk_csv(path)


def test_manifest_fields(tmp_path):
    import json

    write_manifest(tmp_path / "m.json", m=3, d=0.1, S=20, seed=4, cost_id="x")
    data = json.loads((tmp_path / "m.json").read_text())
    assert {"m", "d", "S", "seed", "cost_id"} <= set(data)

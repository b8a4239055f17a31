import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iclandscape.bounds import MIC_THRESHOLD, solve_q
from iclandscape.ic import (
    DOT,
    MINUS,
    PLUS,
    UNEQUAL_PAIRS,
    ICCurve,
    SymbolSequence,
    default_epsilon_grid,
    extract_features,
    ic_curve,
    ic_values,
    information_content,
    pair_probabilities,
    symbolize,
)
from iclandscape.landscape import AnalyticLandscape, WalkConfig, random_walk


def _pp(text):
    return pair_probabilities(SymbolSequence.from_string(text))


def test_symbolize_rule():
    seq = symbolize([0.5, -0.5, 0.0], 0.1)
    assert list(seq.symbols) == [PLUS, MINUS, DOT]
    assert str(seq) == "+-o"


def test_symbolize_boundary_is_dot():
    assert list(symbolize([0.1], 0.1).symbols) == [DOT]
    assert list(symbolize([-0.1], 0.1).symbols) == [DOT]


def test_symbolize_saturates():
    d = np.array([0.3, -2.0, 1.1])
    assert np.all(symbolize(d, 2.0).symbols == DOT)


def test_pairs_alternating():
    pp = _pp("+-+-")
    assert pp.p(PLUS, MINUS) == pytest.approx(2 / 3)
    assert pp.p(MINUS, PLUS) == pytest.approx(1 / 3)
    assert pp.pair_count == 3
    others = {k: v for k, v in pp.unequal.items() if k not in [(PLUS, MINUS), (MINUS, PLUS)]}
    assert all(v == 0 for v in others.values())


def test_pairs_all_dots():
    pp = _pp("oooo")
    assert pp.p_dotdot == 1.0
    assert all(v == 0 for v in pp.unequal.values())


def test_pairs_mixed():
    pp = _pp("+o-")
    assert pp.p(PLUS, DOT) == 0.5
    assert pp.p(DOT, MINUS) == 0.5


def test_pairs_accepts_unicode_glyphs():
    assert _pp("+⊙−").p(PLUS, DOT) == 0.5


def test_pairs_need_two_symbols():
    with pytest.raises(ValueError):
        _pp("+")


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="+-o", min_size=2, max_size=60))
def test_pair_table_sums_to_one(text):
    pp = _pp(text)
    assert pp.total() == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= information_content(pp) <= 1.0 + 1e-12


def test_ic_uniform_is_one():
    # every unequal ordered pair exactly once, no equal pairs
    cyc = "+-o-+o+"  # +-, -o, o-, -+, +o, o+
    pp = _pp(cyc)
    assert all(v == pytest.approx(1 / 6) for v in pp.unequal.values())
    assert information_content(pp) == pytest.approx(1.0, abs=1e-14)


def test_ic_zero_when_no_unequal_pairs():
    assert information_content(_pp("++++")) == 0.0


def test_ic_two_pair_value():
    pp = _pp("+-+-+")  # p+- = p-+ = 1/2
    assert information_content(pp) == pytest.approx(math.log(2) / math.log(6), abs=1e-15)


def test_curve_constant_landscape():
    rec = random_walk(AnalyticLandscape.constant(3), WalkConfig(0.1, 30, 0))
    curve = ic_curve(rec)
    assert np.all(curve.values == 0.0)
    feats = extract_features(curve)
    assert feats.H_M == 0.0
    assert feats.eps_S == curve.epsilons[curve.epsilons > 0][0]


def test_curve_linear_landscape():
    rec = random_walk(AnalyticLandscape.linear(np.ones(10)), WalkConfig(0.1, 500, 3))
    curve = ic_curve(rec)
    assert curve.values[0] > 0
    assert curve.values[-1] == 0.0
    assert curve.m == 10


def test_curve_alternating_deltas():
    d = np.array([1.0, -1.0] * 20 + [1.0])  # 40 pairs, half +- and half -+
    curve = ic_curve(d, [0.0, 0.5, 2.0])
    assert curve.values[1] == pytest.approx(MIC_THRESHOLD, abs=1e-15)
    assert curve.values[2] == 0.0


def test_curve_rejects_empty():
    with pytest.raises(ValueError):
        ic_curve(np.array([]))


def test_curve_grid_must_increase():
    with pytest.raises(ValueError):
        ICCurve(np.array([0.0, 0.0]), np.array([0.1, 0.2]))


def test_default_grid():
    d = np.array([0.5, -2.0, 1.0])
    grid = default_epsilon_grid(d)
    assert grid[0] == 0.0 and len(grid) == 201
    assert grid[1] == pytest.approx(2e-8)
    assert grid[-1] == pytest.approx(20.0)
    assert np.all(np.diff(grid) > 0)


def test_features_single_peak():
    curve = ICCurve.from_pairs([(0.1, 0.2), (1.0, 0.8), (10.0, 0.0)])
    f = extract_features(curve, 0.05, m=4)
    assert f.eps_M == 1.0 and f.eps_S == 10.0
    assert f.eps_M_sqrt_m == 2.0


def test_features_tie_takes_smaller_eps():
    curve = ICCurve.from_pairs([(0.1, 0.5), (0.2, 0.7), (0.3, 0.6), (0.4, 0.7), (0.5, 0.0)])
    assert extract_features(curve).eps_M == 0.2


def test_features_need_a_flat_point():
    curve = ICCurve.from_pairs([(0.1, 0.5), (0.2, 0.7)])
    with pytest.raises(RuntimeError):
        extract_features(curve)


def test_features_reject_bad_eta():
    curve = ICCurve.from_pairs([(0.1, 0.5), (0.2, 0.0)])
    with pytest.raises(ValueError):
        extract_features(curve, eta=0.5)


def test_features_json_keys():
    f = extract_features(ICCurve.from_pairs([(0.1, 0.5), (0.2, 0.0)]), m=9)
    assert set(f.to_dict()) == {"H_M", "eps_M", "eps_S", "eta", "m", "eps_M_sqrt_m", "eps_S_sqrt_m"}


def test_curve_csv(tmp_path):
    curve = ICCurve.from_pairs([(0.0, 0.3), (1.0, 0.0)])
    curve.to_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "epsilon,H"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=80))
def test_ic_sign_flip_invariance(deltas):
    d = np.array(deltas)
    grid = default_epsilon_grid(d)
    np.testing.assert_allclose(ic_values(d, grid), ic_values(-d, grid), atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=80))
def test_ic_vectorized_matches_direct(deltas):
    d = np.array(deltas)
    grid = default_epsilon_grid(d, size=20)
    direct = [information_content(pair_probabilities(symbolize(d, e))) for e in grid]
    np.testing.assert_allclose(ic_values(d, grid), direct, atol=1e-14)


def _walk_curves():
    out = []
    for kind, m, seed in [("cosine", 5, 1), ("cosine", 20, 2), ("linear", 10, 3)]:
        coef = np.linspace(0.5, 1.5, m)
        rec = random_walk(AnalyticLandscape(kind, coef), WalkConfig(0.1, 2000, seed))
        out.append(rec.deltas)
    return out


def test_saturation_above_max_delta():
    for d in _walk_curves():
        e = np.max(np.abs(d))
        assert ic_values(d, [e, 2 * e]).tolist() == [0.0, 0.0]
        assert pair_probabilities(symbolize(d, e)).p_dotdot == 1.0


def _four_smallest(pp):
    return sum(sorted(pp.unequal.values())[:4])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=6, max_size=6).filter(lambda v: sum(v) > 0))
def test_four_smallest_bound_when_unequal_pairs_hold_all_mass(weights):
    # the four-smallest bound follows from H when the six unequal-pair
    # probabilities sum to one, the case its derivation works in
    p = np.array(weights) / sum(weights)
    H = float(sum(-x * math.log(x) / math.log(6) for x in p if x > 0))
    if H > MIC_THRESHOLD + 1e-9:
        assert np.sort(p)[:4].sum() >= 4 * solve_q(H) - 1e-12


def test_four_smallest_bound_needs_unequal_pairs_to_hold_all_mass():
    # with equal-symbol pairs present, two unequal pairs near 1/e exceed log6(2)
    # on their own; the four-smallest bound then fails
    seq = "+-" * 37 + "+" * 13 + "-" * 13
    pp = _pp(seq)
    H = information_content(pp)
    assert H > MIC_THRESHOLD
    assert _four_smallest(pp) == 0.0 < 4 * solve_q(H)


def test_four_smallest_bound_at_walk_mic():
    for d in _walk_curves():
        grid = default_epsilon_grid(d)
        vals = ic_values(d, grid)
        i = int(np.argmax(vals))
        assert vals[i] > MIC_THRESHOLD
        pp = pair_probabilities(symbolize(d, grid[i]))
        assert _four_smallest(pp) >= 4 * solve_q(vals[i])


def test_dot_pair_bound_below_eta_on_walks():
    checked = 0
    for d in _walk_curves():
        for eps in default_epsilon_grid(d, size=60):
            pp = pair_probabilities(symbolize(d, eps))
            H = information_content(pp)
            for eta in (0.01, 0.05, 1 / 6):
                if H <= eta:
                    assert pp.p_dotdot >= 1 - 3 * eta - 1e-12
                    checked += 1
    assert checked > 20


def test_unequal_pairs_are_the_six_ordered_pairs():
    assert len(UNEQUAL_PAIRS) == 6
    assert all(a != b for a, b in UNEQUAL_PAIRS)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lowenergy.weights import (OTHER, W_MINUS, W_PLUS, Weight, WeightDomainError, builtin_weights,
                               check_subadditive, check_weight_axioms, classify_weight, eval_weight,
                               log_weight, mix_weight, parse_weight, power_weight, scale)

BUILTIN = builtin_weights()
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_builtin_family():
    assert [w.spec for w in BUILTIN] == ["pow:0.3", "pow:0.5", "pow:0.75", "pow:1", "log", "mix"]


def test_eval_examples():
    half = power_weight(0.5)
    assert eval_weight(half, 0.0) == 0.0
    assert eval_weight(half, 4.0) == 2.0
    assert eval_weight(log_weight(), math.e - 1) == pytest.approx(1.0, rel=1e-15)


def test_eval_shapes():
    w = power_weight(0.5)
    assert isinstance(w(4.0), float)
    out = w(np.array([[0.0, 1.0], [4.0, 9.0]]))
    assert out.shape == (2, 2)
    np.testing.assert_array_equal(out, [[0, 1], [2, 3]])


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_eval_rejects_non_finite(bad):
    with pytest.raises(WeightDomainError):
        eval_weight(power_weight(0.5), bad)
    with pytest.raises(WeightDomainError):
        eval_weight(log_weight(), np.array([1.0, bad]))


def test_mix_is_accurate_near_zero():
    # sqrt(1+t) - 1 ~ t/2 without cancellation
    t = 1e-12
    assert mix_weight()(t) == pytest.approx(t / 2 - t * t / 8, rel=1e-14)


def test_parse_weight():
    assert parse_weight("pow:0.5").parameter == 0.5
    assert parse_weight(" LOG ").spec == "log"
    assert parse_weight("mix").spec == "mix"
    for bad in ("pow:", "pow:x", "cube", "pow:-1"):
        with pytest.raises(ValueError):
            parse_weight(bad)


def test_subadditive_examples():
    half = power_weight(0.5)
    r = check_subadditive(half, [(1.0, 1.0)])
    assert r.max_violation == pytest.approx(math.sqrt(2) - 2)
    assert check_subadditive(half, [(3.7, 0.0)]).max_violation == 0.0
    rng = np.random.default_rng(0)
    pairs = rng.uniform(-1e3, 1e3, (10_000, 2))
    assert check_subadditive(log_weight(), pairs).max_violation <= 0.0


def test_subadditive_detects_convex_weight():
    r = check_subadditive(power_weight(2.0), [(1.0, 1.0), (0.1, 0.2)])
    assert r.max_violation == pytest.approx(2.0)
    assert r.worst_pair == (1.0, 1.0)
    assert not r.ok


@pytest.mark.parametrize("w", BUILTIN, ids=lambda w: w.spec)
def test_axioms_of_builtins(w):
    flags = check_weight_axioms(w)
    assert all(flags.values()), flags


def test_growth_check_catches_bounded_profile():
    bounded = Weight("atan", np.arctan)
    assert not check_weight_axioms(bounded)["unbounded"]


def test_classification_examples():
    assert classify_weight(power_weight(0.5)).label == W_MINUS
    sq = classify_weight(power_weight(2.0))
    assert sq.label == W_PLUS and sq.p == 2.0
    assert str(sq) == "W-plus(2)"
    lin = classify_weight(power_weight(1.0))
    assert lin.label == W_MINUS and "boundary p=1" in lin.flags


def test_classification_of_mixed_shape_is_other():
    # convex up to 1, concave beyond
    w = Weight("bent", lambda a: np.where(a < 1, a**2, 2 * np.sqrt(a) - 1))
    c = classify_weight(w)
    assert c.label == OTHER and "ambiguous" in c.flags
    assert c.diagnostics["concavity_violation"] > 0 and c.diagnostics["convexity_violation"] > 0


@pytest.mark.parametrize("w", BUILTIN, ids=lambda w: w.spec)
def test_builtins_classify_as_concave(w):
    assert classify_weight(w).label == W_MINUS


@pytest.mark.parametrize("c", [0.01, 1.0, 7.5])
def test_scaled_weight(c):
    w = power_weight(0.75)
    s = scale(w, c)
    t = np.linspace(-5, 5, 101)
    np.testing.assert_allclose(s(t), w(t) / c, rtol=1e-15)
    flags = check_weight_axioms(s, growth_checks=((1e6, 10.0 / c),))
    assert all(flags.values())
    assert classify_weight(s).label == W_MINUS
    with pytest.raises(ValueError):
        scale(w, 0.0)


@given(t=finite)
def test_even_and_normalized(t):
    for w in BUILTIN:
        assert w(t) == w(-t)
        assert w(t) >= 0.0
    assert all(w(0.0) == 0.0 for w in BUILTIN)


@given(a=finite, b=finite)
def test_subadditivity_property(a, b):
    for w in BUILTIN:
        assert w(a + b) <= w(a) + w(b) + 1e-12


@given(a=st.floats(0, 1e6), b=st.floats(0, 1e6))
def test_monotone_property(a, b):
    lo, hi = min(a, b), max(a, b)
    for w in BUILTIN:
        assert w(lo) <= w(hi)

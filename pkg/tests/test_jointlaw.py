import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from invsub import DomainError, ValidationError, compound_poisson, drift_only, exponential_jumps, phi, stable
from invsub.jointlaw import JointPoint, boundary_check, htilde, log_htilde, pde_residual

from conftest import FAMILIES

S = stable(0.5)
CP = compound_poisson(1.0, exponential_jumps(1.0))


@pytest.mark.parametrize("model", list(FAMILIES.values()), ids=list(FAMILIES))
def test_htilde_at_origin_is_reciprocal(model):
    assert htilde(model, JointPoint((0.0,), (2.0,))) == 0.5


def test_htilde_examples():
    assert htilde(S, JointPoint((1.0,), (4.0,))) == pytest.approx(math.exp(-2) / 4, rel=1e-14)
    assert htilde(drift_only(1.0), JointPoint((1.0, 1.0), (1.0, 1.0))) == pytest.approx(math.exp(-2), rel=1e-14)


def test_htilde_by_hand_three_points():
    # sorted s = (0.3, 0.8, 2.0) at levels lam_total, then tail sums
    s, lam = (2.0, 0.3, 0.8), (1.5, 0.5, 2.0)
    expo = phi(S, 4.0) * 0.3 + phi(S, 3.5) * 0.5 + phi(S, 1.5) * 1.2
    expected = math.exp(-expo) / (1.5 * 0.5 * 2.0)
    assert htilde(S, JointPoint(s, lam)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize(
    "model, s, lam",
    [
        (drift_only(1.0), (0.5, 1.2), (1.0, 2.0)),
        (S, (1.0,), (1.0,)),
        (S, (0.2, 0.7, 1.5), (0.5, 1.0, 2.0)),
    ],
)
def test_pde_residual_examples(model, s, lam):
    assert pde_residual(model, JointPoint(s, lam), 1e-4) < 1e-6


def test_boundary_examples():
    a, b = boundary_check(S, JointPoint((0.0, 1.0), (2.0, 3.0)), 1)
    assert a == pytest.approx(0.5 * math.exp(-math.sqrt(3)) / 3, rel=1e-14)
    assert abs(a - b) <= 1e-14 * abs(b)
    for model in FAMILIES.values():
        a, b = boundary_check(model, JointPoint((0.0, 0.0), (1.0, 1.0)), 1)
        assert a == b == 1.0
    a, b = boundary_check(CP, JointPoint((0.0, 0.5), (1.0, 1.0)), 1)
    assert abs(a - b) <= 1e-14 * abs(b)


def test_validation():
    with pytest.raises(DomainError):
        JointPoint((1.0,), (0.0,))
    with pytest.raises(DomainError):
        JointPoint((1.0, 2.0), (1.0, -1.0))
    with pytest.raises(ValidationError):
        JointPoint((1.0,) * 5, (1.0,) * 5)
    with pytest.raises(ValidationError):
        JointPoint((-1.0,), (1.0,))
    with pytest.raises(DomainError):
        boundary_check(S, JointPoint((1.0,), (1.0,)), 1)
    with pytest.raises(IndexError):
        boundary_check(S, JointPoint((1.0, 2.0), (1.0, 1.0)), 3)
    with pytest.raises(IndexError):
        boundary_check(S, JointPoint((1.0, 2.0), (1.0, 1.0)), 0)


def test_pde_preconditions():
    with pytest.raises(DomainError):
        pde_residual(S, JointPoint((1.0, 1.0), (1.0, 1.0)), 1e-4)
    with pytest.raises(DomainError):
        pde_residual(S, JointPoint((5e-5, 1.0), (1.0, 1.0)), 1e-4)
    with pytest.raises(DomainError):
        pde_residual(S, JointPoint((1.0, 1.0001), (1.0, 1.0)), 1e-4)


def test_underflow_clamps_to_zero():
    p = JointPoint((1e4,), (1.0,))
    assert log_htilde(drift_only(1.0), p) == pytest.approx(-1e4)
    assert htilde(drift_only(1.0), p) == 0.0


points = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.0, 3.0), min_size=n, max_size=n),
        st.lists(st.floats(0.05, 5.0), min_size=n, max_size=n),
        st.permutations(range(n)),
    )
)


@pytest.mark.parametrize("name", ["stable", "gamma", "compound-poisson", "inverse-gaussian", "mixed-stable"])
@settings(max_examples=60, deadline=None)
@given(data=points)
def test_symmetry_bounds_monotonicity(name, data):
    model = FAMILIES[name]
    s, lam, perm = data
    p = JointPoint(tuple(s), tuple(lam))
    value = htilde(model, p)
    q = JointPoint(tuple(s[i] for i in perm), tuple(lam[i] for i in perm))
    assert htilde(model, q) == value
    cap = math.prod(1 / x for x in lam)
    assert 0 <= value <= cap * (1 + 1e-15)
    if all(x == 0 for x in s):
        assert value == pytest.approx(cap, rel=1e-15)
    for i in range(len(s)):
        bumped = list(s)
        bumped[i] += 0.1
        assert htilde(model, JointPoint(tuple(bumped), tuple(lam))) <= value


@pytest.mark.parametrize("name", list(FAMILIES))
def test_random_pde_residuals(name):
    model = FAMILIES[name]
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        while True:
            s = rng.uniform(0.05, 2.0, n)
            if n == 1 or np.diff(np.sort(s)).min() > 1e-2:
                break
        p = JointPoint(tuple(s), tuple(rng.uniform(0.1, 3.0, n)))
        worst = max(worst, pde_residual(model, p, 1e-4))
    assert worst < 1e-5


@pytest.mark.parametrize("name", list(FAMILIES))
@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_integral_over_s_gives_mean_transform(name, lam):
    model = FAMILIES[name]
    f = lambda s: htilde(model, JointPoint((s,), (lam,)))
    val, _ = quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1 / (lam * phi(model, lam)), rel=1e-6)

"""Invariant suites bundled for one model, as used by ``invsub verify``.

Every check yields a record ``{check, module, status, observed, tolerance}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import quad

from . import jointlaw, laplace, mc, moments, renewal
from .exponent import SubordinatorModel, mean_of_D1, phi

VERIFY_TIME = 1.5


@dataclass
class Check:
    check: str
    module: str
    status: str
    observed: float | None
    tolerance: float | None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _check(name, module, observed, tolerance, ok=None) -> Check:
    if ok is None:
        ok = observed is not None and math.isfinite(observed) and observed <= tolerance
    return Check(name, module, "pass" if ok else "fail", None if observed is None else float(observed), tolerance)


def variance_of_D1(model: SubordinatorModel) -> float:
    """``Var D(1) = int x^2 Pi(dx)``; ``inf`` for stable-type parts."""
    total = 0.0
    for c in model.components():
        p = c.params
        if c.family in ("stable", "mixed-stable"):
            return math.inf
        if c.family == "compound-poisson":
            j = c.jumps
            if j.kind == "exponential":
                second = 2.0 / j.rate**2
            elif j.kind == "deterministic":
                second = j.size**2
            else:
                second = math.fsum(x * x * q for x, q in j.atoms)
            total += p["rate"] * second
        elif c.family == "gamma":
            total += p["shape"] / p["rate"] ** 2
        elif c.family == "inverse-gaussian":
            total += p["delta"] / p["gamma"] ** 3
    return total


def grid_bias_allowance(model: SubordinatorModel, grid_step: float) -> float:
    """Allowance ``2 * delta**min(alpha, 1)`` for grid-simulated families, else 0."""
    exps = []
    for c in model.components():
        if c.family == "stable":
            exps.append(c.params["alpha"])
        elif c.family == "mixed-stable":
            exps.extend(b for _, b in c.mixture)
        elif c.family in ("gamma", "inverse-gaussian"):
            exps.append(1.0)
    if not exps:
        return 0.0
    return 2.0 * grid_step ** min(min(exps), 1.0)


def _exponent_checks(model) -> Iterator[Check]:
    yield _check("phi_at_zero", "exponent", abs(phi(model, 0.0)), 0.0)
    lam = np.logspace(-3, 3, 61)
    vals = phi(model, lam)
    yield _check("phi_monotone", "exponent", float(np.sum(np.diff(vals) < 0)), 0.0)
    # second divided differences on a nonuniform grid
    d1 = np.diff(vals) / np.diff(lam)
    d2 = np.diff(d1) / (lam[2:] - lam[:-2])
    scale = np.abs(vals[2:]) / lam[2:] ** 2 + 1e-300
    yield _check("phi_concave", "exponent", float(max(0.0, np.max(d2 / scale))), 1e-12)
    mean = mean_of_D1(model)
    if math.isfinite(mean):
        ratio = phi(model, 1e-8) / 1e-8
        yield _check("phi_small_lambda_ratio", "exponent", abs(ratio / mean - 1), 1e-4)


def _laplace_checks(model) -> Iterator[Check]:
    pairs: list[tuple[Callable, Callable]] = [
        (lambda s: 1 / s**2, lambda t: t),
        (lambda s: 2 / s**3, lambda t: t * t),
        (lambda s: 1 / (s + 1), lambda t: math.exp(-t)),
        (lambda s: 1 / (s * (s + 2)), lambda t: (1 - math.exp(-2 * t)) / 2),
        (lambda s: s**-1.5, lambda t: math.sqrt(t) / math.gamma(1.5)),
    ]
    worst = 0.0
    for fwd, orig in pairs:
        for t in (0.5, 1.0, 3.0):
            exact = orig(t)
            worst = max(worst, abs(laplace.invert(fwd, t) / exact - 1))
    yield _check("talbot_round_trip", "laplace", worst, 1e-6)
    if model.smoothness == "smooth" and not renewal._is_pure_drift(model):
        f = renewal.renewal_transform(model)
        ts = [0.5, 1.0, 2.0]
        a = laplace.invert_grid(f, ts, laplace.InversionConfig("talbot"))
        b = laplace.invert_grid(f, ts, laplace.InversionConfig("gaver-stehfest"))
        yield _check("method_agreement", "laplace", float(np.max(np.abs(b / a - 1))), 1e-4)


def _renewal_checks(model) -> Iterator[Check]:
    grid = renewal.build_renewal_grid(model, None, 2 * VERIFY_TIME)
    drops = -np.diff(grid.values)
    yield _check("grid_monotone", "renewal", float(max(0.0, drops.max())), 1e-9)
    yield _check("atom_at_zero", "renewal", abs(grid.values[0] - renewal.renewal_atom(model)), 0.0)
    far = renewal.build_renewal_grid(model, 0.01, 40.0)
    worst = 0.0
    mids = (np.arange(far.n_steps) + 0.5) * far.h
    for lam in (0.5, 1.0, 2.0, 5.0):
        fwd = far.atom0 + float(np.sum(np.exp(-lam * mids) * far.increments))
        worst = max(worst, abs(fwd * phi(model, lam) - 1))
    yield _check("forward_transform", "renewal", worst, 2e-2)
    mean = mean_of_D1(model)
    if math.isfinite(mean):
        T = 50.0 * max(variance_of_D1(model) / mean, 1.0)
        u = renewal.renewal_function(model, T)
        yield _check("renewal_theorem", "renewal", abs(u / renewal.renewal_asymptote(model, T) - 1), 0.02)


def _moment_checks(model) -> Iterator[Check]:
    t = VERIFY_TIME
    # all check times sit on nodes: no interpolation error
    grid = renewal.build_renewal_grid(model, t / 300, 2 * t)
    eng = moments.MomentEngine(grid)
    m1 = eng.moment(moments.MomentSpec((t,), (1,)))
    yield _check("base_consistency", "moments", abs(m1 - grid(t)), 1e-9)
    fine = renewal.build_renewal_grid(model, t / 2000, t)
    second = moments.MomentEngine(fine).moment(moments.MomentSpec((t,), (2,)))
    frac = moments.fractional_moment(model, t, 2.0)
    yield _check("fractional_integer_agreement", "moments", abs(frac / second - 1), 1e-4)
    points = [0.5, 1.0, 1.5, 2.0, 3.0]
    cs, var_min = 0.0, math.inf
    for i, s in enumerate(points):
        ss = eng.moment(moments.MomentSpec((s,), (2,)))
        var_min = min(var_min, ss - eng.moment(moments.MomentSpec((s,), (1,))) ** 2)
        for u in points[i + 1 :]:
            st = eng.moment(moments.MomentSpec((s, u), (1, 1)))
            tt = eng.moment(moments.MomentSpec((u,), (2,)))
            cs = max(cs, st * st / (ss * tt * (1 + 1e-6)) - 1)
    yield _check("cauchy_schwarz", "moments", max(cs, 0.0), 0.0)
    yield _check("variance_nonnegative", "moments", max(-var_min, 0.0), 1e-6)
    tbl = eng.table((2,), (0,))
    yield _check("moment_monotone_in_t", "moments", float(max(0.0, -np.diff(tbl).min())), 1e-9)
    if renewal._is_pure_drift(model):
        cov = moments.covariance_matrix(grid, points[:3], points)
        yield _check("drift_uncorrelated", "moments", float(np.abs(cov).max()), 1e-6)


def _jointlaw_checks(model, rng) -> Iterator[Check]:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        while True:
            s = rng.uniform(0.05, 2.0, n)
            if n == 1 or np.diff(np.sort(s)).min() > 1e-2:
                break
        lam = rng.uniform(0.1, 3.0, n)
        p = jointlaw.JointPoint(tuple(s), tuple(lam))
        worst = max(worst, jointlaw.pde_residual(model, p, 1e-4))
    yield _check("pde_residual", "jointlaw", worst, 1e-5)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 4))
        p = jointlaw.JointPoint(tuple(rng.uniform(0, 2, n)), tuple(rng.uniform(0.1, 3, n)))
        i = int(rng.integers(1, n + 1))
        a, b = jointlaw.boundary_check(model, p, i)
        worst = max(worst, abs(a - b) / abs(b))
    yield _check("boundary_conditions", "jointlaw", worst, 1e-13)
    worst = 0.0
    for lam in (1.0, 2.0):
        val, _ = quad(lambda s: jointlaw.htilde(model, jointlaw.JointPoint((s,), (lam,))), 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
        worst = max(worst, abs(val * lam * phi(model, lam) - 1))
    yield _check("htilde_moment_consistency", "jointlaw", worst, 1e-6)


def _mc_checks(model, n_paths, seed, grid_step) -> Iterator[Check]:
    allow = grid_bias_allowance(model, grid_step)
    for k, lam in enumerate((0.5, 1.0, 2.0)):
        r = mc.estimate_laplace(model, lam, 1.0, n_paths, seed + k, grid_step)
        diff = abs(r.estimate - math.exp(-phi(model, lam)))
        yield _check(f"mc_transform_lam_{lam:g}", "mc", diff, 3 * r.std_error + allow + 1e-12)
    t = VERIFY_TIME
    grid = renewal.build_renewal_grid(model, None, t)
    spec = moments.MomentSpec((t,), (1,))
    r = mc.estimate_joint_moment(model, spec, n_paths, seed, grid_step)
    diff = abs(r.estimate - moments.joint_moment(grid, spec))
    yield _check("mc_mean_agreement", "mc", diff, 3 * r.std_error + allow + 1e-12)
    counts = mc.path_property_violations(model, [0.5, 1.0, t], min(n_paths, 2000), seed, grid_step)
    yield _check("path_monotone", "mc", counts["D_start"] + counts["D_monotone"], 0)
    yield _check("first_passage_monotone", "mc", counts["E_monotone"], 0)
    f_d, f_e = mc.event_equality_check(model, 0.7, t, n_paths, seed, grid_step)
    band = 3 * math.sqrt(max(f_d * (1 - f_d), 1.0 / n_paths) / n_paths)
    yield _check("event_equality", "mc", abs(f_d - f_e), band)


def run_checks(
    model: SubordinatorModel, n_paths: int = 20_000, seed: int = 0, grid_step: float = mc.DEFAULT_GRID_STEP
) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    suites = (
        lambda: _exponent_checks(model),
        lambda: _laplace_checks(model),
        lambda: _renewal_checks(model),
        lambda: _moment_checks(model),
        lambda: _jointlaw_checks(model, rng),
        lambda: _mc_checks(model, n_paths, seed, grid_step),
    )
    for suite in suites:
        out.extend(suite())
    return out


def report(checks: list[Check]) -> list[dict]:
    return [asdict(c) for c in checks]

"""Renewal function ``U(t) = E E(t)``, its measure ``dU`` and Stieltjes convolution.

``U`` is obtained by inverting ``1 / (lam * phi(lam))``.  The renewal
measure may carry an atom at the origin (drift-free compound Poisson
subordinators): its mass ``lim 1/phi(lam)`` is computed analytically
because no inversion scheme can resolve it.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from .errors import DomainError, NumericError, RangeError
from .exponent import SubordinatorModel, mean_of_D1, phi, phi_limit_at_infinity
from .laplace import InversionConfig, LaplaceFunction, default_config, invert_grid

log = logging.getLogger(__name__)

DEFAULT_NODES = 400
MONOTONE_SLACK = 1e-9


def renewal_transform(model: SubordinatorModel) -> LaplaceFunction:
    """The transform ``1 / (lam phi(lam))`` of the renewal function."""
    return LaplaceFunction(lambda lam: 1.0 / (lam * phi(model, lam)), hint=model.smoothness)


def _is_pure_drift(model: SubordinatorModel) -> bool:
    return all(c.family == "drift-only" for c in model.components())


def renewal_function(model: SubordinatorModel, t: float, cfg: InversionConfig | None = None) -> float:
    """``U(t)`` for ``t > 0``.  Pure-drift models return ``t / mu`` exactly."""
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"renewal_function requires t > 0, got {t!r}")
    if _is_pure_drift(model):
        return t / model.total_drift
    f = renewal_transform(model)
    return float(invert_grid(f, [t], cfg or default_config(f.hint))[0])


def renewal_atom(model: SubordinatorModel) -> float:
    """Mass of ``dU`` at the origin, ``1 / lim phi``."""
    limit = phi_limit_at_infinity(model)
    return 0.0 if math.isinf(limit) else 1.0 / limit


@dataclass(frozen=True)
class RenewalGrid:
    """``U`` sampled at ``t_j = j*h``, ``j = 0..J``; ``values[0]`` is ``U(0+)``."""

    model: SubordinatorModel
    h: float
    values: np.ndarray
    atom0: float

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    @property
    def horizon(self) -> float:
        return self.n_steps * self.h

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.h

    @property
    def increments(self) -> np.ndarray:
        """``dU`` mass on each cell ``(t_{j-1}, t_j]``, ``j = 1..J``."""
        return np.diff(self.values)

    def node_index(self, t: float, tol: float = 1e-9) -> float:
        """Fractional grid index of ``t``, snapped to an integer when within ``tol``."""
        if not (math.isfinite(t) and t >= 0):
            raise DomainError(f"time must be nonnegative, got {t!r}")
        x = t / self.h
        if x > self.n_steps * (1 + tol) + tol:
            raise RangeError(f"t={t} lies beyond the grid horizon {self.horizon}")
        k = round(x)
        return float(k) if abs(x - k) <= tol * max(1.0, x) else min(x, float(self.n_steps))

    def __call__(self, t: float) -> float:
        """``U(t)`` by linear interpolation between nodes."""
        x = self.node_index(t)
        return float(np.interp(x, np.arange(len(self.values)), self.values))

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "U"])
        for t, u in zip(self.times, self.values):
            writer.writerow([repr(float(t)), repr(float(u))])


def build_renewal_grid(
    model: SubordinatorModel,
    h: float | None = None,
    T: float = 1.0,
    cfg: InversionConfig | None = None,
) -> RenewalGrid:
    """Tabulate ``U`` on ``[0, T]`` with step ``h`` (default ``T / 400``)."""
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"horizon must be positive, got {T!r}")
    if h is None:
        h = T / DEFAULT_NODES
    if not (math.isfinite(h) and 0 < h <= T * (1 + 1e-12)):
        raise DomainError(f"grid step must satisfy 0 < h <= T, got h={h!r}, T={T!r}")
    n = int(round(T / h))
    if abs(n * h - T) > 1e-9 * T:
        n = int(math.floor(T / h + 1e-9))
    atom0 = renewal_atom(model)
    times = np.arange(1, n + 1) * h
    if _is_pure_drift(model):
        inner = times / model.total_drift
    else:
        f = renewal_transform(model)
        try:
            inner = invert_grid(f, times, cfg or default_config(f.hint))
        except NumericError as exc:
            raise NumericError(f"renewal inversion failed on the grid: {exc}", lam=exc.lam) from exc
        bad = np.flatnonzero(~np.isfinite(inner))
        if bad.size:
            raise NumericError(f"renewal inversion failed at grid node {bad[0] + 1}")
    values = np.concatenate([[atom0], inner])
    drops = np.diff(values)
    if np.any(drops < 0):
        worst = float(-drops.min())
        if worst > MONOTONE_SLACK:
            log.warning("renewal grid not monotone: largest decrease %.3g", worst)
        # clamp only the rounding-level decreases
        tiny = (drops < 0) & (drops >= -MONOTONE_SLACK)
        for j in np.flatnonzero(tiny):
            values[j + 1] = max(values[j + 1], values[j])
    values.setflags(write=False)
    return RenewalGrid(model=model, h=float(h), values=values, atom0=atom0)


def convolve_with_dU(grid: RenewalGrid, f: Callable[[np.ndarray], np.ndarray] | np.ndarray) -> np.ndarray:
    """Stieltjes convolution ``g(t_k) = int_[0, t_k] f(t_k - tau) dU(tau)`` at every node.

    The atom at the origin contributes ``atom0 * f(t_k)``; each cell
    increment ``dU_j`` is paired with ``f`` at the cell midpoint.  ``f`` is a
    vectorised callable on ``[0, T]`` or an array of node values (midpoints
    then come from averaging neighbouring nodes, i.e. the trapezoid rule).
    """
    n = grid.n_steps
    if callable(f):
        nodes = np.asarray(f(grid.times), dtype=float) * np.ones(n + 1)
        mids = np.asarray(f((np.arange(n) + 0.5) * grid.h), dtype=float) * np.ones(n)
    else:
        nodes = np.asarray(f, dtype=float)
        if nodes.shape != (n + 1,):
            raise DomainError(f"expected {n + 1} node values, got shape {nodes.shape}")
        mids = 0.5 * (nodes[1:] + nodes[:-1])
    if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(mids))):
        raise NumericError("convolution integrand is not finite on [0, T]")
    return _stieltjes(grid.atom0, grid.increments, nodes, mids)


def _stieltjes(atom0: float, dU: np.ndarray, nodes: np.ndarray, mids: np.ndarray) -> np.ndarray:
    k = len(nodes) - 1
    out = atom0 * nodes
    if k:
        out[1:] += np.convolve(dU[:k], mids[:k])[:k]
    return out


def renewal_asymptote(model: SubordinatorModel, t: float) -> float | None:
    """``t / E D(1)`` for finite-mean models, otherwise ``None``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    mean = mean_of_D1(model)
    return None if math.isinf(mean) else t / mean

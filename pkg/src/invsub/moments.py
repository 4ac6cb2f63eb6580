"""Joint integer moments, fractional moments and covariance of ``E``.

Integer moments follow the lower-order recursion in which dividing a
transform by ``phi(lam_1 + ... + lam_n)`` becomes a Stieltjes convolution
against ``dU`` along the diagonal ``(t_1 - tau, ..., t_n - tau)``.  Every
moment function that appears is therefore a one-parameter table: the
smallest time ``x`` varies along the grid while the gaps between the times
stay fixed.  Tables are keyed by ``(orders, gap indices)`` and memoised
inside a :class:`MomentEngine`.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError, RangeError, UnsupportedError, ValidationError
from .exponent import SubordinatorModel, phi
from .laplace import InversionConfig, LaplaceFunction, default_config, invert_grid
from .renewal import RenewalGrid, _is_pure_drift, _stieltjes

MAX_TIMES = 3
MAX_TOTAL_ORDER = 6


@dataclass(frozen=True)
class MomentSpec:
    """Identifies ``E[E(t_1)^m_1 ... E(t_n)^m_n]``."""

    times: tuple[float, ...]
    orders: tuple[int, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        orders = tuple(self.orders)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "orders", orders)
        if len(times) != len(orders) or not times:
            raise ValidationError("times and orders must be non-empty and of equal length")
        if any(not (math.isfinite(t) and t > 0) for t in times):
            raise ValidationError(f"moment times must be positive, got {times}")
        if any(isinstance(m, bool) or int(m) != m or m < 1 for m in orders):
            raise ValidationError(f"moment orders must be positive integers, got {orders}")
        object.__setattr__(self, "orders", tuple(int(m) for m in orders))
        if len(times) > MAX_TIMES:
            raise UnsupportedError(f"at most {MAX_TIMES} times are supported, got {len(times)}")
        if sum(self.orders) > MAX_TOTAL_ORDER:
            raise UnsupportedError(f"total order at most {MAX_TOTAL_ORDER}, got {sum(self.orders)}")

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def total_order(self) -> int:
        return sum(self.orders)


class MomentEngine:
    """Memoised evaluator of joint moments on one renewal grid."""

    def __init__(self, grid: RenewalGrid):
        self.grid = grid
        self._dU = grid.increments
        self._tables: dict[tuple[tuple[int, ...], tuple[int, ...]], np.ndarray] = {}

    def table(self, orders: tuple[int, ...], gaps: tuple[int, ...]) -> np.ndarray:
        """Values of ``U(x + gaps*h; orders)`` for ``x = 0, h, ...`` while ``x + max gap <= T``.

        ``gaps`` are sorted grid-index offsets with ``gaps[0] == 0``.
        """
        key = (orders, gaps)
        cached = self._tables.get(key)
        if cached is not None:
            return cached
        length = self.grid.n_steps - gaps[-1] + 1
        out = np.zeros(length)
        for i, m in enumerate(orders):
            lower = list(orders)
            lower[i] -= 1
            low_orders = tuple(o for o in lower if o)
            low_gaps = tuple(g for o, g in zip(lower, gaps) if o)
            f = self._shifted(low_orders, low_gaps, length)
            mids = 0.5 * (f[1:] + f[:-1])
            out += m * _stieltjes(self.grid.atom0, self._dU, f, mids)
        self._tables[key] = out
        return out

    def _shifted(self, orders: tuple[int, ...], gaps: tuple[int, ...], length: int) -> np.ndarray:
        if not orders:
            return np.ones(length)
        lead = gaps[0]
        tbl = self.table(orders, tuple(g - lead for g in gaps))
        return tbl[lead : lead + length]

    def _check_horizon(self, times) -> None:
        for t in times:
            if t > self.grid.horizon * (1 + 1e-9):
                raise RangeError(f"t={t} lies beyond the grid horizon {self.grid.horizon}")

    def _interpolate(self, times: Sequence[float], orders: Sequence[int], on_nodes) -> float:
        """Multilinear interpolation of ``on_nodes(orders, nodes)`` between neighbouring node tuples."""
        merged: dict[float, int] = {}
        for t, m in sorted(zip(times, orders)):
            key = round(self.grid.node_index(t), 6)
            merged[key] = merged.get(key, 0) + m
        idx = sorted(merged)
        orders = tuple(merged[i] for i in idx)
        corners = []
        for x in idx:
            k = math.floor(x)
            corners.append([(k, 1.0 - (x - k)), (k + 1, x - k)])
        total = 0.0
        for combo in itertools.product(*corners):
            weight = math.prod(w for _, w in combo)
            if weight == 0.0:
                continue
            total += weight * on_nodes(orders, [k for k, _ in combo])
        return total

    def moment(self, spec: MomentSpec) -> float:
        self._check_horizon(spec.times)
        return self._interpolate(spec.times, spec.orders, self._on_nodes)

    def covariance(self, s: float, t: float) -> float:
        """``Cov(E(s), E(t))``, interpolated as a covariance so that exact zeros survive off-node."""
        self._check_horizon((s, t))

        def on_nodes(orders, nodes):
            if len(nodes) == 1:
                (k,) = nodes
                return self._on_nodes((2,), [k]) - self._on_nodes((1,), [k]) ** 2
            a, b = nodes
            return self._on_nodes((1, 1), [a, b]) - self._on_nodes((1,), [a]) * self._on_nodes((1,), [b])

        return self._interpolate((s, t), (1, 1), on_nodes)

    def _on_nodes(self, orders: tuple[int, ...], nodes: list[int]) -> float:
        merged: dict[int, int] = {}
        for k, m in zip(nodes, orders):
            merged[k] = merged.get(k, 0) + m
        keys = sorted(merged)
        tbl = self.table(tuple(merged[k] for k in keys), tuple(k - keys[0] for k in keys))
        return float(tbl[keys[0]])


def joint_moment(grid: RenewalGrid, spec: MomentSpec) -> float:
    """``E[E(t_1)^m_1 ... E(t_n)^m_n]`` by iterated convolution on ``grid``.

    Tables live on grid nodes; off-node times are handled by multilinear
    interpolation between neighbouring nodes.  On-node times involve no
    interpolation.
    """
    return MomentEngine(grid).moment(spec)


@dataclass
class MomentTable:
    """Moments for one order vector over several time tuples."""

    orders: tuple[int, ...]
    times: list[tuple[float, ...]]
    values: np.ndarray
    method: str = "recursion"
    grid: RenewalGrid | None = field(default=None, repr=False)

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        n = len(self.orders)
        writer.writerow([f"t{i + 1}" for i in range(n)] + ["value", "method"])
        for ts, v in zip(self.times, self.values):
            writer.writerow([repr(float(t)) for t in ts] + [repr(float(v)), self.method])


def moment_table(grid: RenewalGrid, orders: Sequence[int], time_rows: Sequence[Sequence[float]]) -> MomentTable:
    engine = MomentEngine(grid)
    orders = tuple(orders)
    values = np.array([engine.moment(MomentSpec(tuple(ts), orders)) for ts in time_rows])
    return MomentTable(orders, [tuple(map(float, ts)) for ts in time_rows], values, "recursion", grid)


def fractional_moment(
    model: SubordinatorModel, t: float, gamma: float, cfg: InversionConfig | None = None
) -> float:
    """``E E(t)^gamma`` by inverting ``Gamma(1+gamma) / (lam phi(lam)^gamma)``."""
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"fractional_moment requires t > 0, got {t!r}")
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"fractional_moment requires gamma > 0, got {gamma!r}")
    if _is_pure_drift(model):
        return (t / model.total_drift) ** gamma
    coef = float(gamma_fn(1.0 + gamma))
    f = LaplaceFunction(lambda lam: coef / (lam * phi(model, lam) ** gamma), hint=model.smoothness)
    return float(invert_grid(f, [t], cfg or default_config(f.hint))[0])


def covariance(grid: RenewalGrid, s: float, t: float) -> float:
    """``Cov(E(s), E(t)) = int_[0, s^t] (U(s-tau) + U(t-tau)) dU(tau) - U(s) U(t)``."""
    return MomentEngine(grid).covariance(s, t)


def covariance_matrix(grid: RenewalGrid, s_values: Sequence[float], t_values: Sequence[float]) -> np.ndarray:
    engine = MomentEngine(grid)
    out = np.empty((len(s_values), len(t_values)))
    for i, s in enumerate(s_values):
        for j, t in enumerate(t_values):
            out[i, j] = engine.covariance(s, t)
    return out

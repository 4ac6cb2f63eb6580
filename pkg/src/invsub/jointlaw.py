"""Closed-form transform of the n-time tail law of ``E`` and its PDE checks.

``htilde`` is the Laplace transform in ``(t_1..t_n)`` of
``P[E(t_i) > s_i, i=1..n]``.  With the ``s_i`` sorted it is a product of
exponentials of ``phi`` evaluated at tail sums of the ``lam_i``.  The
first-order PDE and the boundary reduction are verified numerically
rather than solved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .exponent import SubordinatorModel, phi

MAX_POINTS = 4
EXP_FLOOR = -700.0


@dataclass(frozen=True)
class JointPoint:
    s: tuple[float, ...]
    lambdas: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(x) for x in self.s)
        lam = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "lambdas", lam)
        if len(s) != len(lam) or not 1 <= len(s) <= MAX_POINTS:
            raise ValidationError(f"need 1..{MAX_POINTS} (s, lam) pairs of equal length")
        if any(not (math.isfinite(x) and x >= 0) for x in s):
            raise ValidationError(f"s values must be nonnegative, got {s}")
        if any(not (math.isfinite(x) and x > 0) for x in lam):
            raise DomainError(f"lambda values must be positive, got {lam}")

    @property
    def n(self) -> int:
        return len(self.s)


def log_htilde(model: SubordinatorModel, p: JointPoint) -> float:
    order = sorted(range(p.n), key=lambda i: p.s[i])
    exponent = 0.0
    prev = 0.0
    for rank, i in enumerate(order):
        level = math.fsum(p.lambdas[j] for j in order[rank:])
        exponent -= phi(model, level) * (p.s[i] - prev)
        prev = p.s[i]
    return exponent - math.fsum(math.log(x) for x in p.lambdas)


def htilde(model: SubordinatorModel, p: JointPoint) -> float:
    """Transform of the tail law at ``(s, lambdas)``; underflows to 0 past ``e^-700``."""
    value = log_htilde(model, p)
    return 0.0 if value < EXP_FLOOR else math.exp(value)


def _with_s(p: JointPoint, i: int, value: float) -> JointPoint:
    s = list(p.s)
    s[i] = value
    return JointPoint(tuple(s), p.lambdas)


def pde_residual(model: SubordinatorModel, p: JointPoint, fd_step: float = 1e-4) -> float:
    """Relative residual of ``sum_i dH/ds_i + phi(sum lam) H`` by central differences."""
    if not fd_step > 0:
        raise DomainError("fd_step must be positive")
    if min(p.s) <= fd_step:
        raise DomainError(f"all s_i must exceed fd_step={fd_step}")
    distinct = np.unique(p.s)
    if distinct.size < len(p.s):
        raise DomainError("tied s values sit on a kink of htilde")
    if distinct.size > 1 and fd_step >= 0.5 * np.diff(distinct).min():
        raise DomainError(f"fd_step={fd_step} is not below half the smallest gap between s values")
    h0 = htilde(model, p)
    if h0 == 0.0:
        raise DomainError("htilde underflows at this point")
    total = 0.0
    for i in range(p.n):
        up = htilde(model, _with_s(p, i, p.s[i] + fd_step))
        down = htilde(model, _with_s(p, i, p.s[i] - fd_step))
        total += (up - down) / (2.0 * fd_step)
    return abs(total + phi(model, math.fsum(p.lambdas)) * h0) / h0


def boundary_check(model: SubordinatorModel, p: JointPoint, i: int) -> tuple[float, float]:
    """``(H_n with s_i = 0, H_{n-1} without coordinate i / lam_i)``; equal in theory.

    ``i`` is 1-based, matching the usual ``i = 1..n`` labelling.
    """
    if p.n < 2:
        raise DomainError("boundary reduction needs n >= 2")
    if not 1 <= i <= p.n:
        raise IndexError(f"coordinate {i} out of range 1..{p.n}")
    i -= 1
    left = htilde(model, _with_s(p, i, 0.0))
    rest = JointPoint(p.s[:i] + p.s[i + 1 :], p.lambdas[:i] + p.lambdas[i + 1 :])
    right = htilde(model, rest) / p.lambdas[i]
    return left, right

"""Monte Carlo oracle: simulate ``D``, read off ``E`` by first passage.

Finite-activity models (drift plus compound Poisson parts) are simulated
exactly as event lists.  Anything with an infinite-activity part is
simulated on an increment grid of step ``grid_step``; there ``E(t)`` is the
first grid node where ``D`` exceeds ``t``, which overestimates the true
passage time by less than one step.

Random streams are Philox generators keyed through ``SeedSequence``.
:func:`simulate_path` keys by ``(seed, path index)``.  The vectorised
estimators key by ``(seed, block index)`` with a fixed block size, so a
given path's realisation never depends on how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HorizonError, UnsupportedError
from .exponent import SubordinatorModel

BLOCK_SIZE = 4096
GRID_CHUNK = 512
EVENT_CHUNK = 32
MAX_EXTENSIONS = 2**20
DEFAULT_GRID_STEP = 1e-3

_PATH_STREAM = 0
_BLOCK_STREAM = 1


def path_rng(seed: int, index: int, stream: int = _PATH_STREAM) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), stream, int(index)])))


@dataclass(frozen=True)
class PathSkeleton:
    """One simulated path; ``D(s) = drift*s + jump part``.

    ``event-list``: ``times[k]`` are jump times (``times[0] == 0``) and
    ``values[k]`` the cumulative jump part just after them.
    ``increment-grid``: ``values[j]`` is the jump part at ``j*step``.
    """

    representation: str
    drift: float
    values: np.ndarray
    times: np.ndarray | None = None
    step: float | None = None

    @property
    def horizon(self) -> float:
        if self.representation == "event-list":
            return float(self.times[-1])
        return (len(self.values) - 1) * self.step

    def D(self, s: float) -> float:
        if s < 0:
            raise DomainError("operational time must be nonnegative")
        if s > self.horizon * (1 + 1e-12):
            raise HorizonError(f"s={s} beyond simulated horizon {self.horizon}")
        if self.representation == "event-list":
            k = int(np.searchsorted(self.times, s, side="right")) - 1
        else:
            k = min(int(math.floor(s / self.step + 1e-9)), len(self.values) - 1)
        return self.drift * s + float(self.values[k])

    def node_values(self) -> np.ndarray:
        """``D`` at the stored nodes (event times or grid nodes)."""
        if self.representation == "event-list":
            return self.drift * self.times + self.values
        return self.drift * self.step * np.arange(len(self.values)) + self.values


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    std_error: float
    n_paths: int
    seed: int


def _is_finite_activity(model: SubordinatorModel) -> bool:
    return all(c.family in ("drift-only", "compound-poisson") for c in model.components())


def _jump_parts(model: SubordinatorModel):
    return [c for c in model.components() if c.family == "compound-poisson"]


# -- increment samplers -------------------------------------------------------


def positive_stable(rng: np.random.Generator, alpha: float, size) -> np.ndarray:
    """Draws ``S`` with ``E exp(-lam S) = exp(-lam**alpha)`` (Kanter's representation)."""
    u = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    a = (
        np.sin(alpha * u) ** (alpha / (1.0 - alpha))
        * np.sin((1.0 - alpha) * u)
        / np.sin(u) ** (1.0 / (1.0 - alpha))
    )
    return (a / w) ** ((1.0 - alpha) / alpha)


def _compound_sum(rng, rate: float, jumps, dt: float, size) -> np.ndarray:
    counts = rng.poisson(rate * dt, size)
    total = np.zeros(size)
    flat_counts = counts.ravel()
    hit = np.flatnonzero(flat_counts)
    if hit.size:
        draws = jumps.sample(rng, int(flat_counts[hit].sum()))
        np.add.at(total.ravel(), np.repeat(hit, flat_counts[hit]), draws)
    return total


def _increments(model: SubordinatorModel, rng: np.random.Generator, dt: float, size) -> np.ndarray:
    """Jump-part increments of ``D`` over steps of length ``dt`` (drift excluded)."""
    out = np.zeros(size)
    for c in model.components():
        p = c.params
        if c.family == "stable":
            out += dt ** (1.0 / p["alpha"]) * positive_stable(rng, p["alpha"], size)
        elif c.family == "mixed-stable":
            for w, beta in c.mixture:
                out += (w * dt) ** (1.0 / beta) * positive_stable(rng, beta, size)
        elif c.family == "gamma":
            out += rng.gamma(p["shape"] * dt, 1.0 / p["rate"], size)
        elif c.family == "inverse-gaussian":
            level = p["delta"] * dt
            out += rng.wald(level / p["gamma"], level * level, size)
        elif c.family == "compound-poisson":
            out += _compound_sum(rng, p["rate"], c.jumps, dt, size)
        elif c.family != "drift-only":
            raise UnsupportedError(f"cannot simulate family {c.family!r}")
    return out


def _event_draws(model: SubordinatorModel, rng: np.random.Generator, size):
    """Inter-arrival waits and jump sizes of the merged compound Poisson part."""
    parts = _jump_parts(model)
    rates = np.array([c.params["rate"] for c in parts])
    total = rates.sum()
    waits = rng.standard_exponential(size) / total
    if len(parts) == 1:
        sizes = parts[0].jumps.sample(rng, int(np.prod(size))).reshape(size)
    else:
        which = rng.choice(len(parts), size=size, p=rates / total)
        sizes = np.empty(size)
        for k, c in enumerate(parts):
            mask = which == k
            sizes[mask] = c.jumps.sample(rng, int(mask.sum()))
    return waits, sizes


# -- single paths -------------------------------------------------------------


def simulate_path(
    model: SubordinatorModel,
    horizon_s: float,
    seed: int,
    grid_step: float = DEFAULT_GRID_STEP,
    index: int = 0,
) -> PathSkeleton:
    """Simulate ``D`` on ``[0, horizon_s]``; the stream is keyed by ``(seed, index)``."""
    if not horizon_s > 0:
        raise DomainError("horizon must be positive")
    rng = path_rng(seed, index)
    drift = model.total_drift
    if _is_finite_activity(model):
        if not _jump_parts(model):
            return PathSkeleton("event-list", drift, np.array([0.0, 0.0]), np.array([0.0, horizon_s]))
        times, values = [0.0], [0.0]
        now, level = 0.0, 0.0
        while True:
            waits, sizes = _event_draws(model, rng, EVENT_CHUNK)
            for w, x in zip(waits, sizes):
                now += w
                if now > horizon_s:
                    break
                level += x
                times.append(now)
                values.append(level)
            if now > horizon_s:
                break
        # closing node carries the last level to the horizon
        times.append(horizon_s)
        values.append(level)
        return PathSkeleton("event-list", drift, np.array(values), np.array(times))
    if not grid_step > 0:
        raise DomainError("grid_step must be positive")
    n = int(math.ceil(horizon_s / grid_step - 1e-9))
    inc = _increments(model, rng, grid_step, n)
    values = np.concatenate([[0.0], np.cumsum(inc)])
    return PathSkeleton("increment-grid", drift, values, step=grid_step)


def first_passage(path: PathSkeleton, t: float) -> float:
    """``E(t) = inf{s : D(s) > t}`` on one path."""
    if not t >= 0:
        raise DomainError("t must be nonnegative")
    d = path.node_values()
    if path.representation == "increment-grid":
        above = np.flatnonzero(d > t)
        if not above.size:
            raise HorizonError(f"path never exceeds t={t} within s<={path.horizon}")
        return float(above[0] * path.step)
    # event list: the last node is the horizon, not a jump
    above = np.flatnonzero(d > t)
    if above.size and (above[0] < len(d) - 1 or path.drift > 0):
        k = int(above[0])
        if path.drift > 0:
            crossing = (t - path.values[k - 1]) / path.drift
            if crossing < path.times[k]:
                return float(crossing)
        return float(path.times[k])
    raise HorizonError(f"path never exceeds t={t} within s<={path.horizon}")


# -- vectorised blocks ----------------------------------------------------------


@dataclass
class _Block:
    passage: np.ndarray  # (n, len(times))
    d_at_s: np.ndarray | None  # (n,) jump+drift value at record_s, inf if never reached
    bad_increments: int


def _grid_block(model, times, n, rng, step, record_s) -> _Block:
    drift = model.total_drift
    tmax = max(times) if len(times) else -math.inf
    passage = np.full((n, len(times)), np.nan)
    d_at_s = None if record_s is None else np.full(n, np.inf)
    rec_node = None if record_s is None else int(round(record_s / step))
    level = np.zeros(n)
    active = np.arange(n)
    offset = 0  # grid index of the current chunk's starting node
    bad = 0
    if rec_node == 0:
        d_at_s[:] = 0.0
    for _ in range(MAX_EXTENSIONS):
        if not active.size:
            break
        inc = _increments(model, rng, step, (active.size, GRID_CHUNK))
        bad += int(np.count_nonzero(inc < 0))
        nodes = offset + np.arange(1, GRID_CHUNK + 1)
        d = level[active, None] + np.cumsum(inc, axis=1) + drift * step * nodes[None, :]
        for j, t in enumerate(times):
            todo = np.isnan(passage[active, j])
            hit = d > t
            found = todo & hit.any(axis=1)
            first = hit.argmax(axis=1)
            passage[active[found], j] = nodes[first[found]] * step
        if rec_node is not None and offset < rec_node <= offset + GRID_CHUNK:
            d_at_s[active] = d[:, rec_node - offset - 1]
        level[active] = d[:, -1] - drift * step * nodes[-1]
        offset += GRID_CHUNK
        done = d[:, -1] > tmax
        if rec_node is not None:
            done &= offset >= rec_node
        active = active[~done]
    else:
        raise HorizonError("paths failed to pass the requested level")
    return _Block(passage, d_at_s, bad)


def _event_block(model, times, n, rng, record_s) -> _Block:
    drift = model.total_drift
    times = np.asarray(times, dtype=float)
    passage = np.full((n, len(times)), np.nan)
    d_at_s = None if record_s is None else np.full(n, np.inf)
    if not _jump_parts(model):
        passage[:] = times[None, :] / drift
        if record_s is not None:
            d_at_s[:] = drift * record_s
        return _Block(passage, d_at_s, 0)
    tmax = times.max() if times.size else -math.inf
    now = np.zeros(n)
    level = np.zeros(n)
    active = np.arange(n)
    bad = 0
    for _ in range(MAX_EXTENSIONS):
        if not active.size:
            break
        waits, sizes = _event_draws(model, rng, (active.size, EVENT_CHUNK))
        bad += int(np.count_nonzero(sizes <= 0))
        tau = now[active, None] + np.cumsum(waits, axis=1)
        jumps = level[active, None] + np.cumsum(sizes, axis=1)
        before = np.concatenate([level[active, None], jumps[:, :-1]], axis=1)
        start = np.concatenate([now[active, None], tau[:, :-1]], axis=1)
        d_after = drift * tau + jumps
        for j, t in enumerate(times):
            todo = np.isnan(passage[active, j])
            hit = d_after > t
            found = todo & hit.any(axis=1)
            k = hit.argmax(axis=1)
            rows = np.arange(active.size)
            e = tau[rows, k]
            if drift > 0:
                crossing = (t - before[rows, k]) / drift
                e = np.where(crossing < e, np.maximum(crossing, start[rows, k]), e)
            passage[active[found], j] = e[found]
        if record_s is not None:
            pending = np.isinf(d_at_s[active]) & (tau[:, -1] > record_s)
            if pending.any():
                # jump part at record_s: last level among events with tau <= record_s
                cnt = (tau[pending] <= record_s).sum(axis=1)
                lv = np.where(cnt > 0, jumps[pending, np.maximum(cnt - 1, 0)], level[active[pending]])
                d_at_s[active[pending]] = lv + drift * record_s
        now[active] = tau[:, -1]
        level[active] = jumps[:, -1]
        done = d_after[:, -1] > tmax
        if record_s is not None:
            done &= ~np.isinf(d_at_s[active])
        active = active[~done]
    else:
        raise HorizonError("paths failed to pass the requested level")
    return _Block(passage, d_at_s, bad)


def _simulate_blocks(model, times, n_paths, seed, grid_step, record_s=None):
    if n_paths < 1:
        raise DomainError("n_paths must be positive")
    if any(t < 0 for t in times):
        raise DomainError("passage levels must be nonnegative")
    out_e, out_d, bad = [], [], 0
    for b, start in enumerate(range(0, n_paths, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, n_paths - start)
        rng = path_rng(seed, b, _BLOCK_STREAM)
        if _is_finite_activity(model):
            blk = _event_block(model, times, n, rng, record_s)
        else:
            blk = _grid_block(model, times, n, rng, grid_step, record_s)
        out_e.append(blk.passage)
        if record_s is not None:
            out_d.append(blk.d_at_s)
        bad += blk.bad_increments
    passage = np.concatenate(out_e)
    d_at_s = np.concatenate(out_d) if record_s is not None else None
    return passage, d_at_s, bad


def sample_first_passage(
    model: SubordinatorModel, times, n_paths: int, seed: int, grid_step: float = DEFAULT_GRID_STEP
) -> np.ndarray:
    """``E(t_j)`` on ``n_paths`` independent paths, shape ``(n_paths, len(times))``."""
    passage, _, _ = _simulate_blocks(model, list(map(float, times)), n_paths, seed, grid_step)
    return passage


def _result(samples: np.ndarray, n_paths: int, seed: int) -> EstimatorResult:
    est = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
    return EstimatorResult(est, se, n_paths, seed)


def estimate_joint_moment(
    model: SubordinatorModel, spec, n_paths: int, seed: int, grid_step: float = DEFAULT_GRID_STEP
) -> EstimatorResult:
    """Average of ``prod E(t_i)^m_i`` over common paths."""
    passage = sample_first_passage(model, spec.times, n_paths, seed, grid_step)
    samples = np.prod(passage ** np.asarray(spec.orders, dtype=float)[None, :], axis=1)
    return _result(samples, n_paths, seed)


def estimate_covariance(
    model: SubordinatorModel, s: float, t: float, n_paths: int, seed: int, grid_step: float = DEFAULT_GRID_STEP
) -> EstimatorResult:
    passage = sample_first_passage(model, [s, t], n_paths, seed, grid_step)
    centred = passage - passage.mean(axis=0)
    samples = centred[:, 0] * centred[:, 1] * n_paths / max(n_paths - 1, 1)
    return _result(samples, n_paths, seed)


def estimate_laplace(
    model: SubordinatorModel, lam: float, s: float, n_paths: int, seed: int, grid_step: float = DEFAULT_GRID_STEP
) -> EstimatorResult:
    """Empirical ``E exp(-lam D(s))`` from simulated paths."""
    _, d_at_s, _ = _simulate_blocks(model, [], n_paths, seed, grid_step, record_s=s)
    return _result(np.exp(-lam * d_at_s), n_paths, seed)


def event_equality_check(
    model: SubordinatorModel, s: float, t: float, n_paths: int, seed: int, grid_step: float = DEFAULT_GRID_STEP
) -> tuple[float, float]:
    """Frequencies of ``{D(s) < t}`` and ``{E(t) > s}`` on the same paths."""
    passage, d_at_s, _ = _simulate_blocks(model, [t], n_paths, seed, grid_step, record_s=s)
    return float(np.mean(d_at_s < t)), float(np.mean(passage[:, 0] > s))


def path_property_violations(
    model: SubordinatorModel,
    times,
    n_paths: int,
    seed: int,
    grid_step: float = DEFAULT_GRID_STEP,
) -> dict[str, int]:
    """Count monotonicity violations of ``D`` and of ``t -> E(t)`` over single paths.

    Each path is simulated with :func:`simulate_path`; the horizon doubles
    until the path passes ``max(times)``.
    """
    times = sorted(float(t) for t in times)
    counts = {"D_start": 0, "D_monotone": 0, "E_monotone": 0}
    start = max(times[-1], 1.0)
    for i in range(n_paths):
        horizon = start
        for _ in range(64):
            path = simulate_path(model, horizon, seed, grid_step, index=i)
            if path.node_values()[-1] > times[-1]:
                break
            horizon *= 2.0
        else:
            raise HorizonError(f"path {i} failed to pass t={times[-1]}")
        d = path.node_values()
        counts["D_start"] += int(d[0] != 0.0)
        counts["D_monotone"] += int(np.any(np.diff(d) < 0))
        e = [first_passage(path, t) for t in times]
        counts["E_monotone"] += int(np.any(np.diff(e) < 0))
    return counts

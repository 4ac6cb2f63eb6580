"""Subordinator models and their Laplace exponents.

A model is an immutable description of a drift plus a Lévy measure drawn
from one of a handful of families with closed-form exponents.  ``phi``
accepts real arguments (``lam >= 0``) and complex arguments (used along
inversion contours); complex evaluation uses principal branches.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DomainError, ValidationError

FAMILIES = (
    "drift-only",
    "stable",
    "mixed-stable",
    "compound-poisson",
    "gamma",
    "inverse-gaussian",
    "composite",
)
JUMP_KINDS = ("exponential", "deterministic", "discrete")

_PARAM_KEYS = {
    "drift-only": (),
    "stable": ("alpha",),
    "mixed-stable": ("components",),
    "compound-poisson": ("rate", "jumps"),
    "gamma": ("shape", "rate"),
    "inverse-gaussian": ("delta", "gamma"),
}


def _positive(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class JumpDistribution:
    """Law of the jump sizes of a compound Poisson subordinator.

    ``kind`` is one of ``exponential`` (``rate``), ``deterministic``
    (``size``) or ``discrete`` (``atoms`` as ``(size, prob)`` pairs).
    """

    kind: str
    rate: float | None = None
    size: float | None = None
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "exponential":
            _positive("exponential jump rate", self.rate)
        elif self.kind == "deterministic":
            _positive("deterministic jump size", self.size)
        elif self.kind == "discrete":
            if not self.atoms:
                raise ValidationError("discrete jump distribution needs at least one atom")
            for size, prob in self.atoms:
                _positive("jump size", size)
                _positive("atom probability", prob)
            total = math.fsum(p for _, p in self.atoms)
            if abs(total - 1.0) > 1e-12:
                raise ValidationError(f"atom probabilities must sum to 1, got {total}")
        else:
            raise ValidationError(f"unknown jump kind {self.kind!r}")

    @property
    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "deterministic":
            return self.size
        return math.fsum(x * p for x, p in self.atoms)

    @property
    def lattice(self) -> bool:
        """True when the jump law has atoms, so the renewal function has jumps."""
        return self.kind != "exponential"

    def one_minus_transform(self, lam):
        """Return ``1 - E exp(-lam * J)`` without cancellation at small ``lam``."""
        if self.kind == "exponential":
            return lam / (self.rate + lam)
        if self.kind == "deterministic":
            return -np.expm1(-lam * self.size)
        return sum(p * -np.expm1(-lam * x) for x, p in self.atoms)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "exponential":
            return rng.standard_exponential(n) / self.rate
        if self.kind == "deterministic":
            return np.full(n, self.size)
        sizes = np.array([x for x, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        return sizes[rng.choice(len(sizes), size=n, p=probs / probs.sum())]

    def to_dict(self) -> dict:
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.rate}
        if self.kind == "deterministic":
            return {"kind": "deterministic", "size": self.size}
        return {"kind": "discrete", "atoms": [{"size": x, "prob": p} for x, p in self.atoms]}


@dataclass(frozen=True)
class SubordinatorModel:
    """Drift plus Lévy measure of a subordinator.

    Use the constructor helpers (:func:`stable`, :func:`compound_poisson`,
    ...) rather than building instances by hand.
    """

    family: str
    drift: float = 0.0
    params: Mapping[str, float] = field(default_factory=dict)
    jumps: JumpDistribution | None = None
    mixture: tuple[tuple[float, float], ...] = ()
    parts: tuple["SubordinatorModel", ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        drift = float(self.drift)
        if not (math.isfinite(drift) and drift >= 0):
            raise ValidationError(f"drift must be nonnegative, got {self.drift!r}")
        fam, p = self.family, self.params
        if fam == "drift-only" and drift <= 0:
            raise ValidationError("drift-only model needs a positive drift")
        if fam == "stable":
            _check_exponent(p.get("alpha"), "stable exponent")
        elif fam == "mixed-stable":
            if not self.mixture:
                raise ValidationError("mixed-stable model needs at least one component")
            for w, beta in self.mixture:
                _positive("mixing weight", w)
                _check_exponent(beta, "mixed-stable exponent")
            total = math.fsum(w for w, _ in self.mixture)
            if abs(total - 1.0) > 1e-12:
                raise ValidationError(f"mixing weights must sum to 1, got {total}")
        elif fam == "compound-poisson":
            _positive("compound Poisson rate", p.get("rate"))
            if not isinstance(self.jumps, JumpDistribution):
                raise ValidationError("compound Poisson model needs a jump distribution")
        elif fam == "gamma":
            _positive("gamma shape", p.get("shape"))
            _positive("gamma rate", p.get("rate"))
        elif fam == "inverse-gaussian":
            _positive("inverse Gaussian delta", p.get("delta"))
            _positive("inverse Gaussian gamma", p.get("gamma"))
        elif fam == "composite":
            if not self.parts:
                raise ValidationError("composite model needs at least one part")
            for part in self.parts:
                if not isinstance(part, SubordinatorModel):
                    raise ValidationError("composite parts must be models")

    # -- structural queries -------------------------------------------------

    def components(self) -> list["SubordinatorModel"]:
        """Flatten composites into their non-composite parts (drift kept per part)."""
        if self.family != "composite":
            return [self]
        out = []
        for part in self.parts:
            out.extend(part.components())
        return out

    @property
    def total_drift(self) -> float:
        if self.family == "composite":
            return self.drift + sum(p.total_drift for p in self.parts)
        return self.drift

    @property
    def smoothness(self) -> str:
        """``"jumpy"`` when the renewal function has jump discontinuities."""
        for c in self.components():
            if c.family == "compound-poisson" and c.jumps.lattice:
                return "jumpy"
        return "smooth"

    def to_dict(self) -> dict:
        if self.family == "composite":
            d = {"family": "composite", "parts": [p.to_dict() for p in self.parts]}
            if self.drift:
                d["drift"] = self.drift
            return d
        params: dict[str, Any]
        if self.family == "mixed-stable":
            params = {"components": [{"weight": w, "beta": b} for w, b in self.mixture]}
        elif self.family == "compound-poisson":
            params = {"rate": self.params["rate"], "jumps": self.jumps.to_dict()}
        else:
            params = dict(self.params)
        return {"family": self.family, "drift": self.drift, "params": params}


def _check_exponent(value, name: str) -> None:
    if not isinstance(value, (int, float)) or not (0.0 < float(value) < 1.0):
        raise ValidationError(f"{name} must lie in (0,1), got {value!r}")


# -- constructor helpers ----------------------------------------------------


def drift_only(mu: float) -> SubordinatorModel:
    return SubordinatorModel("drift-only", drift=mu)


def stable(alpha: float, drift: float = 0.0) -> SubordinatorModel:
    return SubordinatorModel("stable", drift=drift, params={"alpha": float(alpha)})


def mixed_stable(components: Sequence[tuple[float, float]], drift: float = 0.0) -> SubordinatorModel:
    """Mixture ``sum_i w_i * lam**beta_i`` from ``(weight, beta)`` pairs."""
    mix = tuple((float(w), float(b)) for w, b in components)
    return SubordinatorModel("mixed-stable", drift=drift, mixture=mix)


def compound_poisson(rate: float, jumps: JumpDistribution, drift: float = 0.0) -> SubordinatorModel:
    return SubordinatorModel("compound-poisson", drift=drift, params={"rate": float(rate)}, jumps=jumps)


def exponential_jumps(rate: float) -> JumpDistribution:
    return JumpDistribution("exponential", rate=float(rate))


def deterministic_jumps(size: float) -> JumpDistribution:
    return JumpDistribution("deterministic", size=float(size))


def discrete_jumps(atoms: Sequence[tuple[float, float]]) -> JumpDistribution:
    return JumpDistribution("discrete", atoms=tuple((float(x), float(p)) for x, p in atoms))


def gamma_process(shape: float, rate: float, drift: float = 0.0) -> SubordinatorModel:
    return SubordinatorModel("gamma", drift=drift, params={"shape": float(shape), "rate": float(rate)})


def inverse_gaussian(delta: float, gamma: float, drift: float = 0.0) -> SubordinatorModel:
    return SubordinatorModel("inverse-gaussian", drift=drift, params={"delta": float(delta), "gamma": float(gamma)})


def composite(*parts: SubordinatorModel, drift: float = 0.0) -> SubordinatorModel:
    return SubordinatorModel("composite", drift=drift, parts=tuple(parts))


# -- exponent evaluation ----------------------------------------------------


def _phi_jumps(model: SubordinatorModel, lam):
    """Lévy-measure part of the exponent (drift excluded)."""
    fam, p = model.family, model.params
    if fam == "drift-only":
        return lam * 0.0
    if fam == "stable":
        return lam ** p["alpha"]
    if fam == "mixed-stable":
        return sum(w * lam**b for w, b in model.mixture)
    if fam == "compound-poisson":
        return p["rate"] * model.jumps.one_minus_transform(lam)
    if fam == "gamma":
        return p["shape"] * np.log1p(lam / p["rate"])
    if fam == "inverse-gaussian":
        g = p["gamma"]
        # delta*(sqrt(2 lam + g^2) - g), rationalised
        return p["delta"] * 2.0 * lam / (np.sqrt(2.0 * lam + g * g) + g)
    return sum(_phi_jumps(part, lam) + part.drift * lam for part in model.parts)


def phi(model: SubordinatorModel, lam):
    """Laplace exponent ``phi(lam)`` with ``E exp(-lam D(s)) = exp(-s phi(lam))``.

    Real input must be nonnegative; complex input is evaluated on principal
    branches and is not range-checked.  Scalars in, scalars out.
    """
    arr = np.asarray(lam)
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
        if np.any(np.isnan(arr)) or np.any(arr < 0):
            raise DomainError(f"phi requires lam >= 0, got {lam!r}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = model.drift * arr + _phi_jumps(model, arr)
    if np.ndim(out) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def mean_of_D1(model: SubordinatorModel) -> float:
    """``E D(1) = phi'(0+)``; ``math.inf`` for stable-type components."""
    total = model.drift
    fam, p = model.family, model.params
    if fam in ("stable", "mixed-stable"):
        return math.inf
    if fam == "compound-poisson":
        total += p["rate"] * model.jumps.mean
    elif fam == "gamma":
        total += p["shape"] / p["rate"]
    elif fam == "inverse-gaussian":
        total += p["delta"] / p["gamma"]
    elif fam == "composite":
        total += sum(mean_of_D1(part) for part in model.parts)
    return total


def phi_limit_at_infinity(model: SubordinatorModel) -> float:
    """``lim phi(lam)`` as ``lam -> inf``: the total jump rate, or ``inf``."""
    if model.drift > 0:
        return math.inf
    fam = model.family
    if fam == "compound-poisson":
        return model.params["rate"]
    if fam == "composite":
        return math.fsum(phi_limit_at_infinity(part) for part in model.parts)
    return math.inf


# -- JSON ---------------------------------------------------------------------


def _reject_unknown(obj: Mapping, allowed: Sequence[str], where: str) -> None:
    extra = set(obj) - set(allowed)
    if extra:
        raise ValidationError(f"unknown field(s) in {where}: {', '.join(sorted(extra))}")


def _jumps_from_dict(d: Mapping) -> JumpDistribution:
    if not isinstance(d, Mapping) or "kind" not in d:
        raise ValidationError("jumps must be an object with a 'kind' field")
    kind = d["kind"]
    if kind == "exponential":
        _reject_unknown(d, ("kind", "rate"), "exponential jumps")
        return JumpDistribution("exponential", rate=d.get("rate"))
    if kind == "deterministic":
        _reject_unknown(d, ("kind", "size"), "deterministic jumps")
        return JumpDistribution("deterministic", size=d.get("size"))
    if kind == "discrete":
        _reject_unknown(d, ("kind", "atoms"), "discrete jumps")
        atoms = []
        for a in d.get("atoms") or ():
            _reject_unknown(a, ("size", "prob"), "jump atom")
            atoms.append((a["size"], a["prob"]))
        return JumpDistribution("discrete", atoms=tuple(atoms))
    raise ValidationError(f"unknown jump kind {kind!r}")


def model_from_dict(d: Mapping) -> SubordinatorModel:
    """Build a model from its JSON form; unknown fields are rejected."""
    if not isinstance(d, Mapping):
        raise ValidationError("model must be a JSON object")
    family = d.get("family")
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    if family == "composite":
        _reject_unknown(d, ("family", "drift", "parts"), "composite model")
        parts = d.get("parts")
        if not isinstance(parts, list):
            raise ValidationError("composite model needs a 'parts' list")
        return composite(*(model_from_dict(p) for p in parts), drift=d.get("drift", 0.0))
    _reject_unknown(d, ("family", "drift", "params"), "model")
    drift = d.get("drift", 0.0)
    params = d.get("params", {})
    if not isinstance(params, Mapping):
        raise ValidationError("params must be an object")
    _reject_unknown(params, _PARAM_KEYS[family], f"{family} params")
    missing = [k for k in _PARAM_KEYS[family] if k not in params]
    if missing:
        raise ValidationError(f"missing {family} parameter(s): {', '.join(missing)}")
    try:
        if family == "drift-only":
            return drift_only(drift)
        if family == "stable":
            return stable(params["alpha"], drift)
        if family == "mixed-stable":
            comps = []
            for c in params["components"]:
                _reject_unknown(c, ("weight", "beta"), "mixed-stable component")
                comps.append((c["weight"], c["beta"]))
            return mixed_stable(comps, drift)
        if family == "compound-poisson":
            return compound_poisson(params["rate"], _jumps_from_dict(params["jumps"]), drift)
        if family == "gamma":
            return gamma_process(params["shape"], params["rate"], drift)
        return inverse_gaussian(params["delta"], params["gamma"], drift)
    except (TypeError, KeyError) as exc:
        raise ValidationError(f"malformed {family} model: {exc}") from exc


def load_model(path: str | Path) -> SubordinatorModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_dict(data)

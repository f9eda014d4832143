"""Target functions: registry, standardization to [0, 1], discretization, eta.

A :class:`FunctionSpec` names a family with its parameters, a domain and the
landscape features (zeros, points where the log-curvature blows up) that the
clustered and variational loaders care about.  :class:`StandardizedFunction`
views it on ``[0, 1]`` through ``x' = x_min + x * L`` and fixes the encoding:

* ``amplitude`` loads ``f`` into amplitudes, so the density that drives the
  rotation angles is ``f**2``;
* ``probability`` loads ``sqrt(f)`` so that probabilities equal ``f``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import DegenerateFunction, DomainError, SingularityError
from .simulator import StateVector

FAMILIES = ("normal", "sine", "black_scholes", "exp_x32", "beta", "uniform", "tabulated")
ENCODINGS = ("amplitude", "probability")
SAME_SLOPE = "same_slope_sign"
OPPOSITE_SLOPE = "opposite_slope_sign"
ZERO_KINDS = (SAME_SLOPE, OPPOSITE_SLOPE)

ETA_GRID_POINTS = 2**14
_LANDMARK_TOL = 1e-9


def _bs_scale(params):
    K = float(params["K"])
    return K, K * float(params["c"])


def _f_normal(x, p):
    return np.exp(-((x - p["mu"]) ** 2) / (2.0 * p["sigma"] ** 2))


def _c_normal(x, p):
    return np.full_like(x, -1.0 / p["sigma"] ** 2)


def _f_sine(x, p):
    return np.sin(x)


def _c_sine(x, p):
    with np.errstate(divide="ignore"):
        return -1.0 / np.sin(x) ** 2


def _f_bs(x, p):
    K, s = _bs_scale(p)
    return np.maximum(K - np.exp(np.abs(x)) / s, 0.0)


def _c_bs(x, p):
    K, s = _bs_scale(p)
    e = np.exp(np.abs(x)) / s
    with np.errstate(divide="ignore", invalid="ignore"):
        return -K * e / (K - e) ** 2


def _f_exp32(x, p):
    return np.exp(np.clip(x, 0.0, None) ** 1.5)


def _c_exp32(x, p):
    with np.errstate(divide="ignore"):
        return 0.75 / np.sqrt(x)


def _f_beta(x, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return x ** (p["alpha"] - 1.0) * (1.0 - x) ** (p["beta"] - 1.0)


def _c_beta(x, p):
    # a unit exponent contributes nothing (not 0/0 at its endpoint)
    out = np.zeros_like(x)
    with np.errstate(divide="ignore"):
        if p["alpha"] != 1.0:
            out = out + (1.0 - p["alpha"]) / x**2
        if p["beta"] != 1.0:
            out = out + (1.0 - p["beta"]) / (1.0 - x) ** 2
    return out


def _f_uniform(x, p):
    return np.ones_like(x)


def _c_uniform(x, p):
    return np.zeros_like(x)


_EVAL: dict[str, tuple[Callable, Callable]] = {
    "normal": (_f_normal, _c_normal),
    "sine": (_f_sine, _c_sine),
    "black_scholes": (_f_bs, _c_bs),
    "exp_x32": (_f_exp32, _c_exp32),
    "beta": (_f_beta, _c_beta),
    "uniform": (_f_uniform, _c_uniform),
}

_DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "normal": {"mu": 0.5, "sigma": 1.0},
    "sine": {},
    "black_scholes": {"K": 45.0, "c": 3.0},
    "exp_x32": {},
    "beta": {"alpha": 2.0, "beta": 2.0},
    "uniform": {},
    "tabulated": {},
}


def _default_domain(family, params):
    if family == "sine":
        return (0.0, 1.5 * math.pi)
    if family == "black_scholes":
        K, s = _bs_scale(params)
        edge = math.log(K * s)
        return (-edge, edge)
    return (0.0, 1.0)


def _near(a, b):
    return abs(a - b) <= _LANDMARK_TOL * max(1.0, abs(a), abs(b))


def _default_landmarks(family, params, domain):
    """Zeros and curvature singularities a family has inside ``domain``."""
    lo, hi = domain
    zeros: list[float] = []
    singular: list[float] = []
    if family == "sine":
        first = math.ceil(lo / math.pi - _LANDMARK_TOL)
        last = math.floor(hi / math.pi + _LANDMARK_TOL)
        zeros = [min(max(j * math.pi, lo), hi) for j in range(first, last + 1)]
    elif family == "black_scholes":
        K, s = _bs_scale(params)
        edge = math.log(K * s)
        zeros = [x for x in (-edge, edge) if lo - _LANDMARK_TOL <= x <= hi + _LANDMARK_TOL]
        zeros = [min(max(x, lo), hi) for x in zeros]
    elif family == "exp_x32":
        if _near(lo, 0.0):
            singular = [lo]
    elif family == "beta":
        for point, exponent in ((0.0, params["alpha"]), (1.0, params["beta"])):
            if lo - _LANDMARK_TOL <= point <= hi + _LANDMARK_TOL and exponent != 1.0:
                (zeros if exponent > 1.0 else singular).append(min(max(point, lo), hi))
    elif family == "tabulated":
        samples = np.asarray(params["samples"], dtype=float)
        knots = np.linspace(lo, hi, samples.size)
        zeros = [float(knots[i]) for i in (0, samples.size - 1) if samples[i] == 0.0]
    return zeros, singular


@dataclass(frozen=True)
class FunctionSpec:
    """A real target function on a closed interval.

    ``zeros``/``singular_points`` left as ``None`` are filled from the
    family's known landscape; ``zero_kinds`` runs over zeros first, then
    singular points, and defaults to ``same_slope_sign`` everywhere.
    """

    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    domain: tuple[float, float] | None = None
    zeros: tuple[float, ...] | None = None
    singular_points: tuple[float, ...] | None = None
    zero_kinds: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        params = dict(_DEFAULT_PARAMS[self.family])
        params.update(self.params or {})
        for key, value in params.items():
            if key != "samples":
                params[key] = float(value)
        _validate_params(self.family, params)
        if self.family == "tabulated":
            params["samples"] = tuple(float(v) for v in params["samples"])
        object.__setattr__(self, "params", params)

        domain = self.domain if self.domain is not None else _default_domain(self.family, params)
        lo, hi = (float(domain[0]), float(domain[1]))
        if not lo < hi:
            raise DomainError(f"domain must satisfy x_min < x_max, got [{lo}, {hi}]")
        if self.family == "exp_x32" and lo < 0:
            raise DomainError("exp_x32 is defined for x >= 0 only")
        object.__setattr__(self, "domain", (lo, hi))

        zeros, singular = _default_landmarks(self.family, params, (lo, hi))
        zeros = tuple(float(z) for z in (self.zeros if self.zeros is not None else zeros))
        singular = tuple(
            float(s) for s in (self.singular_points if self.singular_points is not None else singular)
        )
        for point in zeros + singular:
            if not lo - _LANDMARK_TOL <= point <= hi + _LANDMARK_TOL:
                raise DomainError(f"landmark {point} lies outside [{lo}, {hi}]")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "singular_points", singular)

        kinds = self.zero_kinds
        if kinds is None:
            kinds = (SAME_SLOPE,) * (len(zeros) + len(singular))
        kinds = tuple(kinds)
        if len(kinds) != len(zeros) + len(singular):
            raise DomainError("zero_kinds needs one entry per zero and singular point")
        bad = [k for k in kinds if k not in ZERO_KINDS]
        if bad:
            raise DomainError(f"unknown zero kinds {bad}; expected {ZERO_KINDS}")
        object.__setattr__(self, "zero_kinds", kinds)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "tabulated":
            samples = np.asarray(self.params["samples"])
            knots = np.linspace(self.domain[0], self.domain[1], samples.size)
            return np.interp(x, knots, samples)
        return _EVAL[self.family][0](x, self.params)

    def log_curvature(self, x) -> np.ndarray:
        """Second derivative of ``log f`` in the original coordinate."""
        x = np.asarray(x, dtype=float)
        if self.family == "tabulated":
            return _numeric_log_curvature(self, x)
        return _EVAL[self.family][1](x, self.params)

    @property
    def analytic(self) -> bool:
        return self.family != "tabulated"

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "samples" in params:
            params["samples"] = list(params["samples"])
        return {
            "family": self.family,
            "params": params,
            "domain": list(self.domain),
            "zeros": list(self.zeros),
            "singular_points": list(self.singular_points),
            "zero_kinds": list(self.zero_kinds),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "FunctionSpec":
        def tup(key):
            value = doc.get(key)
            return None if value is None else tuple(value)

        return cls(
            family=doc["family"],
            params=dict(doc.get("params", {})),
            domain=tup("domain"),
            zeros=tup("zeros"),
            singular_points=tup("singular_points"),
            zero_kinds=tup("zero_kinds"),
        )

    @classmethod
    def from_json(cls, text: str) -> "FunctionSpec":
        return cls.from_dict(json.loads(text))


def _validate_params(family, params):
    if family == "normal" and not params["sigma"] > 0:
        raise DomainError("normal requires sigma > 0")
    if family == "beta" and not (params["alpha"] > 0 and params["beta"] > 0):
        raise DomainError("beta requires alpha > 0 and beta > 0")
    if family == "black_scholes" and not (params["K"] > 0 and params["c"] > 0):
        raise DomainError("black_scholes requires K > 0 and c > 0")
    if family == "tabulated":
        samples = params.get("samples")
        if samples is None or len(samples) < 2:
            raise DomainError("tabulated requires at least two samples")
        if not np.all(np.isfinite(np.asarray(samples, dtype=float))):
            raise DomainError("tabulated samples must be finite")


def _numeric_log_curvature(spec, x, h=None):
    lo, hi = spec.domain
    h = h if h is not None else (hi - lo) / ETA_GRID_POINTS
    xc = np.clip(x, lo + h, hi - h)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = [np.log(np.abs(spec(xc + d))) for d in (-h, 0.0, h)]
    return (logs[0] - 2.0 * logs[1] + logs[2]) / h**2


@dataclass(frozen=True)
class SpecialPoint:
    position: float  # standardized, in [0, 1]
    kind: str
    is_zero: bool


@dataclass(frozen=True)
class StandardizedFunction:
    """``spec`` viewed on ``[0, 1]`` with a fixed encoding."""

    spec: FunctionSpec
    encoding: str = "amplitude"

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise DomainError(f"encoding must be one of {ENCODINGS}")

    @property
    def length(self) -> float:
        return self.spec.length

    def to_original(self, u):
        return self.spec.domain[0] + np.asarray(u, dtype=float) * self.length

    def to_standard(self, x):
        return (np.asarray(x, dtype=float) - self.spec.domain[0]) / self.length

    def values(self, u) -> np.ndarray:
        return self.spec(self.to_original(u))

    def density(self, u) -> np.ndarray:
        f = self.values(u)
        if self.encoding == "amplitude":
            return f * f
        if np.any(f < -1e-14):
            raise DomainError("probability encoding needs a non-negative function")
        return np.clip(f, 0.0, None)

    def function_curvature(self, u) -> np.ndarray:
        """d^2/du^2 log f on the standardized axis."""
        return self.length**2 * self.spec.log_curvature(self.to_original(u))

    def density_curvature(self, u) -> np.ndarray:
        """d^2/du^2 log(density); twice the function curvature for amplitudes."""
        factor = 2.0 if self.encoding == "amplitude" else 1.0
        return factor * self.function_curvature(u)

    def special_points(self) -> list[SpecialPoint]:
        spec = self.spec
        pts = [(z, True) for z in spec.zeros] + [(s, False) for s in spec.singular_points]
        out = []
        for (x, is_zero), kind in zip(pts, spec.zero_kinds):
            u = float(np.clip(self.to_standard(x), 0.0, 1.0))
            out.append(SpecialPoint(u, kind, is_zero))
        return out


def standardize(spec, encoding: str = "amplitude") -> StandardizedFunction:
    if isinstance(spec, StandardizedFunction):
        return spec
    return StandardizedFunction(spec, encoding)


def grid(spec: FunctionSpec, n: int) -> np.ndarray:
    """The ``2**n`` sample points ``x_min + j * (x_max - x_min) / (2**n - 1)``."""
    lo, hi = spec.domain
    j = np.arange(2**n)
    return lo + j * ((hi - lo) / (2**n - 1))


def discretize(func, n: int) -> StateVector:
    """Normalized representative state of ``func`` on the ``2**n`` grid.

    Amplitude encoding returns ``f(grid) / ||f(grid)||``; probability
    encoding normalizes ``sqrt(f(grid))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    std = standardize(func)
    u = np.arange(2**n) / (2**n - 1)
    values = std.values(u)
    if not np.all(np.isfinite(values)):
        bad = std.to_original(u[~np.isfinite(values)][:3])
        raise DomainError(f"non-finite samples at x = {bad.tolist()}")
    if std.encoding == "probability":
        if np.any(values < -1e-14):
            raise DomainError("probability encoding needs a non-negative function")
        values = np.sqrt(np.clip(values, 0.0, None))
    norm = np.linalg.norm(values)
    if norm == 0.0:
        raise DegenerateFunction("all grid samples are zero")
    return StateVector(values / norm)


def eta_bound(func) -> float:
    """Supremum of |d^2 log(density)| over the standardized domain.

    Registry families use their closed-form log-curvature, evaluated on the
    endpoints and a dense grid (for every registry family the supremum sits
    at an endpoint or the curvature is constant).  Tabulated functions fall
    back to :func:`estimate_eta`, which is only an estimate.
    """
    std = standardize(func)
    spec = std.spec
    if spec.singular_points or spec.zeros:
        raise SingularityError(
            "log-curvature is unbounded at a zero or singular point; use plan_singular "
            "or the variational ansatz"
        )
    if not spec.analytic:
        return estimate_eta(std)
    u = np.linspace(0.0, 1.0, ETA_GRID_POINTS + 1)
    curv = np.abs(std.density_curvature(u))
    if not np.all(np.isfinite(curv)):
        raise SingularityError("log-curvature is not finite on the domain")
    return float(curv.max())


def estimate_eta(func, points: int = ETA_GRID_POINTS) -> float:
    """Max of central second differences of log(density) on a uniform grid."""
    std = standardize(func)
    u = np.linspace(0.0, 1.0, points + 1)
    h = u[1] - u[0]
    with np.errstate(divide="ignore"):
        log_density = np.log(std.density(u))
    second = (log_density[:-2] - 2.0 * log_density[1:-1] + log_density[2:]) / h**2
    if not np.all(np.isfinite(second)):
        raise SingularityError("log(density) is not finite on the grid")
    return float(np.abs(second).max())


def registry_spec(family: str, **params) -> FunctionSpec:
    """Shorthand: ``registry_spec("normal", sigma=0.3)``."""
    domain = params.pop("domain", None)
    return FunctionSpec(family, params, tuple(domain) if domain is not None else None)


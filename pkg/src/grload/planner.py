"""Circuit plans: exact Grover-Rudolph, clustered, and endpoint-singular.

A plan is the ordered list of angle blocks plus how each block is
clustered.  Blocks ``1..k0`` stay exact; later blocks replace (some of)
their angles by one representative, which turns ``2**(k-1)`` multi-controlled
rotations into a single-qubit rotation.

The number of exact blocks follows from the fidelity bound
``F >= exp(-eta**2 / 24 * (4**-k0 - 4**-n))``, solved for ``k0``:

    k0 = max(ceil(-1/2 * log2(4**-n - C / eta**2 * ln(1 - eps))), 2),  C = 24.

A coefficient of 96 (four times more conservative) can be selected for
comparison; it is not what the bound above yields.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .angles import AngleBlock, ClusterAnnotation, gr_blocks, midpoint_representative
from .errors import (
    BoundViolation,
    EtaTooLarge,
    SingularityError,
    UnsupportedSingularity,
)
from .functions import StandardizedFunction, eta_bound, standardize
from .quadrature import DEFAULT_RTOL

K0_COEFFICIENT = 24.0
PRINTED_K0_COEFFICIENT = 96.0
ETA_LIMIT = 8.0 * math.pi
PROVENANCES = ("exact_gr", "theorem1", "singular", "variational")
PLAN_FORMAT = "grload.plan/1"


@dataclass
class CircuitPlan:
    n: int
    encoding: str
    blocks: list[AngleBlock]
    k0: int
    provenance: str
    eta: float | None = None
    epsilon: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if [b.k for b in self.blocks] != list(range(1, self.n + 1)):
            raise ValueError("a plan needs exactly one block per k = 1..n, in order")

    def to_dict(self) -> dict:
        return {
            "format": PLAN_FORMAT,
            "n": self.n,
            "encoding": self.encoding,
            "provenance": self.provenance,
            "k0": self.k0,
            "eta": self.eta,
            "epsilon": self.epsilon,
            "meta": self.meta,
            "blocks": [b.to_dict() for b in self.blocks],
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, doc) -> "CircuitPlan":
        if doc.get("format") != PLAN_FORMAT:
            raise ValueError(f"not a {PLAN_FORMAT} document")
        return cls(
            n=int(doc["n"]),
            encoding=doc["encoding"],
            blocks=[AngleBlock.from_dict(b) for b in doc["blocks"]],
            k0=int(doc["k0"]),
            provenance=doc["provenance"],
            eta=doc.get("eta"),
            epsilon=doc.get("epsilon"),
            meta=dict(doc.get("meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "CircuitPlan":
        return cls.from_dict(json.loads(text))


def compute_k0(
    eta: float, epsilon: float, n: int, coefficient: float = K0_COEFFICIENT
) -> int:
    """Number of leading exact blocks for infidelity budget ``epsilon``.

    Returns ``n`` when the logarithm's argument is not positive, and never
    less than 2 (nor more than ``n``).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if n < 1:
        raise ValueError("n must be >= 1")
    if eta * eta == 0.0:
        return min(2, n)
    arg = 4.0**-n - coefficient / eta**2 * math.log1p(-epsilon)
    if arg <= 0:
        return n
    return min(max(math.ceil(-0.5 * math.log2(arg)), 2), n)


def k0_asymptotic(eta: float, epsilon: float, coefficient: float = K0_COEFFICIENT) -> int:
    """``compute_k0`` as ``n -> infinity``: independent of system size."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if eta * eta == 0.0:
        return 2
    arg = -coefficient / eta**2 * math.log1p(-epsilon)
    return max(math.ceil(-0.5 * math.log2(arg)), 2)


def fidelity_bound(eta: float, k0: int, n: int) -> float:
    """``exp(-eta**2 / 24 * (4**-k0 - 4**-n))``."""
    return math.exp(-(eta**2) / 24.0 * (4.0**-k0 - 4.0**-n))


def product_bound(plan: CircuitPlan) -> float:
    """``prod cos**2(spread_k / 2)`` over the clustered blocks of ``plan``."""
    out = 1.0
    for block in plan.blocks:
        if block.cluster is not None:
            out *= math.cos(block.cluster.spread / 2.0) ** 2
    return out


def _cluster(block: AngleBlock, retained=()) -> AngleBlock:
    retained = tuple(sorted(set(int(i) for i in retained)))
    mask = np.ones(block.angles.size, dtype=bool)
    mask[list(retained)] = False
    free = block.angles[mask]
    if free.size == 0:
        return AngleBlock(block.k, block.angles)
    rep = midpoint_representative(free)
    spread = float(np.max(np.abs(free - rep)))
    return AngleBlock(block.k, block.angles, ClusterAnnotation(rep, retained, spread))


def plan_exact(func, n: int, quad_tol: float = DEFAULT_RTOL) -> CircuitPlan:
    """Unclustered Grover-Rudolph plan: every block exact."""
    std = standardize(func)
    blocks = gr_blocks(std, n, quad_tol)
    return CircuitPlan(n, std.encoding, blocks, n, "exact_gr")


def plan_theorem1(
    func,
    n: int,
    epsilon: float,
    quad_tol: float = DEFAULT_RTOL,
    coefficient: float = K0_COEFFICIENT,
    blocks: list[AngleBlock] | None = None,
) -> CircuitPlan:
    """Exact blocks up to ``k0``, every later block fully clustered.

    ``blocks`` may pass precomputed exact blocks (e.g. when sweeping epsilon).
    """
    std = standardize(func)
    eta = eta_bound(std)
    if eta > ETA_LIMIT:
        raise EtaTooLarge(f"eta = {eta:.4g} exceeds 8*pi; raise k0 by hand or use plan_singular")
    k0 = compute_k0(eta, epsilon, n, coefficient)
    exact = blocks if blocks is not None else gr_blocks(std, n, quad_tol)
    out = [b if b.k <= k0 else _cluster(b) for b in exact]
    return CircuitPlan(
        n, std.encoding, out, k0, "theorem1", eta=eta, epsilon=epsilon,
        meta={"k0_coefficient": coefficient},
    )


@dataclass(frozen=True)
class SingularAnalysis:
    """Block-selection data for endpoint singularities."""

    k_max: int
    k_candidate: int
    eta_point: float
    k0: int
    k_star: int
    bounds: tuple[float, ...]  # |curvature at the edge| * 4**-(k-1), k = 1..n


def _edge_region(k, left, right):
    d = 2.0 ** -(k - 1)
    return (d if left else 0.0), (1.0 - d if right else 1.0)


def analyze_singular(
    std: StandardizedFunction, n: int, epsilon: float, k_star: int | None = None,
    coefficient: float = K0_COEFFICIENT, samples: int = 2049,
) -> SingularAnalysis:
    """Choose the last exact block for endpoint singularities.

    Curvature here is that of ``log f`` itself.  At block ``k`` the region
    considered excludes ``[0, 2**-(k-1))`` next to a singular left endpoint
    (mirrored on the right), so at ``k = 1`` it is the single far endpoint.
    """
    points = [float(std.to_standard(x)) for x in std.spec.singular_points]
    left = any(abs(p) < 1e-12 for p in points)
    right = any(abs(p - 1.0) < 1e-12 for p in points)
    interior = [p for p in points if 1e-12 <= p <= 1.0 - 1e-12]
    if interior:
        x = std.to_original(np.array(interior)).tolist()
        raise UnsupportedSingularity(f"interior singular points {x} are not supported")

    def edge_value(k):
        lo, hi = _edge_region(k, left, right)
        ends = [lo] if left else []
        ends += [hi] if right else []
        return float(np.max(np.abs(std.function_curvature(np.array(ends)))))

    k_max = None
    for k in range(1, n + 1):
        lo, hi = _edge_region(k, left, right)
        if hi < lo:
            continue
        u = np.linspace(lo, hi, samples)
        curv = np.abs(std.function_curvature(u))
        if not np.all(np.isfinite(curv)):
            continue
        if edge_value(k) >= curv.max() * (1.0 - 1e-12):
            k_max = k
            break
    if k_max is None:
        raise BoundViolation("curvature maximum never settles at the singular edge")

    bounds = []
    for k in range(1, n + 1):
        lo, hi = _edge_region(k, left, right)
        bounds.append(edge_value(k) * 4.0 ** -(k - 1) if hi >= lo else math.inf)
    tail = [b for b in bounds[k_max - 1 :] if math.isfinite(b)]
    if any(b2 >= b1 for b1, b2 in zip(tail, tail[1:])):
        raise BoundViolation(
            "curvature at the edge times 4**-(k-1) does not strictly decrease with k; "
            "angles next to the singularity cannot be bounded"
        )

    start = max(k_max, k_star or 1)
    k_candidate = None
    for k in range(start, n + 1):
        lo, hi = _edge_region(k, left, right)
        if hi >= lo and edge_value(k) * 2.0 ** -(k - 1) / 8.0 <= math.pi:
            k_candidate = k
            break
    if k_candidate is None:
        k_candidate = n
    eta_point = edge_value(k_candidate)
    k0 = compute_k0(eta_point, epsilon, n, coefficient)
    chosen = min(max(k0, k_candidate, k_star or 1, k_max), n)
    return SingularAnalysis(k_max, k_candidate, eta_point, k0, chosen, tuple(bounds))


def plan_singular(
    func,
    n: int,
    epsilon: float,
    k_star: int | None = None,
    quad_tol: float = DEFAULT_RTOL,
    coefficient: float = K0_COEFFICIENT,
) -> CircuitPlan:
    """Clustered plan for functions whose log-curvature diverges at an endpoint.

    Blocks after ``k*`` cluster every angle except the one whose interval
    touches a singular endpoint.  Without singular points this is exactly
    :func:`plan_theorem1`.
    """
    std = standardize(func)
    if not std.spec.singular_points:
        return plan_theorem1(std, n, epsilon, quad_tol, coefficient)
    if std.spec.zeros:
        raise SingularityError("zeros are handled by the variational ansatz, not plan_singular")
    info = analyze_singular(std, n, epsilon, k_star, coefficient)
    points = [float(std.to_standard(x)) for x in std.spec.singular_points]
    left = any(abs(p) < 1e-12 for p in points)
    right = any(abs(p - 1.0) < 1e-12 for p in points)
    exact = gr_blocks(std, n, quad_tol)
    out = []
    for block in exact:
        if block.k <= info.k_star:
            out.append(block)
            continue
        retained = ([0] if left else []) + ([block.angles.size - 1] if right else [])
        out.append(_cluster(block, retained))
    meta = {
        "k_max": info.k_max,
        "k_candidate": info.k_candidate,
        "k0_from_eta": info.k0,
        "k0_coefficient": coefficient,
    }
    return CircuitPlan(
        n, std.encoding, out, info.k_star, "singular",
        eta=info.eta_point, epsilon=epsilon, meta=meta,
    )

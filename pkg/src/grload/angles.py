"""Grover-Rudolph rotation angles.

Block ``k`` (``k = 1..n``) splits each of the ``2**(k-1)`` intervals of width
``delta_k = 2**-(k-1)`` in half.  Its angle ``l`` is

    theta_l = 2 * arccos(sqrt(I[l*d, (l+1/2)*d] / I[l*d, (l+1)*d]))

with ``I`` the integral of the density.  Angles live in ``[0, pi]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroMassInterval
from .functions import StandardizedFunction, standardize
from .quadrature import DEFAULT_RTOL, adaptive_simpson

ZERO_MASS_FLOOR = 1e-300


@dataclass(frozen=True)
class ClusterAnnotation:
    """How a block's angles are replaced by a shared representative.

    Indices in ``retained_indices`` keep their own angle; every other index
    uses ``representative``.  ``spread`` is the largest deviation between the
    representative and a replaced angle.
    """

    representative: float
    retained_indices: tuple[int, ...] = ()
    spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "representative": self.representative,
            "retained_indices": list(self.retained_indices),
            "spread": self.spread,
        }

    @classmethod
    def from_dict(cls, doc) -> "ClusterAnnotation":
        return cls(
            float(doc["representative"]),
            tuple(int(i) for i in doc["retained_indices"]),
            float(doc["spread"]),
        )


@dataclass
class AngleBlock:
    k: int
    angles: np.ndarray
    cluster: ClusterAnnotation | None = field(default=None)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.k < 1 or self.angles.shape != (2 ** (self.k - 1),):
            raise ValueError(f"block {self.k} needs {2 ** max(self.k - 1, 0)} angles")

    @property
    def delta(self) -> float:
        return 2.0 ** -(self.k - 1)

    def effective_angles(self) -> np.ndarray:
        """Angles actually applied, after substituting the representative."""
        if self.cluster is None:
            return self.angles
        out = np.full_like(self.angles, self.cluster.representative)
        keep = list(self.cluster.retained_indices)
        out[keep] = self.angles[keep]
        return out

    def clustered_indices(self) -> np.ndarray:
        if self.cluster is None:
            return np.array([], dtype=int)
        mask = np.ones(self.angles.size, dtype=bool)
        mask[list(self.cluster.retained_indices)] = False
        return np.flatnonzero(mask)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "angles": [float(a) for a in self.angles],
            "cluster": None if self.cluster is None else self.cluster.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc) -> "AngleBlock":
        cluster = doc.get("cluster")
        return cls(
            int(doc["k"]),
            np.asarray(doc["angles"], dtype=float),
            None if cluster is None else ClusterAnnotation.from_dict(cluster),
        )


def interval_masses(
    density: StandardizedFunction, level: int, quad_tol: float = DEFAULT_RTOL
) -> np.ndarray:
    """Integrals of the density over the ``2**level`` equal panels of [0, 1]."""
    std = standardize(density)
    edges = np.arange(2**level + 1) / 2**level
    return adaptive_simpson(std.density, edges[:-1], edges[1:], rtol=quad_tol)


def angles_from_masses(masses: np.ndarray) -> np.ndarray:
    """Angles of the block whose half-intervals carry ``masses``."""
    left = masses[0::2]
    total = left + masses[1::2]
    empty = total < ZERO_MASS_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.clip(np.where(empty, 0.5, left / total), 0.0, 1.0)
    if empty.any():
        warnings.warn(
            f"{int(empty.sum())} interval(s) without mass; angle set to pi/2",
            ZeroMassInterval,
            stacklevel=3,
        )
    return 2.0 * np.arccos(np.sqrt(ratio))


def block_angles(density, k: int, quad_tol: float = DEFAULT_RTOL) -> AngleBlock:
    """Exact angles of block ``k`` by adaptive quadrature of each half-interval."""
    if k < 1:
        raise ValueError("block index k must be >= 1")
    if quad_tol <= 0:
        raise ValueError("quad_tol must be positive")
    return AngleBlock(k, angles_from_masses(interval_masses(density, k, quad_tol)))


def gr_blocks(density, n: int, quad_tol: float = DEFAULT_RTOL) -> list[AngleBlock]:
    """All ``n`` exact blocks from one pass over the finest partition.

    Coarser masses are pairwise sums of finer ones, so the resulting state
    reproduces the finest masses exactly (up to rounding).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    masses = interval_masses(density, n, quad_tol)
    blocks = []
    for k in range(n, 0, -1):
        blocks.append(AngleBlock(k, angles_from_masses(masses)))
        masses = masses[0::2] + masses[1::2]
    return blocks[::-1]


def continuous_theta(density, y: float, delta: float, quad_tol: float = DEFAULT_RTOL) -> float:
    """Angle of the interval ``[y, y + delta]`` for any real ``y``."""
    if delta <= 0 or y < -1e-15 or y + delta > 1.0 + 1e-12:
        raise ValueError("need 0 <= y <= 1 - delta and delta > 0")
    std = standardize(density)
    edges = np.array([y, y + delta / 2.0, y + delta])
    masses = adaptive_simpson(std.density, edges[:-1], edges[1:], rtol=quad_tol)
    return float(angles_from_masses(masses)[0])


def midpoint_representative(values) -> float:
    """Midpoint of the extremes: the choice minimizing the worst deviation."""
    values = np.asarray(values, dtype=float)
    return 0.5 * (float(values.min()) + float(values.max()))


def lemma_pair_bound(std: StandardizedFunction, k: int, samples: int = 257) -> np.ndarray:
    """``delta_k**2 / 4 * max |d^2 log density|`` over each consecutive pair.

    The pair ``(l, l+1)`` depends on the density over ``[l*d, (l+2)*d]``, so
    the maximum is taken over that union (sampled, endpoints included).
    """
    d = 2.0 ** -(k - 1)
    count = 2 ** (k - 1) - 1
    if count <= 0:
        return np.zeros(0)
    t = np.linspace(0.0, 2.0, samples)
    starts = np.arange(count) * d
    u = np.clip(starts[:, None] + t[None, :] * d, 0.0, 1.0)
    curv = np.abs(std.density_curvature(u))
    return d * d / 4.0 * curv.max(axis=1)


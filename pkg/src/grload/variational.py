"""Landscape-tailored variational ansatz and its gradient-descent training.

Blocks ``1..k0`` keep one free parameter per angle.  A later block keeps
free parameters only on the intervals around zeros and singular points
(widened to ``p(k)`` neighbours per point) and shares one representative
parameter among all its other angles.  If the kept intervals already cover
the block, it stays fully parameterized.

The loss is ``L = 2**-n * sum_i (f_i - psi_i)**2``.  Its gradient is taken by
one forward sweep over the blocks and one adjoint sweep back, which is
algebraically the product-of-sines-and-cosines derivative but never divides
by ``sin`` or ``cos``, so angles at ``0`` or ``pi`` are harmless.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .angles import AngleBlock, ClusterAnnotation, gr_blocks, midpoint_representative
from .errors import DivergenceError, DomainError
from .functions import OPPOSITE_SLOPE, SpecialPoint, StandardizedFunction, standardize
from .planner import CircuitPlan
from .quadrature import DEFAULT_RTOL
from .simulator import StateVector

P_SCHEDULES = ("1", "2", "3", "k")
INIT_MODES = ("grover_rudolph", "random_uniform_0_pi")
DIVERGENCE_FACTOR = 1e3
_EDGE_TOL = 1e-9


def p_value(schedule: str, k: int) -> int:
    """Neighbours kept per special point in block ``k``."""
    schedule = str(schedule)
    if schedule == "k":
        return k
    if schedule in P_SCHEDULES:
        return int(schedule)
    raise ValueError(f"p schedule must be one of {P_SCHEDULES}, got {schedule!r}")


def min_k0(num_points: int) -> int:
    """Smallest admissible ``k0``: ``max{k : points + 1 >= 2**k}``."""
    return int(math.floor(math.log2(num_points + 1)))


def _widen(base: list[int], count: int, m: int) -> set[int]:
    """Grow ``base`` to ``count`` indices, alternating left and right neighbours."""
    kept = set(base)
    left, right = min(base) - 1, max(base) + 1
    turn_left = True
    while len(kept) < count and (left >= 0 or right < m):
        if turn_left and left >= 0:
            kept.add(left)
            left -= 1
        elif not turn_left and right < m:
            kept.add(right)
            right += 1
        turn_left = not turn_left
    return kept


def retained_for_block(points: list[SpecialPoint], k: int, p: int) -> set[int]:
    """Angle indices of block ``k`` kept free around every special point."""
    m = 2 ** (k - 1)
    kept: set[int] = set()
    for point in points:
        scaled = point.position * m
        j = min(int(math.floor(scaled)), m - 1)
        base = [j]
        if point.kind == OPPOSITE_SLOPE:
            near = j - 1 if scaled - j < 0.5 else j + 1
            if not 0 <= near < m:
                near = j + 1 if near < 0 else j - 1
            if 0 <= near < m:
                base.append(near)
        kept |= _widen(base, len(base) * p, m)
    return kept


@dataclass
class AnsatzSpec:
    """Parameter layout of the ansatz.

    ``retained[k-1]`` is ``None`` for a fully parameterized block, otherwise
    the sorted kept indices; such a block's parameters are its kept angles
    in ascending index order followed by the representative.
    """

    n: int
    k0: int
    p_schedule: str
    special_points: list[SpecialPoint]
    retained: list[tuple[int, ...] | None]
    func: StandardizedFunction | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.param_index = []
        offset = 0
        for k, kept in enumerate(self.retained, start=1):
            m = 2 ** (k - 1)
            if kept is None:
                idx = offset + np.arange(m)
                offset += m
            else:
                idx = np.full(m, offset + len(kept))
                idx[list(kept)] = offset + np.arange(len(kept))
                offset += len(kept) + 1
            self.param_index.append(idx)
        self.num_params = offset

    def angles(self, params) -> list[np.ndarray]:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got {params.shape}")
        return [params[idx] for idx in self.param_index]

    def fold(self, block_grads: list[np.ndarray]) -> np.ndarray:
        """Sum per-angle derivatives into per-parameter derivatives."""
        out = np.zeros(self.num_params)
        for idx, g in zip(self.param_index, block_grads):
            out += np.bincount(idx, weights=g, minlength=self.num_params)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k0": self.k0,
            "p_schedule": self.p_schedule,
            "num_params": self.num_params,
            "special_points": [asdict(p) for p in self.special_points],
            "retained": [None if r is None else list(r) for r in self.retained],
        }


def build_ansatz(
    func, n: int, k0: int, p_schedule="1", encoding: str = "amplitude"
) -> AnsatzSpec:
    std = standardize(func, encoding)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= k0 <= n:
        raise ValueError(f"k0 must lie in [1, n], got {k0}")
    p_value(p_schedule, 1)
    spec = std.spec
    for x in list(spec.zeros) + list(spec.singular_points):
        u = float(std.to_standard(x))
        if not -_EDGE_TOL <= u <= 1.0 + _EDGE_TOL:
            raise DomainError(f"special point {x} lies outside {spec.domain}")
    points = std.special_points()
    if k0 < min_k0(len(points)):
        raise ValueError(
            f"k0 = {k0} is too small for {len(points)} special points; need k0 >= {min_k0(len(points))}"
        )
    retained = []
    for k in range(1, n + 1):
        m = 2 ** (k - 1)
        if k <= k0:
            retained.append(None)
            continue
        kept = retained_for_block(points, k, p_value(p_schedule, k))
        retained.append(None if len(kept) >= m else tuple(sorted(kept)))
    return AnsatzSpec(n, k0, str(p_schedule), points, retained, std)


def init_params(
    ansatz: AnsatzSpec, func=None, mode: str = "grover_rudolph", seed: int = 0,
    quad_tol: float = DEFAULT_RTOL,
) -> np.ndarray:
    """Starting parameters: exact angles (with midpoint representatives) or random."""
    if mode == "random_uniform_0_pi":
        return np.random.default_rng(seed).uniform(0.0, math.pi, ansatz.num_params)
    if mode != "grover_rudolph":
        raise ValueError(f"init mode must be one of {INIT_MODES}")
    func = ansatz.func if func is None else standardize(func)
    if func is None:
        raise ValueError("grover_rudolph init needs the target function")
    out = []
    for block, kept in zip(gr_blocks(func, ansatz.n, quad_tol), ansatz.retained):
        if kept is None:
            out.extend(block.angles)
            continue
        mask = np.ones(block.angles.size, dtype=bool)
        mask[list(kept)] = False
        out.extend(block.angles[list(kept)])
        out.append(midpoint_representative(block.angles[mask]))
    return np.asarray(out, dtype=float)


def instantiate(params, ansatz: AnsatzSpec, encoding: str | None = None) -> CircuitPlan:
    """The circuit plan realised by ``params``."""
    if encoding is None:
        encoding = ansatz.func.encoding if ansatz.func is not None else "amplitude"
    params = np.asarray(params, dtype=float)
    blocks = []
    for k, (angles, kept) in enumerate(zip(ansatz.angles(params), ansatz.retained), start=1):
        if kept is None:
            blocks.append(AngleBlock(k, angles))
        else:
            rep = float(params[ansatz.param_index[k - 1].max()])
            blocks.append(AngleBlock(k, angles, ClusterAnnotation(rep, kept, 0.0)))
    return CircuitPlan(ansatz.n, encoding, blocks, ansatz.k0, "variational")


def _forward(angle_blocks):
    levels = [np.ones(1)]
    for theta in angle_blocks:
        prev = levels[-1]
        nxt = np.empty(2 * prev.size)
        nxt[0::2] = prev * np.cos(theta / 2.0)
        nxt[1::2] = prev * np.sin(theta / 2.0)
        levels.append(nxt)
    return levels


def _target_array(target, n) -> np.ndarray:
    t = target.amplitudes if isinstance(target, StateVector) else np.asarray(target, dtype=float)
    if t.shape != (2**n,):
        raise ValueError(f"target needs {2**n} amplitudes, got {t.shape}")
    return t


def state(params, ansatz: AnsatzSpec) -> StateVector:
    return StateVector(_forward(ansatz.angles(params))[-1])


def loss_and_gradient(params, target, ansatz: AnsatzSpec):
    """``(L, dL/dparams, psi)`` for the mean squared error loss."""
    n = ansatz.n
    f = _target_array(target, n)
    angle_blocks = ansatz.angles(params)
    levels = _forward(angle_blocks)
    psi = levels[-1]
    resid = psi - f
    value = float(np.dot(resid, resid)) / 2**n
    adj = 2.0 * resid / 2**n  # dL/dpsi
    grads = [None] * n
    for k in range(n, 0, -1):
        half = angle_blocks[k - 1] / 2.0
        c, s = np.cos(half), np.sin(half)
        a0, a1 = adj[0::2], adj[1::2]
        grads[k - 1] = levels[k - 1] * 0.5 * (c * a1 - s * a0)
        adj = c * a0 + s * a1
    return value, ansatz.fold(grads), psi


def loss(params, target, ansatz: AnsatzSpec) -> float:
    n = ansatz.n
    f = _target_array(target, n)
    resid = _forward(ansatz.angles(params))[-1] - f
    return float(np.dot(resid, resid)) / 2**n


def gradient(params, target, ansatz: AnsatzSpec) -> np.ndarray:
    return loss_and_gradient(params, target, ansatz)[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.5
    tolerance: float = 1e-9
    max_steps: int = 100_000
    init: str = "grover_rudolph"
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}")


@dataclass
class TrainReport:
    steps: int
    losses: list[float]
    fidelities: list[float]
    final_fidelity: float
    params: np.ndarray
    converged: bool
    monotonicity_violations: list[int]
    config: TrainConfig
    num_params: int

    @property
    def final_loss(self) -> float:
        return self.losses[-1]

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "converged": self.converged,
            "num_params": self.num_params,
            "final_fidelity": self.final_fidelity,
            "final_loss": self.final_loss,
            "config": asdict(self.config),
            "monotonicity_violations": self.monotonicity_violations,
            "trace": [
                {"step": i, "loss": l, "fidelity": fid}
                for i, (l, fid) in enumerate(zip(self.losses, self.fidelities))
            ],
            "params": [float(p) for p in self.params],
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def train(
    ansatz: AnsatzSpec, target, config: TrainConfig = TrainConfig(), params0=None
) -> TrainReport:
    """Full-batch gradient descent ``theta <- theta - gamma * dL/dtheta``.

    Stops once consecutive losses differ by less than ``config.tolerance`` or
    after ``config.max_steps`` updates.
    """
    f = _target_array(target, ansatz.n)
    if params0 is None:
        params0 = init_params(ansatz, mode=config.init, seed=config.seed)
    params = np.array(params0, dtype=float)
    value, grad, psi = loss_and_gradient(params, f, ansatz)
    losses = [value]
    fidelities = [float(np.dot(psi, f) ** 2)]
    violations = []
    converged = False
    steps = 0
    while steps < config.max_steps:
        params = params - config.learning_rate * grad
        steps += 1
        new, grad, psi = loss_and_gradient(params, f, ansatz)
        losses.append(new)
        fidelities.append(float(np.dot(psi, f) ** 2))
        if not math.isfinite(new) or (losses[0] > 0 and new > DIVERGENCE_FACTOR * losses[0]):
            raise DivergenceError(f"loss grew from {losses[0]:.3g} to {new:.3g}", losses)
        if new > value:
            violations.append(steps)
        if abs(new - value) < config.tolerance:
            converged = True
            break
        value = new
    return TrainReport(
        steps, losses, fidelities, fidelities[-1], params, converged, violations, config,
        ansatz.num_params,
    )

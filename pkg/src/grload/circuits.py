"""Gate lists, multi-controlled rotation decomposition, TQG counting and IR.

Qubits are 0-based in this module and in the IR; qubit 0 is the most
significant bit, i.e. the qubit rotated by block 1.

IR grammar, one gate per line::

    <kind> <operand> ... [theta]

Operands are qubit indices; for controlled kinds the last operand is the
target and a control written ``~q`` fires on ``|0>`` instead of ``|1>``.
``theta`` is present exactly for ``ry``, ``cry`` and ``mcry`` and is written
with ``repr`` so it parses back bit-exactly.  Lines starting with ``#`` carry
header fields as ``# <key> <value>``; ``qubits`` is mandatory.

Kinds: ``x``, ``ry`` (one qubit); ``cx``, ``cv``, ``cvdag``, ``cry`` (two
qubits, each one TQG); ``ccx``, ``mcx``, ``mcry`` (composite, expanded
before counting).  ``cv`` applies ``V = (1-i)/2 (I + iX)``, so ``V @ V = X``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ONE_QUBIT = ("x", "ry")
TWO_QUBIT = ("cx", "cv", "cvdag", "cry")
COMPOSITE = ("ccx", "mcx", "mcry")
KINDS = ONE_QUBIT + TWO_QUBIT + COMPOSITE
ROTATIONS = ("ry", "cry", "mcry")
IR_FORMAT = "grload-ir/1"

# k <= ENUMERATION_MAX_K is counted by expanding the decomposition
ENUMERATION_MAX_K = 6
FORMULA_EXACT = "exact_enumeration"
FORMULA_BARENCO = "barenco_80k_398"

_V = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class Gate:
    """One gate.  ``qubits`` is controls followed by the target."""

    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None
    open_controls: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "open_controls", frozenset(int(q) for q in self.open_controls))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = len(self.qubits)
        want = {"x": 1, "ry": 1, "cx": 2, "cv": 2, "cvdag": 2, "cry": 2, "ccx": 3}
        if self.kind in want and arity != want[self.kind]:
            raise ValueError(f"{self.kind} takes {want[self.kind]} qubits, got {arity}")
        if self.kind in ("mcx", "mcry") and arity < 2:
            raise ValueError(f"{self.kind} needs at least one control")
        if len(set(self.qubits)) != arity or min(self.qubits) < 0:
            raise ValueError(f"operands must be distinct non-negative indices: {self.qubits}")
        if (self.theta is None) == (self.kind in ROTATIONS):
            raise ValueError(f"{self.kind} {'needs' if self.theta is None else 'takes no'} angle")
        if not self.open_controls <= set(self.controls):
            raise ValueError("open controls must be controls of the gate")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def matrix(self) -> np.ndarray:
        """2x2 operator applied to the target when the controls fire."""
        if self.kind in ROTATIONS:
            c, s = math.cos(self.theta / 2.0), math.sin(self.theta / 2.0)
            return np.array([[c, -s], [s, c]])
        if self.kind == "cv":
            return _V
        if self.kind == "cvdag":
            return _V.conj().T
        return _X

    def to_ir(self) -> str:
        ops = [f"~{q}" if q in self.open_controls else str(q) for q in self.controls]
        ops.append(str(self.target))
        parts = [self.kind, *ops]
        if self.theta is not None:
            parts.append(repr(float(self.theta)))
        return " ".join(parts)


@dataclass
class GateList:
    n: int
    gates: list[Gate] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise ValueError(f"gate {g.to_ir()!r} exceeds {self.n} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def append(self, gate: Gate) -> None:
        if max(gate.qubits) >= self.n:
            raise ValueError(f"gate {gate.to_ir()!r} exceeds {self.n} qubits")
        self.gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def count_two_qubit(self) -> int:
        """TQG count after expanding composite gates."""
        return sum(g.kind in TWO_QUBIT for g in expand(self).gates)


# --- decomposition -----------------------------------------------------------


def _toffoli(c1: int, c2: int, t: int) -> list[Gate]:
    # V(c2->t) CX(c1->c2) Vdag(c2->t) CX(c1->c2) V(c1->t)
    return [
        Gate("cv", (c2, t)),
        Gate("cx", (c1, c2)),
        Gate("cvdag", (c2, t)),
        Gate("cx", (c1, c2)),
        Gate("cv", (c1, t)),
    ]


def _mcx_with_ancillas(controls, target, ancillas) -> list[Gate]:
    """``c >= 3`` controls, ``c - 2`` dirty ancillas: ``4(c-2)`` Toffolis."""
    x = list(controls)
    a = list(ancillas)
    c = len(x)
    half = [Gate("ccx", (x[c - 1], a[c - 3], target))]
    for i in range(c - 2, 1, -1):
        half.append(Gate("ccx", (x[i], a[i - 2], a[i - 1])))
    half.append(Gate("ccx", (x[0], x[1], a[0])))
    for i in range(2, c - 1):
        half.append(Gate("ccx", (x[i], a[i - 2], a[i - 1])))
    return half + half


def mcx_gates(controls, target, free=()) -> list[Gate]:
    """Multi-controlled X as ``cx``/``ccx`` gates, using ``free`` as dirty ancillas."""
    controls = list(controls)
    free = [q for q in free if q != target and q not in controls]
    c = len(controls)
    if c == 0:
        return [Gate("x", (target,))]
    if c == 1:
        return [Gate("cx", (controls[0], target))]
    if c == 2:
        return [Gate("ccx", (controls[0], controls[1], target))]
    if len(free) >= c - 2:
        return _mcx_with_ancillas(controls, target, free[: c - 2])
    if not free:
        raise ValueError(f"{c}-controlled X needs at least one free qubit")
    # split over one dirty ancilla a: B(C2 + a -> t) A(C1 -> a) B A
    a = free[0]
    c1 = 2 if c == 4 else max(3, math.ceil((c - 1) / 2))
    first, second = controls[:c1], controls[c1:]
    part_a = mcx_gates(first, a, second + [target])
    part_b = mcx_gates(second + [a], target, first)
    return part_b + part_a + part_b + part_a


def decompose_mcr(
    m: int, theta: float, controls=None, target: int | None = None, n: int | None = None
) -> GateList:
    """``R_y(theta)`` on ``target`` controlled by ``m`` qubits, down to TQGs.

    Defaults: controls ``0..m-1``, target ``m``, register of ``m + 1`` qubits.
    Uses two controlled ``R_y(+-theta/2)`` around two ``(m-1)``-controlled X
    gates; the control held back for the rotations serves as dirty ancilla.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    controls = list(range(m)) if controls is None else [int(q) for q in controls]
    target = m if target is None else int(target)
    if len(controls) != m:
        raise ValueError(f"expected {m} controls, got {len(controls)}")
    n = max(controls + [target]) + 1 if n is None else n
    out = GateList(n)
    if m == 1:
        out.append(Gate("cry", (controls[0], target), theta))
        return out
    last = controls[-1]
    rest = controls[:-1]
    others = [q for q in range(n) if q != target and q not in controls]
    mcx = mcx_gates(rest, target, [last] + others)
    out.append(Gate("cry", (last, target), theta / 2.0))
    out.extend(mcx)
    out.append(Gate("cry", (last, target), -theta / 2.0))
    out.extend(mcx)
    return expand(out)


def expand(gates: GateList) -> GateList:
    """Rewrite composite gates into one- and two-qubit gates."""
    out = GateList(gates.n, meta=dict(gates.meta))
    for g in gates.gates:
        if g.kind in ONE_QUBIT + TWO_QUBIT and not g.open_controls:
            out.append(g)
            continue
        flips = [Gate("x", (q,)) for q in sorted(g.open_controls)]
        plain = Gate(g.kind, g.qubits, g.theta)
        if plain.kind == "ccx":
            body = _toffoli(*plain.qubits)
        elif plain.kind == "mcx":
            body = expand(GateList(gates.n, mcx_gates(plain.controls, plain.target, range(gates.n)))).gates
        elif plain.kind == "mcry" and len(plain.controls) > 1:
            body = decompose_mcr(
                len(plain.controls), plain.theta, plain.controls, plain.target, gates.n
            ).gates
        elif plain.kind == "mcry":
            body = [Gate("cry", plain.qubits, plain.theta)]
        else:
            body = [plain]
        out.extend(flips + body + flips)
    return out


def mcr_tqg(m: int) -> tuple[int, str]:
    """TQG cost of an ``m``-controlled ``R_y`` and how it was obtained.

    For ``k = m + 1 <= 6`` the decomposition is expanded and counted; above
    that the closed form ``80k - 398`` applies.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    k = m + 1
    if k <= ENUMERATION_MAX_K:
        return decompose_mcr(m, 0.0).count_two_qubit(), FORMULA_EXACT
    return 80 * k - 398, FORMULA_BARENCO


# --- counting ---------------------------------------------------------------


@dataclass
class GateCountReport:
    tqg_total: int
    per_block: list[dict]
    formula_used: str
    provenance: str
    n: int
    k0: int

    def to_dict(self) -> dict:
        return {
            "tqg_total": self.tqg_total,
            "formula_used": self.formula_used,
            "provenance": self.provenance,
            "n": self.n,
            "k0": self.k0,
            "full_gr_tqg": 2**self.n - 1,
            "per_block": self.per_block,
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def count_tqg(plan) -> GateCountReport:
    """Two-qubit gates needed by ``plan``.

    An exact block costs ``2**(k-1)`` (one CNOT per angle of the uniformly
    controlled rotation).  A clustered block costs one multi-controlled
    rotation per retained angle; its representative is a single-qubit gate.
    """
    per_block = []
    total = 0
    labels = set()
    for block in plan.blocks:
        k = block.k
        if block.cluster is None:
            tqg, method = 2 ** (k - 1), "uniformly_controlled"
        elif not block.cluster.retained_indices:
            tqg, method = 0, "clustered"
        else:
            each, method = mcr_tqg(k - 1)
            tqg = each * len(block.cluster.retained_indices)
            labels.add(method)
        per_block.append({"k": k, "tqg": tqg, "method": method})
        total += tqg
    formula = FORMULA_BARENCO if FORMULA_BARENCO in labels else FORMULA_EXACT
    return GateCountReport(total, per_block, formula, plan.provenance, plan.n, plan.k0)


# --- plans to gates ---------------------------------------------------------


def _pattern_gate(k: int, l: int, theta: float) -> Gate:
    target = k - 1
    if k == 1:
        return Gate("ry", (target,), theta)
    controls = tuple(range(k - 1))
    zeros = {q for q in controls if not (l >> (k - 2 - q)) & 1}
    kind = "cry" if k == 2 else "mcry"
    return Gate(kind, controls + (target,), theta, frozenset(zeros))


def plan_to_gates(plan) -> GateList:
    """Multi-controlled-rotation listing of ``plan``.

    A clustered block becomes ``ry(rep)`` followed by ``theta_l - rep``
    corrections on its retained indices, which reproduces the block exactly.
    """
    out = GateList(plan.n)
    for block in plan.blocks:
        if block.cluster is None:
            for l, theta in enumerate(block.angles):
                out.append(_pattern_gate(block.k, l, float(theta)))
            continue
        rep = block.cluster.representative
        out.append(Gate("ry", (block.k - 1,), float(rep)))
        for l in block.cluster.retained_indices:
            out.append(_pattern_gate(block.k, l, float(block.angles[l] - rep)))
    out.meta = {
        "qubits": plan.n,
        "tqg": count_tqg(plan).tqg_total,
        "provenance": plan.provenance,
        "k0": plan.k0,
    }
    return out


# --- IR ---------------------------------------------------------------------


def emit_ir(source) -> str:
    """Text IR of a plan or :class:`GateList`."""
    gates = source if isinstance(source, GateList) else plan_to_gates(source)
    meta = dict(gates.meta)
    meta["qubits"] = gates.n
    meta.setdefault("tqg", gates.count_two_qubit())
    lines = [f"# format {IR_FORMAT}"]
    for key in sorted(meta):
        lines.append(f"# {key} {meta[key]}")
    lines.extend(g.to_ir() for g in gates.gates)
    return "\n".join(lines) + "\n"


def _meta_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_ir(text: str) -> GateList:
    meta = {}
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            if key != "format":
                meta[key] = _meta_value(value.strip())
            continue
        kind, *ops = line.split()
        theta = None
        if kind in ROTATIONS:
            if not ops:
                raise ValueError(f"line {lineno}: missing angle")
            theta = float(ops.pop())
        qubits, zeros = [], set()
        for op in ops:
            q = int(op.lstrip("~"))
            if op.startswith("~"):
                zeros.add(q)
            qubits.append(q)
        try:
            gates.append(Gate(kind, tuple(qubits), theta, frozenset(zeros)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if "qubits" not in meta:
        raise ValueError("IR lacks a '# qubits' header")
    n = int(meta.pop("qubits"))
    meta["qubits"] = n
    return GateList(n, gates, meta)


# --- dense evaluation (small registers) -------------------------------------


def apply_gate(tensor: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to a complex array whose first ``n`` axes are qubits."""
    out = tensor.copy()
    index = [slice(None)] * tensor.ndim
    for q in gate.controls:
        index[q] = 0 if q in gate.open_controls else 1
    index[gate.target] = slice(None)
    sub = out[tuple(index)]
    # after integer indexing the target axis position shifts left by the
    # number of control axes before it
    axis = gate.target - sum(q < gate.target for q in gate.controls)
    out[tuple(index)] = np.moveaxis(
        np.tensordot(gate.matrix(), np.moveaxis(sub, axis, 0), axes=1), 0, axis
    )
    return out


def simulate_gates(gates: GateList, state=None) -> np.ndarray:
    """Complex statevector after running ``gates`` (from ``|0...0>`` by default)."""
    n = gates.n
    if state is None:
        state = np.zeros(2**n, dtype=complex)
        state[0] = 1.0
    tensor = np.asarray(state, dtype=complex).reshape((2,) * n)
    for g in gates.gates:
        tensor = apply_gate(tensor, g, n)
    return tensor.reshape(-1)


def circuit_unitary(gates: GateList) -> np.ndarray:
    """Dense ``2**n x 2**n`` unitary of ``gates``; intended for ``n <= 10``."""
    n = gates.n
    tensor = np.eye(2**n, dtype=complex).reshape((2,) * n + (2**n,))
    for g in gates.gates:
        tensor = apply_gate(tensor, g, n)
    return tensor.reshape(2**n, 2**n)

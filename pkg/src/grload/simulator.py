"""Dense real statevector simulation of uniformly controlled R_y blocks.

Qubit 1 is the most significant bit of the basis index.  Block ``k`` rotates
qubit ``k`` conditioned on the pattern ``l`` of qubits ``1..k-1``, so its
angle ``l`` acts on the amplitude pairs whose leading ``k-1`` bits equal
``l`` and whose ``k``-th bit is 0 or 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

NORM_TOL = 1e-10


@dataclass
class StateVector:
    """``2**n`` real amplitudes."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        if amps.ndim != 1 or amps.size == 0 or amps.size & (amps.size - 1):
            raise DimensionError(f"need 2**n amplitudes, got shape {amps.shape}")
        self.amplitudes = amps

    @property
    def n(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(2**n)
        amps[0] = 1.0
        return cls(amps)

    def to_csv(self, path=None) -> str:
        """``index,bitstring,amplitude`` rows; writes to ``path`` when given."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "bitstring", "amplitude"])
        width = self.n
        for i, amp in enumerate(self.amplitudes):
            writer.writerow([i, format(i, f"0{width}b"), repr(float(amp))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "StateVector":
        rows = list(csv.DictReader(io.StringIO(text)))
        amps = np.empty(len(rows))
        for row in rows:
            amps[int(row["index"])] = float(row["amplitude"])
        return cls(amps)


def apply_rotations(state: StateVector, k: int, angles) -> StateVector:
    """Apply block ``k`` with the given ``2**(k-1)`` effective angles."""
    n = state.n
    if not 1 <= k <= n:
        raise IndexError(f"block {k} does not fit a {n}-qubit state")
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (2 ** (k - 1),):
        raise ValueError(f"block {k} needs {2 ** (k - 1)} angles, got {angles.shape}")
    amps = state.amplitudes.reshape(2 ** (k - 1), 2, 2 ** (n - k))
    c = np.cos(angles / 2.0)[:, None]
    s = np.sin(angles / 2.0)[:, None]
    a0 = amps[:, 0, :]
    a1 = amps[:, 1, :]
    out = np.empty_like(amps)
    out[:, 0, :] = c * a0 - s * a1
    out[:, 1, :] = s * a0 + c * a1
    return StateVector(out.reshape(-1))


def apply_ucr(state: StateVector, block) -> StateVector:
    """Apply an :class:`~grload.angles.AngleBlock`, honouring its clustering."""
    return apply_rotations(state, block.k, block.effective_angles())


def run_plan(plan) -> StateVector:
    """Run every block of ``plan`` in ascending ``k`` on ``|0...0>``."""
    state = StateVector.zero(plan.n)
    for block in sorted(plan.blocks, key=lambda b: b.k):
        state = apply_ucr(state, block)
    return state


def fidelity(a, b) -> float:
    """Squared overlap ``<a|b>**2`` of two real states."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a, dtype=float)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b, dtype=float)
    if va.shape != vb.shape:
        raise DimensionError(f"state sizes differ: {va.size} vs {vb.size}")
    return min(1.0, float(np.dot(va, vb) ** 2))

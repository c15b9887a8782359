"""Compile a circuit into a spectrum-preserving piecewise Hamiltonian schedule.

For gate ``U_i`` with generator ``K_i = -i log U_i`` the ``i``-th segment is
``H(s) = e^{isK_i} H^{(i-1)} e^{-isK_i}``; segments are laid end to end in a
single global parameter ``s in [0, 1]``.  The instantaneous eigenvalues can
be reshaped by an eigen-trajectory ``f(level, s)``; by default they stay at
the eigenvalues of ``H0`` and the gap never changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .circuit import Circuit, Gate
from .operators import (ValidationError, as_operator, eig_hermitian, hermitize, kron_lift,
                        principal_log, unitary_exp)
from .pauli import PauliSum, pauli_decompose, support

EigenTrajectory = Callable[[int, float], float]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Segment:
    gate: Optional[Gate]
    H_prev: np.ndarray
    K: np.ndarray
    frame: np.ndarray  # eigenvectors of H_prev, columns in ascending energy

    def U(self, s: float) -> np.ndarray:
        return unitary_exp(self.K, s)


@dataclass
class Schedule:
    n: int
    H0: PauliSum
    circuit: Circuit
    segments: list[Segment]
    energies: np.ndarray
    final: np.ndarray
    f: Optional[EigenTrajectory] = None
    _pauli_cache: dict = field(default_factory=dict, repr=False)

    @property
    def L(self) -> int:
        return len(self.segments)

    def locate(self, s: float) -> tuple[int, float]:
        """Segment index and local parameter for a global ``s``."""
        if not -1e-12 <= s <= 1 + 1e-12:
            raise ValidationError(f"s = {s} outside [0, 1]")
        s = min(max(s, 0.0), 1.0)
        x = s * self.L
        i = min(int(x), self.L - 1)
        return i, x - i

    def hamiltonian(self, s: float) -> np.ndarray:
        i, local = self.locate(s)
        seg = self.segments[i]
        Ut = seg.U(local)
        if self.f is None:
            return hermitize(Ut @ seg.H_prev @ Ut.conj().T)
        W = Ut @ seg.frame
        levels = np.array([self.f(j, s) for j in range(W.shape[1])])
        return hermitize((W * levels) @ W.conj().T)

    def ground_state(self, s: float) -> np.ndarray:
        """Ground state transported by the segment unitaries."""
        i, local = self.locate(s)
        seg = self.segments[i]
        return seg.U(local) @ seg.frame[:, 0]

    def hamiltonian_pauli(self, i: int) -> PauliSum:
        """Pauli view of ``H^{(i)}`` (``i = 0`` is ``H0``, ``i = L`` the final Hamiltonian)."""
        if i not in self._pauli_cache:
            m = self.final if i == self.L else self.segments[i].H_prev
            self._pauli_cache[i] = pauli_decompose(m, tol=1e-10)
        return self._pauli_cache[i]

    def to_json(self) -> dict:
        segs = []
        for i, seg in enumerate(self.segments):
            segs.append({
                "index": i + 1,
                "gate": seg.gate.to_text() if seg.gate else None,
                "H_prev": self.hamiltonian_pauli(i).to_json(),
                "K": pauli_decompose(seg.K, tol=1e-10).to_json(),
            })
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "circuit": self.circuit.to_text(),
            "H0": self.H0.to_json(),
            "spectrum": [float(e) for e in self.energies],
            "segments": segs,
            "final_hamiltonian": self.hamiltonian_pauli(self.L).to_json(),
            "locality_growth": locality_growth(self),
        }


def parallel_part(h: PauliSum, qubits) -> PauliSum:
    """Terms of ``h`` that share at least one qubit with ``qubits``."""
    qs = set(qubits)
    return PauliSum(h.n, {s: c for s, c in h.coeffs.items() if qs & set(support(s))})


def gate_generator(gate: Gate, n: int) -> np.ndarray:
    return kron_lift(principal_log(gate.matrix), gate.qubits, n)


def step_perturbation(H_prev, gate: Gate, s: float) -> np.ndarray:
    """``V(s) = U(s) H_par U(s)^dag - H_par`` over the terms overlapping the gate."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s = {s} outside [0, 1]")
    H = as_operator(H_prev, hermitian=True, herm_tol=1e-10)
    n = int(np.log2(H.shape[0]))
    par = parallel_part(pauli_decompose(H), gate.qubits).to_dense()
    Ut = unitary_exp(gate_generator(gate, n), s)
    return hermitize(Ut @ par @ Ut.conj().T - par)


def assemble_schedule(c: Circuit, H0: PauliSum, f: Optional[EigenTrajectory] = None,
                      *, min_gap: float = 1e-8) -> Schedule:
    if H0.n != c.n:
        raise ValidationError(f"H0 acts on {H0.n} qubits but the circuit has {c.n}")
    H = H0.to_dense()
    eig = eig_hermitian(H)
    if eig.gap <= min_gap:
        raise ValidationError(f"H0 has a degenerate ground state (gap {eig.gap:.3e})")
    frame = eig.eigenvectors
    segments = []
    gates = list(c.gates) or [None]
    for g in gates:
        K = gate_generator(g, c.n) if g is not None else np.zeros_like(H)
        segments.append(Segment(g, H, K, frame))
        U = unitary_exp(K, 1.0)
        H = hermitize(U @ H @ U.conj().T)
        frame = U @ frame
    return Schedule(c.n, H0, c, segments, eig.eigenvalues, H, f)


@dataclass(frozen=True)
class GapProfile:
    s: np.ndarray
    gap: np.ndarray

    @property
    def spread(self) -> float:
        return float(self.gap.max() - self.gap.min())


def gap_profile(sch: Schedule, samples_per_segment: int = 5) -> GapProfile:
    if samples_per_segment < 2:
        raise ValidationError("need at least two samples per segment")
    ss, gaps = [], []
    for i in range(sch.L):
        for local in np.linspace(0.0, 1.0, samples_per_segment):
            s = (i + local) / sch.L
            w = np.linalg.eigvalsh(sch.hamiltonian(s))
            ss.append(s)
            gaps.append(w[1] - w[0])
    return GapProfile(np.array(ss), np.array(gaps))


def locality_growth(sch: Schedule) -> list[int]:
    """Locality of ``H^{(0)}, H^{(1)}, ...`` after each gate."""
    if sch.segments[0].gate is None:
        return [sch.H0.locality()]
    return [sch.hamiltonian_pauli(i).locality(tol=1e-10) for i in range(sch.L + 1)]


def schedule_json(sch: Schedule) -> str:
    return json.dumps(sch.to_json(), indent=2, sort_keys=True)

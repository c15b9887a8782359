"""Geometric phases, phase-cancelled gate application and non-Abelian holonomies.

Geometric phases are computed from overlap products (discrete parallel
transport): ``gamma = -arg prod_k <n_k|n_{k+1}>``, with the end vectors
anchored to caller-supplied gauges so open paths have a definite value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .circuit import FIXED_GATES
from .evolution import propagate
from .pauli import PauliSum
from .operators import (ValidationError, as_operator, hermitize, kron_lift, polar_unitary,
                        principal_log, unitary_exp, unitary_fidelity)

MatrixPath = Callable[[float], np.ndarray]
Profile = Callable[[float], float]

CROSSING_TOL = 1e-10


def linear(s: float) -> float:
    return s


def cosine_ramp(s: float) -> float:
    """Monotone ramp with zero slope and curvature at both ends."""
    return s - math.sin(2 * math.pi * s) / (2 * math.pi)


def smoothstep7(s: float) -> float:
    """Degree-7 polynomial ramp with three vanishing derivatives at both ends."""
    return s**4 * (35 - 84 * s + 70 * s**2 - 20 * s**3)


PROFILES = {"linear": linear, "cosine": cosine_ramp, "smoothstep7": smoothstep7}


def _level_vectors(H: np.ndarray, level: int, where: float) -> np.ndarray:
    w, v = np.linalg.eigh(H)
    for nb in (level - 1, level + 1):
        if 0 <= nb < w.size and abs(w[nb] - w[level]) < CROSSING_TOL:
            raise ValidationError(f"level {level} crosses level {nb} at s = {where:.6g}")
    return v[:, level]


def _align(anchor: np.ndarray, v: np.ndarray, what: str) -> np.ndarray:
    ov = np.vdot(v, anchor)
    if abs(abs(ov) - 1) > 1e-6:
        raise ValidationError(f"{what} anchor is not the eigenvector of the tracked level (|overlap| = {abs(ov):.6f})")
    return anchor


def _raw_phase(H_of_s: MatrixPath, level: int, steps: int, start, end) -> float:
    ss = np.linspace(0.0, 1.0, steps + 1)
    prev = _align(start, _level_vectors(H_of_s(0.0), level, 0.0), "start")
    prod = 1.0 + 0j
    for k in range(1, steps + 1):
        cur = _level_vectors(H_of_s(ss[k]), level, ss[k])
        if k == steps:
            cur = _align(end, cur, "end")
        ov = np.vdot(prev, cur)
        prod *= ov / abs(ov)
        prev = cur
    return -float(np.angle(prod))


@dataclass(frozen=True)
class PhaseValue:
    gamma: float
    steps: int
    change: float  # difference between the last two refinements (after extrapolation)


def geometric_phase(path, level: int = 0, steps: int = 256, *, anchors=None,
                    tol: float = 1e-8, max_steps: int = 1 << 15) -> PhaseValue:
    """Open- or closed-path geometric phase of one non-degenerate level.

    ``path`` is a callable ``s -> H(s)`` on ``[0, 1]``.  ``anchors`` are
    the gauge-fixed eigenvectors at ``s = 0`` and ``s = 1``; by default the
    start vector is the numerical eigenvector at ``s = 0`` and the end
    vector is the same one when the path is closed.  The step count doubles
    until Richardson-extrapolated values change by less than ``tol``.
    """
    if anchors is None:
        v0 = _level_vectors(path(0.0), level, 0.0)
        if np.max(np.abs(path(1.0) - path(0.0))) > 1e-12:
            raise ValidationError("open path needs explicit anchors")
        anchors = (v0, v0)
    start, end = (np.asarray(a, dtype=complex) for a in anchors)
    prev_raw = _raw_phase(path, level, steps, start, end)
    prev_ext = None
    n = steps
    while True:
        n *= 2
        raw = _raw_phase(path, level, n, start, end)
        # second-order convergence in the step count
        d = (raw - prev_raw + math.pi) % (2 * math.pi) - math.pi
        ext = raw + d / 3
        if prev_ext is not None:
            change = abs((ext - prev_ext + math.pi) % (2 * math.pi) - math.pi)
            if change < tol or n >= max_steps:
                return PhaseValue(_wrap(ext), n, change)
        prev_raw, prev_ext = raw, ext


def _wrap(x: float) -> float:
    """Map to ``(-pi, pi]``."""
    y = (x + math.pi) % (2 * math.pi) - math.pi
    return math.pi if y == -math.pi else y


def spin_cone_path(theta: float, field: float = 1.0) -> MatrixPath:
    """``-field * n(s).sigma`` with ``n`` circling a cone of half-angle ``theta`` once."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)

    def H(s):
        ph = 2 * math.pi * s
        return -field * (math.sin(theta) * (math.cos(ph) * sx + math.sin(ph) * sy)
                         + math.cos(theta) * sz)
    return H


def conjugation_path(H0: np.ndarray, K: np.ndarray, profile: Profile = linear) -> MatrixPath:
    """``s -> 1/2 (I + U(s) H0 U(s)^dag)`` with ``U(s) = exp(i f(s) K)``."""
    I = np.eye(H0.shape[0])

    def H(s):
        U = unitary_exp(K, profile(s))
        return hermitize(0.5 * (I + U @ H0 @ U.conj().T))
    return H


@dataclass(frozen=True)
class PhaseCancellationPlan:
    H0: np.ndarray
    gate: np.ndarray
    K: np.ndarray
    T: float
    profile: Profile
    energies: np.ndarray
    basis: np.ndarray  # eigenvectors of H0, columns ascending
    gammas: np.ndarray
    G: np.ndarray
    step4: np.ndarray

    def step2(self, t: float) -> np.ndarray:
        """Step-2 Hamiltonian at physical time ``t in [0, T]``."""
        U = unitary_exp(self.K, self.profile(min(max(t / self.T, 0.0), 1.0)))
        return hermitize(0.5 * (np.eye(self.H0.shape[0]) + U @ self.H0 @ U.conj().T))

    def to_json(self) -> dict:
        return {"T": self.T, "energies": self.energies.tolist(), "gammas": self.gammas.tolist()}


def phase_cancellation_plan(H0, gate, T: float, *, profile: Profile = cosine_ramp) -> PhaseCancellationPlan:
    """Build steps 2-4 of the phase-cancelled gate protocol.

    Step 2 sweeps ``1/2 (I + U(t) H0 U(t)^dag)`` with ``U(t) = exp(i f(t/T) K)``,
    ``K = -i log U``.  ``G`` holds the open-path geometric phase of each
    ``H0`` eigenvector, gauge-anchored at ``|n>`` and ``U|n>``.  The step-4
    Hamiltonian ``U (1/2 (I - H0) + G/T) U^dag`` then undoes both the
    dynamical and the geometric phases in the rotated frame.
    """
    if isinstance(H0, PauliSum):
        if H0.locality() > 1:
            raise ValidationError("H0 must be 1-local")
        H0 = H0.to_dense()
    H0 = as_operator(H0, hermitian=True)
    gate = as_operator(gate, unitary=True)
    if H0.shape != gate.shape:
        raise ValidationError("H0 and the gate act on different dimensions")
    if T <= 0:
        raise ValidationError("T must be positive")
    if np.linalg.norm(H0, 2) > 1 + 1e-12:
        raise ValidationError("H0 must have operator norm at most 1")
    w, v = np.linalg.eigh(H0)
    if np.min(np.diff(w)) < 1e-9:
        raise ValidationError("H0 is degenerate")
    K = principal_log(gate)
    path = conjugation_path(H0, K, profile)
    gammas = np.array([geometric_phase(path, j, anchors=(v[:, j], gate @ v[:, j])).gamma
                       for j in range(w.size)])
    G = (v * gammas) @ v.conj().T
    step4 = hermitize(gate @ (0.5 * (np.eye(w.size) - H0) + G / T) @ gate.conj().T)
    return PhaseCancellationPlan(H0, gate, K, T, profile, w, v, gammas, G, step4)


@dataclass(frozen=True)
class PhaseReport:
    """Adiabatic step-2 phases per ``H0`` eigenstate, anchored to the ``t = 0`` eigenbasis."""
    dynamical: np.ndarray  # -T * E_n
    geometric: np.ndarray
    step4: np.ndarray  # phase picked up by U|n> under the step-4 Hamiltonian

    @property
    def total(self) -> np.ndarray:
        return np.array([_wrap(x) for x in self.dynamical + self.geometric])

    @property
    def composed(self) -> np.ndarray:
        return np.array([_wrap(x) for x in self.dynamical + self.geometric + self.step4])

    def to_json(self) -> dict:
        return {"dynamical": self.dynamical.tolist(), "geometric": self.geometric.tolist(),
                "total": self.total.tolist(), "composed": self.composed.tolist()}


def phase_report(plan: PhaseCancellationPlan) -> PhaseReport:
    E = 0.5 * (1 + plan.energies)
    # U|n> is an eigenvector of step4 with eigenvalue (1 - E0_n)/2 + gamma_n / T
    out = plan.gate @ plan.basis
    e4 = np.real(np.einsum("in,ij,jn->n", out.conj(), plan.step4, out))
    return PhaseReport(-plan.T * E, plan.gammas.copy(), -plan.T * e4)


def run_phase_cancellation(plan: PhaseCancellationPlan, psi, *, dt: float = 0.01) -> np.ndarray:
    """Time-ordered evolution through step 2, then the constant step-4 Hamiltonian."""
    steps = max(100, int(math.ceil(plan.T / dt)))
    out = propagate(plan.step2, plan.T, steps, np.asarray(psi, dtype=complex))
    w, v = np.linalg.eigh(plan.step4)
    return (v * np.exp(-1j * plan.T * w)) @ v.conj().T @ out


def protocol_unitary(plan: PhaseCancellationPlan, *, dt: float = 0.01) -> np.ndarray:
    return run_phase_cancellation(plan, np.eye(plan.H0.shape[0], dtype=complex), dt=dt)


# holonomic CNOT ----------------------------------------------------------------

def cnot_generator() -> np.ndarray:
    """The 8x8 anti-Hermitian ``X = [[A, B], [-B^dag, 0]]`` for the holonomic CNOT."""
    A = 1j * math.pi * np.array([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]])
    B = 1j * math.pi / math.sqrt(2) * np.array([[0, 0, 0, 0], [0, 0, 0, 0],
                                                [0, 0, 0, -1], [0, 0, 0, 1]])
    X = np.block([[A, B], [-B.conj().T, np.zeros((4, 4))]]).astype(complex)
    if np.max(np.abs(X + X.conj().T)) > 1e-14:
        raise ValidationError("generator is not anti-Hermitian")
    return X


V0 = np.vstack([np.eye(4), np.zeros((4, 4))]).astype(complex)
V1 = np.vstack([np.zeros((4, 4)), np.eye(4)]).astype(complex)

# the 4x4 block index has the control as its high bit: qubit 2 controls qubit 1
CNOT_TARGET = kron_lift(FIXED_GATES["CNOT"], (2, 1), 2)


def holonomic_hamiltonian(X: np.ndarray, E0: float = 0.0, E1: float = 1.0) -> MatrixPath:
    P0, P1 = V0 @ V0.conj().T, V1 @ V1.conj().T

    def H(t):
        R = expm(t * X)
        return hermitize(R @ (E1 * P1 + E0 * P0) @ R.conj().T)
    return H


@dataclass(frozen=True)
class HolonomicGate:
    T: float
    steps: int
    W: np.ndarray  # effective 4x4 map on the computational block
    fidelity: float
    leakage: float  # 1 - smallest singular value squared of W

    def to_json(self) -> dict:
        return {"T": self.T, "steps": self.steps, "fidelity": self.fidelity,
                "leakage": self.leakage, "W": _complex_json(self.W)}


def _complex_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def holonomic_cnot(T: float, steps: Optional[int] = None, *, E0: float = 0.0, E1: float = 1.0,
                   profile: Profile = linear) -> HolonomicGate:
    """Adiabatically drive the printed CNOT path over physical time ``T``.

    The ancilla (the high bit of the 8-dim space) starts in its ``E0``
    level; the 4x4 block of the propagator on that level is the gate.
    ``E0 = 0`` so the ground band picks up no dynamical phase.
    """
    if not E0 < E1:
        raise ValidationError("need E0 < E1")
    X = cnot_generator()
    H = holonomic_hamiltonian(X, E0, E1)
    steps = steps or max(500, int(math.ceil(T / 0.1)))
    U = propagate(lambda tau: H(profile(tau / T)), T, steps, np.eye(8, dtype=complex))
    W = V0.conj().T @ U @ V0 * np.exp(1j * E0 * T)
    sv = np.linalg.svd(W, compute_uv=False)
    return HolonomicGate(T, steps, W, unitary_fidelity(W, CNOT_TARGET), float(1 - sv.min() ** 2))


@dataclass
class HolonomyFrame:
    frames: list[np.ndarray]
    connection: list[np.ndarray]  # polar factors of successive frame overlaps
    W: np.ndarray

    def __post_init__(self):
        for F in self.frames:
            if np.max(np.abs(F.conj().T @ F - np.eye(F.shape[1]))) > 1e-10:
                raise ValidationError("frame is not orthonormal")
        d = self.W.shape[0]
        if np.max(np.abs(self.W.conj().T @ self.W - np.eye(d))) > 1e-9:
            raise ValidationError("holonomy is not unitary")


def ground_frames(H_of_s: MatrixPath, dim: int, steps: int) -> list[np.ndarray]:
    """Orthonormal bases of the lowest ``dim`` levels along the path."""
    out = []
    for s in np.linspace(0.0, 1.0, steps + 1):
        w, v = np.linalg.eigh(H_of_s(s))
        if dim < w.size and w[dim] - w[dim - 1] < CROSSING_TOL:
            raise ValidationError(f"subspace dimension changes at s = {s:.6g}")
        out.append(v[:, :dim])
    return out


def wilczek_zee_holonomy(frames: Sequence[np.ndarray], *, reference: Optional[np.ndarray] = None,
                         keep_frames: bool = False) -> HolonomyFrame:
    """Path-ordered product of re-unitarized frame overlaps.

    Returns ``W = R^dag F_N M_{N-1} ... M_0`` with ``M_k = polar(F_{k+1}^dag F_k)``
    and ``R`` the reference frame (default ``F_0``), i.e. the map from the
    initial subspace to itself after parallel transport around the loop.
    """
    if len(frames) < 2:
        raise ValidationError("need at least two frames")
    dim = frames[0].shape[1]
    if any(F.shape[1] != dim for F in frames):
        raise ValidationError("subspace dimension changes along the path")
    acc = np.eye(dim, dtype=complex)
    conn = []
    for a, b in zip(frames[:-1], frames[1:]):
        M = polar_unitary(b.conj().T @ a)
        conn.append(M)
        acc = M @ acc
    R = frames[0] if reference is None else reference
    W = polar_unitary(R.conj().T @ frames[-1] @ acc)
    kept = list(frames) if keep_frames else [frames[0], frames[-1]]
    return HolonomyFrame(kept, conn if keep_frames else [], W)


def cnot_holonomy(steps: int = 2000) -> HolonomyFrame:
    """Wilczek-Zee holonomy of the ground band along the printed CNOT path."""
    H = holonomic_hamiltonian(cnot_generator())
    return wilczek_zee_holonomy(ground_frames(H, 4, steps), reference=V0)

"""Time-dependent Schrodinger integration and adiabatic error estimates."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .direct_map import Schedule
from .operators import ValidationError, as_state, evolution_operator, hermitize

HamiltonianFn = Callable[[float], np.ndarray]


def propagate(H_of_t: HamiltonianFn, T: float, steps: int, psi0: np.ndarray,
              *, observe: Optional[Callable[[float, np.ndarray], None]] = None,
              observe_every: int = 0) -> np.ndarray:
    """Integrate ``i d/dt psi = H(t) psi`` on ``[0, T]`` with midpoint exponentials.

    ``psi0`` may be a vector or a matrix of column states (giving the
    propagator when it is the identity).
    """
    if T <= 0:
        raise ValidationError("total time must be positive")
    if steps < 1:
        raise ValidationError("need at least one step")
    dt = T / steps
    psi = np.array(psi0, dtype=complex)
    if observe is not None:
        observe(0.0, psi)
    for k in range(steps):
        psi = evolution_operator(hermitize(H_of_t((k + 0.5) * dt)), dt) @ psi
        if observe is not None and observe_every and ((k + 1) % observe_every == 0 or k + 1 == steps):
            observe((k + 1) * dt, psi)
    return psi


@dataclass(frozen=True)
class EvolutionResult:
    final_state: np.ndarray
    trace: list[tuple[float, float, float, float]]  # (t, s, gap, fidelity)
    total_time: float
    steps: int
    doubling_change: Optional[float] = None

    @property
    def fidelity_trace(self) -> list[tuple[float, float]]:
        return [(t, fid) for t, _, _, fid in self.trace]

    @property
    def final_fidelity(self) -> float:
        return self.trace[-1][3]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "s", "gap", "fidelity"])
        for row in self.trace:
            w.writerow([f"{x:.12g}" for x in row])
        return buf.getvalue()


def _ground_overlap(H: np.ndarray, psi: np.ndarray, tol: float = 1e-9) -> tuple[float, float]:
    w, v = np.linalg.eigh(H)
    g = v[:, w - w[0] <= tol]
    fid = float(np.sum(np.abs(g.conj().T @ psi) ** 2))
    gap_idx = np.nonzero(w - w[0] > tol)[0]
    gap = float(w[gap_idx[0]] - w[0]) if gap_idx.size else 0.0
    return gap, min(fid, 1.0)


def evolve(sch: Schedule, psi0, T: float, steps: int, *, records: int = 100,
           check_doubling: bool = False, doubling_tol: float = 1e-6) -> EvolutionResult:
    """Evolve under ``H(t/T)`` and record ground-state fidelity along the way."""
    psi = as_state(psi0, tol=1e-9)
    if steps < 100:
        raise ValidationError("steps must be at least 100")
    if T <= 0:
        raise ValidationError("total time must be positive")
    H_of_t = lambda t: sch.hamiltonian(min(t / T, 1.0))
    trace = []

    def observe(t, v):
        s = min(t / T, 1.0)
        gap, fid = _ground_overlap(sch.hamiltonian(s), v)
        trace.append((t, s, gap, fid))

    every = max(1, steps // max(records, 1))
    final = propagate(H_of_t, T, steps, psi, observe=observe, observe_every=every)
    change = None
    if check_doubling:
        fine = propagate(H_of_t, T, 2 * steps, psi)
        change = float(np.linalg.norm(fine - final))
        if change > doubling_tol:
            raise ValidationError(
                f"step doubling changed the final state by {change:.3e} > {doubling_tol:.1e}; "
                "increase steps")
    return EvolutionResult(final, trace, T, steps, change)


@dataclass(frozen=True)
class ErrorEstimate:
    segment: int
    total_time: float
    per_level_amplitudes: list[tuple[float, float]]  # (E_m - E_0, |<m|K|0>|)
    alpha_bound: float
    transition_bound: float

    @property
    def max_amplitude(self) -> float:
        return max((a for _, a in self.per_level_amplitudes), default=0.0)


def _levels(w: np.ndarray, tol: float) -> list[np.ndarray]:
    groups, start = [], 0
    for j in range(1, len(w) + 1):
        if j == len(w) or w[j] - w[start] > tol:
            groups.append(np.arange(start, j))
            start = j
    return groups


def adiabatic_error(sch: Schedule, segment: int, T: float = 1.0,
                    *, degeneracy_tol: float = 1e-9) -> ErrorEstimate:
    """Leading non-adiabatic amplitudes of one segment in its ``s = 0`` eigenframe.

    ``segment`` is 1-based.  ``alpha_bound`` is ``max|eig K| / T`` and the
    transition bound is ``(alpha_bound / (E_1 - E_0))^2``.
    """
    if not 1 <= segment <= sch.L:
        raise ValidationError(f"segment {segment} does not exist (1..{sch.L})")
    seg = sch.segments[segment - 1]
    w, v = np.linalg.eigh(seg.H_prev)
    groups = _levels(w, degeneracy_tol)
    if len(groups[0]) != 1:
        raise ValidationError("ground state at s = 0 is degenerate")
    k0 = seg.K @ v[:, 0]
    amps = []
    for g in groups[1:]:
        amps.append((float(w[g[0]] - w[0]), float(np.linalg.norm(v[:, g].conj().T @ k0))))
    kmax = float(np.max(np.abs(np.linalg.eigvalsh(seg.K)))) if seg.K.size else 0.0
    alpha = kmax / T
    gap = amps[0][0] if amps else math.inf
    return ErrorEstimate(segment, T, amps, alpha, (alpha / gap) ** 2)


def nonadiabatic_coupling_fd(sch: Schedule, segment: int, s: float, h: float = 1e-5,
                             *, degeneracy_tol: float = 1e-9) -> list[float]:
    """``||P_m d/ds |0,s>||`` per excited level from finite differences of eigenvectors.

    Independent of the generator: only numerically diagonalized ``H(s)`` is used.
    """
    seg = sch.segments[segment - 1]

    def H(x):
        U = seg.U(x)
        return U @ seg.H_prev @ U.conj().T

    w, v = np.linalg.eigh(H(s))
    g0 = v[:, 0]

    def aligned(x):
        u = np.linalg.eigh(H(x))[1][:, 0]
        ph = np.vdot(g0, u)
        return u * (abs(ph) / ph)

    d = (aligned(s + h) - aligned(s - h)) / (2 * h)
    return [float(np.linalg.norm(v[:, g].conj().T @ d)) for g in _levels(w, degeneracy_tol)[1:]]


def runtime_bound(L: int, eps: float) -> tuple[float, float, float]:
    """Order-of-magnitude figures for per-step error, required gap and running time."""
    if L < 1:
        raise ValidationError("L must be at least 1")
    if not 0 < eps <= 1:
        raise ValidationError("eps must lie in (0, 1]")
    per_step = eps / L**2
    return per_step, per_step**3, 1.0 / per_step**6


def final_infidelity(sch: Schedule, psi0, T: float, dt: float = 0.1) -> float:
    steps = max(100, int(math.ceil(T / dt)))
    psi = propagate(lambda t: sch.hamiltonian(min(t / T, 1.0)), T, steps, as_state(psi0, tol=1e-9))
    return 1.0 - _ground_overlap(sch.final, psi)[1]


def averaged_infidelity(sch: Schedule, psi0, T: float, *, samples: int = 12,
                        dt: float = 0.1) -> float:
    """Final infidelity averaged over one oscillation period ``2 pi / gap`` past ``T``."""
    gap = sch.energies[1] - sch.energies[0]
    period = 2 * math.pi / gap
    Ts = T + period * np.arange(samples) / samples
    return float(np.mean([final_infidelity(sch, psi0, t, dt) for t in Ts]))

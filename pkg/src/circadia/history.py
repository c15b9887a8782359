"""History-state Hamiltonians with a unary clock, and the forward/reverse adiabatic cycle.

Register layout: computational qubits occupy the low bits (qubits 1..n),
clock qubits the high bits (qubits n+1..n+L), so a product state is
``np.kron(clock, comp)``.  Clock stage ``l`` is the unary string with clock
qubits 1..l set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circuit import Circuit, Gate, apply_circuit
from .evolution import propagate
from .operators import (ValidationError, apply_gate, as_operator, as_state, basis_state,
                        hermitize, kron_lift, state_fidelity)

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
MAX_QUBITS = 6


def _gate_matrix(U) -> np.ndarray:
    if isinstance(U, Gate):
        U = U.matrix
    return as_operator(U, unitary=True)


def single_gate_hamiltonians(U) -> tuple[np.ndarray, np.ndarray]:
    """``(H_ini, H_out)`` for one gate and one clock qubit."""
    U = _gate_matrix(U)
    I = np.eye(U.shape[0])
    H_ini = np.kron(P1, I)
    H_out = 0.5 * (np.kron(P0, I) + np.kron(P1, I) - np.kron(RAISE, U) - np.kron(RAISE.T, U.conj().T))
    return H_ini, hermitize(H_out)


@dataclass(frozen=True)
class PQRPoint:
    P: float
    Q: float
    R: float

    def __post_init__(self):
        if min(self.P, self.Q, self.R) < 0:
            raise ValidationError(f"P, Q, R must be non-negative, got {self}")

    @property
    def residual(self) -> float:
        return abs(self.P * self.Q - self.R ** 2)


def pqr_hamiltonian(U, p: PQRPoint) -> np.ndarray:
    U = _gate_matrix(U)
    I = np.eye(U.shape[0])
    H = 0.5 * (p.P * np.kron(P0, I) + p.Q * np.kron(P1, I)
               - p.R * np.kron(RAISE, U) - p.R * np.kron(RAISE.T, U.conj().T))
    return hermitize(H)


def pqr_zero_state(U, p: PQRPoint, psi) -> np.ndarray:
    """``(R psi|0> + P U psi|1>)`` normalized: zero energy whenever ``PQ = R^2``."""
    U = _gate_matrix(U)
    psi = as_state(psi, tol=1e-9)
    v = p.R * np.kron([1, 0], psi) + p.P * np.kron([0, 1], U @ psi)
    return v / np.linalg.norm(v)


def straight_sweep(points: int = 2001, *, spacing: str = "angle") -> list[PQRPoint]:
    """``P = 1 + t, Q = 1 - t, R = sqrt(1 - t^2)`` for ``t`` in ``[0, 1]``.

    ``spacing="angle"`` places ``t = sin(pi u / 2)`` on a uniform ``u`` grid,
    which turns the ground-state rotation angle ``pi/4 + asin(t)/2`` linear
    in ``u``; ``"uniform"`` spaces ``t`` itself evenly.
    """
    u = np.linspace(0.0, 1.0, points)
    if spacing == "angle":
        ts = np.sin(0.5 * math.pi * u)
        ts[-1] = 1.0
    elif spacing == "uniform":
        ts = u
    else:
        raise ValidationError(f"unknown spacing {spacing!r}")
    return [PQRPoint(1 + t, 1 - t, math.sqrt(max(1 - t * t, 0.0))) for t in ts]


def _interp_path(path: Sequence[PQRPoint]):
    arr = np.array([[p.P, p.Q, p.R] for p in path])
    grid = np.linspace(0.0, 1.0, len(path))
    return lambda s: PQRPoint(*(float(np.interp(s, grid, arr[:, j])) for j in range(3)))


@dataclass(frozen=True)
class SweepResult:
    final_state: np.ndarray
    fidelity: float
    min_gap: float
    min_gap_at: float


def _sector_gap(H: np.ndarray, basis: np.ndarray) -> float:
    w = np.linalg.eigvalsh(hermitize(basis.conj().T @ H @ basis))
    return float(w[1] - w[0])


def single_gate_sweep(U, T: float, *, psi=None, dt: float = 0.05) -> SweepResult:
    """Linear interpolation ``H_ini -> H_out`` starting from ``|psi>|0>``."""
    U = _gate_matrix(U)
    d = U.shape[0]
    psi = basis_state(0, int(math.log2(d))) if psi is None else as_state(psi, tol=1e-9)
    H_ini, H_out = single_gate_hamiltonians(U)
    H = lambda s: (1 - s) * H_ini + s * H_out
    start = np.kron([1, 0], psi)
    target = (start + np.kron([0, 1], U @ psi)) / math.sqrt(2)
    basis = np.column_stack([start, np.kron([0, 1], U @ psi)])
    return _run(H, T, dt, start, target, basis)


def _run(H, T, dt, start, target, basis, samples: int = 101) -> SweepResult:
    gaps = [(_sector_gap(H(s), basis), s) for s in np.linspace(0, 1, samples)]
    g, at = min(gaps)
    if g < 1e-8:
        raise ValidationError(f"gap closes at s = {at:.4f}")
    steps = max(100, int(math.ceil(T / dt)))
    out = propagate(lambda t: H(min(t / T, 1.0)), T, steps, start)
    return SweepResult(out, state_fidelity(out, target), g, at)


def half_cycle_sweep(U, path: Optional[Sequence[PQRPoint]] = None, T: float = 100.0, *,
                     psi=None, dt: float = 0.05) -> SweepResult:
    """Carry ``(|psi>|0> + U|psi>|1>)/sqrt2`` to ``U|psi>|1>`` along a ``PQ = R^2`` path."""
    path = list(path) if path is not None else straight_sweep()
    bad = [p for p in path if p.residual > 1e-10]
    if bad:
        raise ValidationError(f"path leaves PQ = R^2 at {bad[0]}")
    if abs(path[0].P - 1) + abs(path[0].Q - 1) + abs(path[0].R - 1) > 1e-12:
        raise ValidationError("path must start at P = Q = R = 1")
    if abs(path[-1].P - 2) + abs(path[-1].Q) + abs(path[-1].R) > 1e-12:
        raise ValidationError("path must end at P = 2, Q = R = 0")
    U = _gate_matrix(U)
    d = U.shape[0]
    psi = basis_state(0, int(math.log2(d))) if psi is None else as_state(psi, tol=1e-9)
    at = _interp_path(path)
    H = lambda s: pqr_hamiltonian(U, at(s))
    a, b = np.kron([1, 0], psi), np.kron([0, 1], U @ psi)
    return _run(H, T, dt, (a + b) / math.sqrt(2), b, np.column_stack([a, b]))


# general L --------------------------------------------------------------------

def clock_index(l: int, L: int) -> int:
    if not 0 <= l <= L:
        raise ValidationError(f"clock stage {l} outside 0..{L}")
    return (1 << l) - 1


def history_state(c: Circuit, weights: Optional[Sequence[float]] = None, *, psi=None) -> np.ndarray:
    """``sum_l w_l U_l ... U_1 |psi> (x) |l>``, uniform weights by default."""
    L = c.depth
    w = np.full(L + 1, 1 / math.sqrt(L + 1)) if weights is None else np.asarray(weights, dtype=float)
    if w.size != L + 1:
        raise ValidationError(f"need {L + 1} weights")
    w = w / np.linalg.norm(w)
    v = basis_state(0, c.n) if psi is None else as_state(psi, tol=1e-9)
    out = np.zeros(1 << (c.n + L), dtype=complex)
    for l in range(L + 1):
        if l:
            g = c.gates[l - 1]
            v = apply_gate(g.matrix, g.qubits, v)
        clock = np.zeros(1 << L)
        clock[clock_index(l, L)] = 1
        out += w[l] * np.kron(clock, v)
    return out


def is_legal_clock(index: int, L: int) -> bool:
    return index in {(1 << l) - 1 for l in range(L + 1)}


def _clock_op(L: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    """Product of single-qubit operators on clock qubits (1-based), identity elsewhere."""
    out = np.eye(1, dtype=complex)
    for q in range(1, L + 1):
        out = np.kron(factors.get(q, np.eye(2)), out)
    return out


def _prop_term(c: Circuit, l: int) -> np.ndarray:
    """Propagation term moving stage ``l-1`` to ``l``, using clock qubits ``l-1, l, l+1``."""
    L, n = c.depth, c.n
    g = c.gates[l - 1]
    U = kron_lift(g.matrix, g.qubits, n)
    I = np.eye(1 << n)
    ctx = {}
    if l > 1:
        ctx[l - 1] = P1
    if l < L:
        ctx[l + 1] = P0
    before = _clock_op(L, {**ctx, l: P0})
    after = _clock_op(L, {**ctx, l: P1})
    hop = _clock_op(L, {**ctx, l: RAISE})
    H = 0.5 * (np.kron(before, I) + np.kron(after, I) - np.kron(hop, U) - np.kron(hop.conj().T, U.conj().T))
    return hermitize(H)


def clock_penalty(L: int, n: int) -> np.ndarray:
    """``sum_l |0><0|_l |1><1|_{l+1}``: energy at least 1 on every non-unary clock string."""
    out = np.zeros((1 << L, 1 << L), dtype=complex)
    for l in range(1, L):
        out += _clock_op(L, {l: P0, l + 1: P1})
    return np.kron(out, np.eye(1 << n))


def clock_hamiltonian(c: Circuit) -> tuple[np.ndarray, np.ndarray]:
    """``(H_i, H_f)``: clock-occupation penalty and the propagation Hamiltonian.

    No input term is included, so every initial computational state gives a
    zero-energy history state of ``H_f``.
    """
    L, n = c.depth, c.n
    if L < 1:
        raise ValidationError("circuit has no gates")
    if L > 3 or n > 3 or n + L > MAX_QUBITS:
        raise ValidationError(f"clock construction limited to L <= 3, n <= 3 (got L={L}, n={n})")
    I = np.eye(1 << n)
    H_i = sum(np.kron(_clock_op(L, {l: P1}), I) for l in range(1, L + 1))
    H_f = sum(_prop_term(c, l) for l in range(1, L + 1)) + clock_penalty(L, n)
    _check_illegal(H_f, L, n)
    return hermitize(H_i), hermitize(H_f)


def _check_illegal(H_f: np.ndarray, L: int, n: int) -> None:
    illegal = [i for i in range(1 << (n + L)) if not is_legal_clock(i >> n, L)]
    if not illegal:
        return
    block = H_f[np.ix_(illegal, illegal)]
    legal = [i for i in range(1 << (n + L)) if is_legal_clock(i >> n, L)]
    if np.max(np.abs(H_f[np.ix_(illegal, legal)])) > 1e-12:
        raise ValidationError("H_f couples legal and illegal clock strings")
    if np.linalg.eigvalsh(block)[0] < 1 - 1e-9:
        raise ValidationError("an illegal clock string has energy below 1")


def clock_relabel(L: int, n: int) -> np.ndarray:
    """Permutation sending stage ``l`` to stage ``L - l``: reverse the clock qubits, then flip them."""
    dim = 1 << (n + L)
    perm = np.zeros((dim, dim))
    mask = (1 << L) - 1
    for i in range(dim):
        comp, clk = i & ((1 << n) - 1), i >> n
        rev = int(format(clk, f"0{L}b")[::-1], 2) if L else 0
        perm[((rev ^ mask) << n) | comp, i] = 1
    return perm


def reverse_circuit(c: Circuit) -> Circuit:
    return c.inverse()


@dataclass(frozen=True)
class CycleReport:
    final_state: np.ndarray  # in the relabelled clock frame
    target: np.ndarray
    fidelity: float
    leg_fidelities: tuple[float, float]
    min_gaps: tuple[float, float]
    min_gap_at: tuple[float, float]
    midpoint_match: float  # fidelity of the relabelled forward history state with the reverse one
    relabel_error: float  # || R H_f' R^dag - H_f ||

    def to_json(self) -> dict:
        return {"fidelity": self.fidelity, "leg_fidelities": list(self.leg_fidelities),
                "min_gaps": list(self.min_gaps), "min_gap_at": list(self.min_gap_at),
                "midpoint_match": self.midpoint_match, "relabel_error": self.relabel_error,
                "clock_relabel": "stage l -> stage L-l (reverse clock qubits, then flip)"}


def full_holonomic_cycle(c: Circuit, T: float = 100.0, *, dt: float = 0.05) -> CycleReport:
    """``H_i -> H_f`` for ``c``, then ``H_f' -> H_i'`` for the reverse circuit.

    The reverse circuit's history Hamiltonian equals the forward one after
    relabelling clock stage ``l`` as ``L - l``, so the second leg starts
    from the forward history state read in the relabelled clock.  The cycle
    ends at ``U_L ... U_1 |0>`` with the relabelled clock back at stage 0.
    """
    L, n = c.depth, c.n
    H_i, H_f = clock_hamiltonian(c)
    rev = reverse_circuit(c)
    H_ip, H_fp = clock_hamiltonian(rev)
    R = clock_relabel(L, n)
    relabel_error = float(np.max(np.abs(R @ H_fp @ R.T - H_f)))

    zero = basis_state(0, n)
    fwd_basis = np.column_stack([history_state(c, np.eye(L + 1)[l]) for l in range(L + 1)])
    start = fwd_basis[:, 0]
    psi_f = history_state(c)
    leg1 = _run(lambda s: (1 - s) * H_i + s * H_f, T, dt, start, psi_f, fwd_basis)

    out = apply_circuit(c, zero)
    rev_basis = np.column_stack([history_state(rev, np.eye(L + 1)[l], psi=out) for l in range(L + 1)])
    psi_fp = history_state(rev, psi=out)
    midpoint = state_fidelity(R.T @ psi_f, psi_fp)
    clock0 = np.zeros(1 << L)
    clock0[0] = 1
    target = np.kron(clock0, out)
    leg2 = _run(lambda s: (1 - s) * H_fp + s * H_ip, T, dt, R.T @ leg1.final_state, target, rev_basis)
    return CycleReport(leg2.final_state, target, leg2.fidelity, (leg1.fidelity, leg2.fidelity),
                       (leg1.min_gap, leg2.min_gap), (leg1.min_gap_at, leg2.min_gap_at),
                       midpoint, relabel_error)

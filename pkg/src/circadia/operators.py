"""Dense linear algebra on qubit registers.

Conventions used everywhere in the package:

* Qubits are numbered from 1. Qubit 1 is the least-significant bit of a
  basis index, so ``|q_n ... q_2 q_1>`` reads as the binary index.
* A local gate acting on ``targets = (a, b, ...)`` is a matrix whose own
  basis index has ``a`` as its least-significant bit.  Hence
  ``kron_lift(Z, [1], 2) == np.kron(I, Z)``.

Operators and states are plain ``numpy`` arrays; the helpers here validate
and transform them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as sla

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
BRANCH_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ValidationError(ValueError):
    """Raised when an operator or state violates a stated precondition."""


class BranchAmbiguityError(ValidationError):
    """An eigenphase sits on the cut of the principal logarithm."""


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap: float
    degeneracy_tol: float

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def ground_degeneracy(self) -> int:
        return int(np.sum(self.eigenvalues - self.eigenvalues[0] <= self.degeneracy_tol))

    def ground_projector(self) -> np.ndarray:
        v = self.eigenvectors[:, : self.ground_degeneracy()]
        return v @ v.conj().T


def qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def as_operator(op, *, hermitian: bool = False, unitary: bool = False,
                herm_tol: float = HERMITIAN_TOL, unit_tol: float = UNITARY_TOL) -> np.ndarray:
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    qubit_count(m.shape[0])
    if not np.all(np.isfinite(m)):
        raise ValidationError("operator has non-finite entries")
    if hermitian:
        err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if err > herm_tol * max(1.0, np.max(np.abs(m))):
            raise ValidationError(f"operator is not Hermitian (max |M - M^dag| = {err:.3e})")
    if unitary:
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > unit_tol:
            raise ValidationError(f"operator is not unitary (max |M^dag M - I| = {err:.3e})")
    return m


def as_state(psi, *, tol: float = NORM_TOL) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    qubit_count(v.size)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"state is not normalized (norm = {nrm:.15f})")
    return v


def basis_state(index: int, n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[index] = 1.0
    return v


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def eig_hermitian(op, *, degeneracy_tol: float = 1e-9) -> SpectrumReport:
    """Ascending eigendecomposition of a Hermitian operator."""
    m = as_operator(op, hermitian=True)
    w, v = np.linalg.eigh(hermitize(m))
    gap = float(w[1] - w[0]) if w.size > 1 else float("inf")
    return SpectrumReport(w, v, gap, degeneracy_tol)


def unitary_exp(K, s: float = 1.0) -> np.ndarray:
    """``exp(i s K)`` for Hermitian ``K``."""
    k = as_operator(K, hermitian=True)
    w, v = np.linalg.eigh(hermitize(k))
    return (v * np.exp(1j * s * w)) @ v.conj().T


def evolution_operator(H, dt: float) -> np.ndarray:
    """``exp(-i H dt)`` for Hermitian ``H`` (no validation; hot path)."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * dt * w)) @ v.conj().T


def principal_log(U, *, strict: bool = False, branch_tol: float = BRANCH_TOL) -> np.ndarray:
    """Hermitian ``K`` with ``exp(iK) = U`` and eigenvalues in ``(-pi, pi]``.

    An eigenphase within ``branch_tol`` of ``-pi`` is moved to ``+pi`` with a
    warning, or raises :class:`BranchAmbiguityError` when ``strict``.
    """
    u = as_operator(U, unitary=True)
    # complex Schur form of a normal matrix is diagonal with an orthonormal frame
    t, q = sla.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    on_cut = np.abs(phases + np.pi) <= branch_tol
    if np.any(on_cut):
        if strict:
            raise BranchAmbiguityError("eigenphase at -pi: principal logarithm is ambiguous")
        log.warning("eigenphase at -pi mapped to +pi in principal_log")
        phases = np.where(on_cut, np.pi, phases)
    K = (q * phases) @ q.conj().T
    return hermitize(K)


def _apply_local(gate: np.ndarray, targets: Sequence[int], block: np.ndarray, n: int) -> np.ndarray:
    """Apply a local gate to the leading axis of ``block`` (shape ``(2**n, ...)``)."""
    k = len(targets)
    extra = block.shape[1:]
    t = block.reshape((2,) * n + extra)
    # axis a of the reshaped tensor holds qubit n - a
    in_axes = [n - targets[j] for j in reversed(range(k))]
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), in_axes))
    out = np.moveaxis(out, list(range(k)), in_axes)
    return out.reshape(block.shape)


def check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    tg = tuple(int(q) for q in targets)
    if len(set(tg)) != len(tg):
        raise ValidationError(f"repeated target qubit in {tg}")
    for q in tg:
        if not 1 <= q <= n:
            raise ValidationError(f"qubit index {q} out of range 1..{n}")
    return tg


def apply_gate(gate, targets: Sequence[int], psi: np.ndarray) -> np.ndarray:
    n = qubit_count(psi.shape[0])
    tg = check_targets(targets, n)
    g = np.asarray(gate, dtype=complex)
    if g.shape != (1 << len(tg), 1 << len(tg)):
        raise ValidationError(f"gate of shape {g.shape} does not match {len(tg)} targets")
    return _apply_local(g, tg, np.asarray(psi, dtype=complex), n)


def kron_lift(gate, targets: Sequence[int], n: int) -> np.ndarray:
    """Embed a local gate into an ``n``-qubit operator (identity elsewhere)."""
    return apply_gate(gate, targets, np.eye(1 << n, dtype=complex))


def partial_trace(rho, keep: Sequence[int], *, tol: float = 1e-10) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (returned in ascending qubit order)."""
    r = as_operator(rho, hermitian=True, herm_tol=tol)
    if abs(np.trace(r).real - 1.0) > tol:
        raise ValidationError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(hermitize(r))[0] < -tol:
        raise ValidationError("density matrix is not positive semidefinite")
    n = qubit_count(r.shape[0])
    kept = sorted(check_targets(keep, n))
    traced = [q for q in range(1, n + 1) if q not in kept]
    t = r.reshape((2,) * (2 * n))
    # row axis for qubit q is n - q, column axis is 2n - q
    letters = list(range(2 * n))
    for q in traced:
        letters[2 * n - q] = letters[n - q]
    out_rows = [n - q for q in reversed(kept)]
    out_cols = [2 * n - q for q in reversed(kept)]
    out = np.einsum(t, letters, [letters[a] for a in out_rows] + [letters[a] for a in out_cols])
    d = 1 << len(kept)
    return out.reshape(d, d)


def reduced_state(psi, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state on ``keep`` (ascending qubit order)."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    n = qubit_count(v.size)
    kept = sorted(check_targets(keep, n))
    t = v.reshape((2,) * n)
    # axis n - q holds qubit q; put kept qubits first, most significant first
    axes = [n - q for q in reversed(kept)]
    rest = [a for a in range(n) if a not in axes]
    m = np.transpose(t, axes + rest).reshape(1 << len(kept), -1)
    return m @ m.conj().T


def density(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def state_fidelity(a, b) -> float:
    """``|<a|b>|^2`` for pure states."""
    return float(abs(np.vdot(a, b)) ** 2)


def unitary_fidelity(W, V) -> float:
    """``|tr(W^dag V)| / d``; insensitive to a global phase."""
    W = np.asarray(W)
    return float(abs(np.trace(W.conj().T @ V)) / W.shape[0])


def polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)

"""Gap/locality trade-offs: a spectral inequality, GHZ witnesses and counting bounds.

The inequality checked here: for Hermitian ``H`` with ascending eigenvalues
``E_0 <= E_1 <= ...``, a state ``psi`` whose ground-space weight is ``F^2``
and any density matrix ``rho`` with ``tr(rho H) = <psi|H|psi>``,

    sum_{j>=1} (E_j - E_0) r_j <= (1 - F^2) (E_max - E_0)

where ``r_0 >= r_1 >= ...`` are the eigenvalues of ``rho`` in *descending*
order.  This is the rearrangement bound ``tr(rho H) >= sum_j E_j r_j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg as sla

from .operators import (ValidationError, as_operator, as_state, density, hermitize,
                        reduced_state, random_state, random_unitary)
from .pauli import PauliSum, local_strings, random_local, string_matrix

EXPECTATION_TOL = 1e-8


def ghz_state(n: int, sign: int = 1) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1 / math.sqrt(2)
    v[-1] = sign / math.sqrt(2)
    return v


def ghz_mixture(n: int) -> np.ndarray:
    """``(|0...0><0...0| + |1...1><1...1|) / 2``."""
    r = np.zeros((1 << n, 1 << n), dtype=complex)
    r[0, 0] = r[-1, -1] = 0.5
    return r


@dataclass(frozen=True)
class Theorem1Instance:
    H: np.ndarray
    psi: np.ndarray
    rho: np.ndarray
    tol: float = EXPECTATION_TOL

    def __post_init__(self):
        H = hermitize(as_operator(self.H, hermitian=True, herm_tol=1e-10))
        psi = as_state(self.psi, tol=1e-9)
        rho = hermitize(as_operator(self.rho, hermitian=True, herm_tol=1e-10))
        if not H.shape == rho.shape == (psi.size, psi.size):
            raise ValidationError("H, psi and rho dimensions disagree")
        if abs(np.trace(rho).real - 1) > 1e-9 or np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValidationError("rho is not a density matrix")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "rho", rho)
        if abs(self.rho_energy - self.psi_energy) > self.tol:
            raise ValidationError(
                f"tr(rho H) = {self.rho_energy:.12g} differs from <psi|H|psi> = {self.psi_energy:.12g}")

    @property
    def psi_energy(self) -> float:
        return float(np.vdot(self.psi, self.H @ self.psi).real)

    @property
    def rho_energy(self) -> float:
        return float(np.trace(self.rho @ self.H).real)


@dataclass(frozen=True)
class Theorem1Result:
    lhs: float
    rhs: float
    holds: bool
    F: float
    E_tot: float


def theorem1_check(inst: Theorem1Instance, *, slack: float = 1e-9,
                   degeneracy_tol: float = 1e-9) -> Theorem1Result:
    w, v = np.linalg.eigh(inst.H)
    ground = v[:, w - w[0] <= degeneracy_tol]
    F = math.sqrt(min(1.0, float(np.sum(np.abs(ground.conj().T @ inst.psi) ** 2))))
    r = np.sort(np.linalg.eigvalsh(inst.rho))[::-1]
    lhs = float(np.dot(w[1:] - w[0], r[1:]))
    E_tot = float(w[-1] - w[0])
    rhs = (1 - F**2) * E_tot
    return Theorem1Result(lhs, rhs, lhs <= rhs + slack, F, E_tot)


def random_theorem1_instance(n: int, rng: np.random.Generator) -> Theorem1Instance:
    """Random ``(H, psi, rho)`` with matched expectation.

    ``H`` is either a random local Pauli sum or fully random; ``psi`` is
    tilted toward the ground state by a random amount; ``rho`` is a random
    low-rank state mixed with an extremal eigenstate to hit ``<psi|H|psi>``.
    """
    d = 1 << n
    if rng.random() < 0.5:
        H = random_local(n, int(rng.integers(1, n + 1)), rng).to_dense()
    else:
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(H)
    t = rng.random() ** 3
    psi = math.sqrt(1 - t) * v[:, 0] + math.sqrt(t) * random_state(d, rng)
    psi /= np.linalg.norm(psi)
    e = float(np.vdot(psi, H @ psi).real)
    rank = int(rng.integers(1, d + 1))
    vecs = random_unitary(d, rng)[:, :rank]
    weights = rng.dirichlet(np.ones(rank))
    sigma = (vecs * weights) @ vecs.conj().T
    es = float(np.trace(sigma @ H).real)
    # mix with the extremal eigenstate on the other side of e
    anchor, ea = (v[:, 0], w[0]) if es >= e else (v[:, -1], w[-1])
    lam = (e - ea) / (es - ea) if abs(es - ea) > 1e-14 else 1.0
    rho = lam * sigma + (1 - lam) * density(anchor)
    return Theorem1Instance(H, psi, rho)


@dataclass(frozen=True)
class WitnessReport:
    n: int
    locality: int
    expectation_gap: float  # |tr(rho H) - <GHZ|H|GHZ>|
    is_eigenstate: bool
    energy: float
    is_ground: bool
    degeneracy: int  # multiplicity of the GHZ energy
    partner_residual: float  # ||(H - E) GHZ_-||
    forced: bool  # GHZ is a ground state, so the bound forces degeneracy
    theorem: Optional[Theorem1Result] = None

    @property
    def partner_found(self) -> bool:
        return self.degeneracy >= 2

    def to_json(self) -> dict:
        d = {k: getattr(self, k) for k in ("n", "locality", "expectation_gap", "is_eigenstate",
                                           "energy", "is_ground", "degeneracy",
                                           "partner_residual", "forced")}
        if self.theorem is not None:
            d["lhs"], d["rhs"] = self.theorem.lhs, self.theorem.rhs
        return d


def ghz_witness(H: PauliSum, n: Optional[int] = None, *, tol: float = 1e-8) -> WitnessReport:
    n = H.n if n is None else n
    if n != H.n:
        raise ValidationError(f"Hamiltonian acts on {H.n} qubits, not {n}")
    k = H.locality()
    if k >= n:
        raise ValidationError(f"locality {k} must be at most n - 1 = {n - 1}")
    M = H.to_dense()
    g = ghz_state(n)
    e = float(np.vdot(g, M @ g).real)
    exp_gap = abs(float(np.trace(ghz_mixture(n) @ M).real) - e)
    resid = float(np.linalg.norm(M @ g - e * g))
    w = np.linalg.eigvalsh(M)
    is_eig = resid <= tol
    mult = int(np.sum(np.abs(w - e) <= tol)) if is_eig else 0
    gm = ghz_state(n, -1)
    partner = float(np.linalg.norm(M @ gm - e * gm))
    is_ground = is_eig and e - w[0] <= tol
    th = theorem1_check(Theorem1Instance(M, g, ghz_mixture(n))) if is_eig else None
    return WitnessReport(n, k, exp_gap, is_eig, e, is_ground, mult, partner, is_ground, th)


def eigen_family(n: int, k: int, states) -> np.ndarray:
    """Orthonormal basis (rows) of real coefficient vectors over ``local_strings(n, k)``
    whose Pauli sums have every vector in ``states`` as an exact eigenvector."""
    blocks = []
    for g in states:
        Q = np.eye(1 << n) - np.outer(g, g.conj())
        A = np.array([Q @ (string_matrix(s) @ g) for s in local_strings(n, k)]).T
        blocks += [A.real, A.imag]
    return sla.null_space(np.vstack(blocks), rcond=1e-10).T


def ghz_eigen_family(n: int, k: int) -> np.ndarray:
    return eigen_family(n, k, [ghz_state(n)])


def ghz_ground_instances(n: int, k: int, count: int, rng: np.random.Generator,
                         *, max_tries: int = 10_000) -> list[PauliSum]:
    """Random ``k``-local Hamiltonians having GHZ as an exact ground state.

    GHZ alone as an eigenvector never makes it the lowest level (that is the
    no-go statement), so the random part is drawn from sums that keep both
    GHZ states as eigenvectors, and a ferromagnetic ``-ZZ`` term strong
    enough to push them below the rest is added.  Candidates are still
    checked and discarded if GHZ is not lowest.
    """
    if k < 2:
        raise ValidationError("GHZ cannot be a ground state of a 1-local Hamiltonian")
    basis = eigen_family(n, k, [ghz_state(n), ghz_state(n, -1)])
    strings = local_strings(n, k)
    ferro = PauliSum(n, {})
    for a, b in itertools.combinations(range(n), 2):
        s = ["I"] * n
        s[a] = s[b] = "Z"
        ferro = ferro + PauliSum(n, {"".join(s): -1.0})
    # ferro has its two aligned states lowest with gap 2(n-1)
    g = ghz_state(n)
    out = []
    for _ in range(max_tries):
        rand = PauliSum(n, dict(zip(strings, basis.T @ rng.normal(size=basis.shape[0]))))
        norm = float(np.linalg.norm(rand.to_dense(), 2))
        lam = norm / (n - 1) * float(rng.uniform(1.05, 3.0))
        cand = (rand + ferro * lam).pruned()
        M = cand.to_dense()
        e = float(np.vdot(g, M @ g).real)
        if e - np.linalg.eigvalsh(M)[0] <= 1e-9:
            out.append(cand)
            if len(out) == count:
                return out
    raise ValidationError(f"only {len(out)} of {count} instances found")


def ghz_eigen_instances(n: int, k: int, count: int, rng: np.random.Generator) -> list[PauliSum]:
    """Random ``k``-local Hamiltonians having GHZ as an eigenstate (any level)."""
    basis = ghz_eigen_family(n, k)
    strings = local_strings(n, k)
    return [PauliSum(n, dict(zip(strings, basis.T @ rng.normal(size=basis.shape[0]))))
            for _ in range(count)]


@dataclass(frozen=True)
class AncillaReport:
    status: str  # "ok" or "inapplicable"
    m: int  # ancilla states a_j with psi (x) a_j in the ground space
    ground_degeneracy: int
    forced_degeneracy: int  # 2 m
    expectation_gap: float
    extra_partners: int  # ground states beyond the psi (x) a_j family

    def to_json(self) -> dict:
        return dict(self.__dict__)


def ancilla_witness(H: PauliSum, n: int, *, tol: float = 1e-8) -> AncillaReport:
    """Extension of the GHZ witness to ground states ``|GHZ>|a_j>`` with ancillas.

    Qubits ``1..n`` are computational and the rest ancillas.  The ancilla
    states are read off the ground space; when none factor with GHZ the
    argument does not apply and the report says so.
    """
    if not 1 <= n < H.n:
        raise ValidationError("need at least one computational and one ancilla qubit")
    psi = ghz_state(n)
    M = H.to_dense()
    w, v = np.linalg.eigh(M)
    gs = v[:, w - w[0] <= tol]
    na = H.n - n
    da = 1 << na
    # qubit 1 is the LSB, so the computational index is the low part
    blocks = gs.reshape(da, 1 << n, gs.shape[1])
    proj = np.einsum("c,acg->ag", psi.conj(), blocks)  # (<psi| x I) |g>
    A = proj @ proj.conj().T
    aw, av = np.linalg.eigh(hermitize(A))
    anc = av[:, aw > 1 - 1e-8]
    m = anc.shape[1]
    if m == 0:
        return AncillaReport("inapplicable", 0, gs.shape[1], 0, float("nan"), 0)
    pa = anc @ anc.conj().T / m
    rho = np.kron(pa, ghz_mixture(n))
    target = np.kron(pa, density(psi))
    gap = abs(float(np.trace(rho @ M).real - np.trace(target @ M).real))
    return AncillaReport("ok", m, gs.shape[1], 2 * m, gap, gs.shape[1] - m)


def conjugated_spectrum(n: int) -> list[tuple[float, int]]:
    """Levels of ``U (sum_i Z_i) U^dag`` rescaled to ``[0, 1]``: ``j/n`` with multiplicity ``C(n, j)``."""
    if n < 1:
        raise ValidationError("n must be positive")
    return [(j / n, math.comb(n, j)) for j in range(n + 1)]


def conjugated_spectrum_numeric(n: int, U: np.ndarray, *, tol: float = 1e-9) -> list[tuple[float, int]]:
    H0 = sum(PauliSum.single(n, "Z", q).to_dense() for q in range(1, n + 1))
    w = np.linalg.eigvalsh(hermitize(U @ H0 @ U.conj().T))
    w = (w - w[0]) / (w[-1] - w[0])
    levels: list[list] = []
    for x in w:
        if levels and abs(x - levels[-1][0]) <= tol:
            levels[-1][1] += 1
        else:
            levels.append([float(x), 1])
    return [(e, c) for e, c in levels]


def lowest_average(n: int, count: int) -> float:
    """Mean normalized energy of the ``count`` lowest states of the binomial ladder."""
    acc, left = 0.0, count
    for e, mult in conjugated_spectrum(n):
        take = min(mult, left)
        acc += take * e
        left -= take
        if not left:
            break
    return acc / count


def tensor_ghz_family(n: int) -> np.ndarray:
    """Columns: every ``(|000> +/- |111>)/sqrt2`` block pattern (first column all ``+``)."""
    if n % 3 or n < 3:
        raise ValidationError("n must be a positive multiple of 3")
    b = n // 3
    plus, minus = ghz_state(3), ghz_state(3, -1)
    cols = []
    for signs in itertools.product((1, -1), repeat=b):
        v = np.ones(1, dtype=complex)
        for sg in signs:  # block 1 holds qubits 1-3, the least-significant bits
            v = np.kron(plus if sg > 0 else minus, v)
        cols.append(v)
    return np.array(cols).T


def _block_ising(n: int, t: float) -> PauliSum:
    h = PauliSum(n, {})
    for blk in range(n // 3):
        q = [3 * blk + 1, 3 * blk + 2, 3 * blk + 3]
        for a, c in ((q[0], q[1]), (q[1], q[2]), (q[0], q[2])):
            s = ["I"] * n
            s[a - 1] = s[c - 1] = "Z"
            h = h + PauliSum(n, {"".join(s): -1.0})
        for a in q:
            h = h + PauliSum.single(n, "X", a, -t)
    return h


@dataclass(frozen=True)
class TensorGHZReport:
    n: int
    rank: int
    marginal_deviation: float  # max over family and qubit pairs of marginal differences
    F: float
    field: float
    lhs: float
    rhs: float
    avg_gap: float  # mean of E_j - E_0 over the next rank - 1 levels
    avg_gap_bound: float
    lowest_average: float  # binomial ladder counting figure for comparison

    def to_json(self) -> dict:
        return dict(self.__dict__)


def tensor_ghz_bound(n: int, delta: float) -> TensorGHZReport:
    """Evaluate the average-gap bound for the tensor-GHZ family.

    The candidate 2-local Hamiltonian is a ferromagnetic triangle on every
    block with a transverse field tuned by bisection so that ``1 - F^2 = delta``.
    """
    if n not in (3, 6, 9):
        raise ValidationError("n must be 3, 6 or 9")
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    fam = tensor_ghz_family(n)
    rank = fam.shape[1]
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    ref = [reduced_state(fam[:, 0], p) for p in pairs]
    dev = 0.0
    for c in range(1, rank):
        dev = max(dev, max(float(np.max(np.abs(reduced_state(fam[:, c], p) - r)))
                           for p, r in zip(pairs, ref)))
    phi = fam[:, 0]

    blocks = n // 3
    g3 = ghz_state(3)

    def infidelity(t):
        # the blocks commute, so the ground state is a product of block ground states
        v = np.linalg.eigh(_block_ising(3, t).to_dense())[1][:, 0]
        return 1 - abs(np.vdot(v, g3)) ** (2 * blocks)

    lo, hi = 1e-6, 1.0
    while infidelity(hi) < delta:
        hi *= 2
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if infidelity(mid) < delta else (lo, mid)
    t = 0.5 * (lo + hi)
    H = _block_ising(n, t).to_dense()
    rho = fam @ fam.conj().T / rank
    res = theorem1_check(Theorem1Instance(H, phi, rho, tol=1e-8))
    w = np.linalg.eigvalsh(H)
    avg = float(np.mean(w[1:rank] - w[0])) if rank > 1 else 0.0
    bound = rank * res.rhs / (rank - 1) if rank > 1 else float("inf")
    return TensorGHZReport(n, rank, dev, res.F, t, res.lhs, res.rhs, avg, bound,
                           lowest_average(n, rank))

"""Three-qubit perturbative gadget: a 3-local operator replaced by 2-local couplings to ancillas.

Each weight-3 term ``-6 B1 B2 B3`` (``B`` positive semidefinite on three
computational qubits) gets its own ancilla triple.  The ancilla penalty

    H_anc = -(delta^-3 / 4) (Z_a Z_b + Z_a Z_c + Z_b Z_c - 3)

vanishes on ``span{|000>, |111>}`` and costs ``delta^-3`` elsewhere.  The
2-local coupling

    V' = Y + sum_m [ delta^-1 (B1^2 + B2^2 + B3^2) - delta^-2 (B1 X_a + B2 X_b + B3 X_c) ]

then reproduces ``Y - 6 sum_m B1 B2 B3 (X_a X_b X_c)`` at third order on the
low-energy subspace, up to ``O(delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .operators import (ValidationError, hermitize, kron_lift, reduced_state)
from .pauli import (GadgetTriple, PauliSum, pauli_decompose, psd_triple_decompose,
                    triple_reconstruction)
from .circuit import FIXED_GATES

MAX_QUBITS = 12


def _string(n: int, assign: dict[int, str]) -> str:
    s = ["I"] * n
    for q, ch in assign.items():
        s[q - 1] = ch
    return "".join(s)


def penalty(n: int, ancillas: tuple[int, int, int], delta: float) -> PauliSum:
    """Penalty on one ancilla triple (zero on ``|000>, |111>``, ``delta^-3`` elsewhere)."""
    a, b, c = ancillas
    k = -(delta ** -3) / 4
    terms = {_string(n, {a: "Z", b: "Z"}): k, _string(n, {a: "Z", c: "Z"}): k,
             _string(n, {b: "Z", c: "Z"}): k, "I" * n: -3 * k}
    return PauliSum(n, terms)


@dataclass
class GadgetizedHamiltonian:
    n_comp: int
    triples: list[GadgetTriple]
    ancillas: list[tuple[int, int, int]]
    delta: float
    Y: PauliSum  # on the computational register
    H_anc: PauliSum  # on the full register
    Vprime: PauliSum  # on the full register
    base: PauliSum  # untouched part of the Hamiltonian, full register
    scale: float = 1.0
    _dense: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_total(self) -> int:
        return self.n_comp + 3 * len(self.triples)

    @property
    def total(self) -> PauliSum:
        return (self.H_anc + self.Vprime + self.base).pruned()

    def dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.total.to_dense()
        return self._dense

    def low_indices(self) -> np.ndarray:
        """Basis indices with every ancilla triple in ``|000>`` or ``|111>``."""
        k = np.arange(1 << self.n_total)
        ok = np.ones(k.size, dtype=bool)
        for anc in self.ancillas:
            bits = [(k >> (q - 1)) & 1 for q in anc]
            ok &= (bits[0] == bits[1]) & (bits[1] == bits[2])
        return np.nonzero(ok)[0]

    def penalty_diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.H_anc.to_dense()))

    def effective(self) -> np.ndarray:
        """``(base + Y) - 6 sum B1 B2 B3 (X X X)`` on the full register."""
        n = self.n_total
        h = self.base + self.scale * self.Y.embed(n)
        for t, anc in zip(self.triples, self.ancillas):
            prod = t.product_pauli(self.n_comp).embed(n)
            xxx = PauliSum(n, {_string(n, {a: "X" for a in anc}): 1.0})
            h = h - 6.0 * self.scale * _times(prod, xxx)
        return h.pruned().to_dense()

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "n_comp": self.n_comp,
            "n_total": self.n_total,
            "scale": self.scale,
            "ancillas": [list(a) for a in self.ancillas],
            "triples": [{"qubits": list(t.qubits), "letters": "".join(t.letters),
                         "signs": list(t.signs), "scale": t.scale} for t in self.triples],
            "Vprime": self.Vprime.to_json(),
        }


def _times(a: PauliSum, b: PauliSum) -> PauliSum:
    """Product of two Pauli sums on disjoint qubits (so the letters just merge)."""
    acc = {}
    for sa, ca in a.coeffs.items():
        for sb, cb in b.coeffs.items():
            if any(x != "I" and y != "I" for x, y in zip(sa, sb)):
                raise ValidationError("operands overlap")
            s = "".join(x if x != "I" else y for x, y in zip(sa, sb))
            acc[s] = acc.get(s, 0.0) + ca * cb
    return PauliSum(a.n, acc)


def build_gadget(v3: PauliSum, Y: PauliSum, triples: list[GadgetTriple], delta: float,
                 *, base: Optional[PauliSum] = None, scale: float = 1.0,
                 tol: float = 1e-10) -> GadgetizedHamiltonian:
    """Gadgetize ``scale * v3`` where ``v3 = Y - 6 sum scale_m B1 B2 B3``.

    ``base`` is an optional 2-local Hamiltonian on the computational qubits
    (or already on the full register) that is carried along unchanged.
    Ancilla triple ``m`` occupies qubits ``n + 3m + 1 .. n + 3m + 3``.
    """
    if not 0 < delta < 1:
        raise ValidationError(f"delta = {delta} outside (0, 1)")
    n = v3.n
    diff = (triple_reconstruction(Y, triples) - v3).pruned(tol)
    if diff.coeffs:
        raise ValidationError("(Y, triples) do not reconstruct v3")
    N = n + 3 * len(triples)
    if N > MAX_QUBITS:
        raise ValidationError(f"gadget needs {N} qubits (limit {MAX_QUBITS})")
    ancillas = [tuple(n + 3 * m + j for j in (1, 2, 3)) for m in range(len(triples))]
    H_anc = PauliSum(N, {})
    Vp = Y.embed(N)
    for t, anc in zip(triples, ancillas):
        H_anc = H_anc + penalty(N, anc, delta)
        for B, a in zip(t.factor_paulis(n), anc):
            Bb = B.embed(N)
            r = t.scale ** (1.0 / 3.0)
            # B is r times a projector, so B^2 = r B
            Vp = Vp + (r / delta) * Bb - delta ** -2 * _times(Bb, PauliSum.single(N, "X", a))
    if base is None:
        base_full = PauliSum(N, {})
    elif base.n == n:
        base_full = base.embed(N)
    elif base.n == N:
        base_full = base
    else:
        raise ValidationError("base acts on the wrong number of qubits")
    return GadgetizedHamiltonian(n, list(triples), ancillas, delta, Y, (scale * H_anc).pruned(),
                                 (scale * Vp).pruned(), base_full.pruned(), scale)


def gadgetize(target_change: PauliSum, delta: float, *, base: Optional[PauliSum] = None,
              scale: float = 1.0) -> GadgetizedHamiltonian:
    """Decompose a 3-local operator and build its gadget in one go."""
    v = target_change * (1.0 / scale)
    Y, triples = psd_triple_decompose(v)
    return build_gadget(v, Y, triples, delta, base=base, scale=scale)


@dataclass(frozen=True)
class SelfEnergyReport:
    z: float
    sigma_minus: np.ndarray  # on the low-energy subspace (ordered by low_indices)
    deviation: float

    def __post_init__(self):
        if self.deviation < 0:
            raise ValidationError("negative deviation")


def _blocks(g: GadgetizedHamiltonian):
    H = g.dense()
    lo = g.low_indices()
    hi = np.setdiff1d(np.arange(H.shape[0]), lo)
    return H, lo, hi


def self_energy_exact(g: GadgetizedHamiltonian, z: float, *, method: str = "schur") -> SelfEnergyReport:
    """``Sigma_-(z) = z - [G(z)_{--}]^{-1}`` with ``G(z) = (z - H)^{-1}``.

    ``method="schur"`` evaluates the same quantity as the Feshbach
    complement ``H_-- + H_-+ (z - H_++)^{-1} H_+-`` which stays well
    conditioned when ``z`` is close to an eigenvalue of the full ``H``.
    ``method="resolvent"`` inverts ``z - H`` directly.
    """
    H, lo, hi = _blocks(g)
    d = H.shape[0]
    if method == "resolvent":
        try:
            G = np.linalg.inv(z * np.eye(d) - H)
            S = z * np.eye(lo.size) - np.linalg.inv(G[np.ix_(lo, lo)])
        except np.linalg.LinAlgError as exc:
            raise ValidationError(f"z = {z} is at a resonance") from exc
    elif method == "schur":
        Hpp = H[np.ix_(hi, hi)]
        try:
            X = np.linalg.solve(z * np.eye(hi.size) - Hpp, H[np.ix_(hi, lo)])
        except np.linalg.LinAlgError as exc:
            raise ValidationError(f"z = {z} is at a resonance of the excited block") from exc
        S = H[np.ix_(lo, lo)] + H[np.ix_(lo, hi)] @ X
    else:
        raise ValidationError(f"unknown method {method!r}")
    heff = g.effective()[np.ix_(lo, lo)]
    return SelfEnergyReport(z, S, float(np.linalg.norm(S - heff, 2)))


def self_energy_window(g: GadgetizedHamiltonian, *, points: int = 9, width: float = 1.0) -> float:
    """Largest ``||Sigma_-(z) - H_eff||`` over a grid around the effective ground energy."""
    lo = g.low_indices()
    e0 = float(np.linalg.eigvalsh(g.effective()[np.ix_(lo, lo)])[0])
    return max(self_energy_exact(g, float(z)).deviation
               for z in np.linspace(e0 - width, e0 + width, points))


def self_energy_terms(g: GadgetizedHamiltonian, z: float, order: int) -> list[np.ndarray]:
    """Individual terms ``V_-+ (G_+ V_++)^{k-2} G_+ V_+-`` for ``k = 1..order``.

    ``G_+ = (z - H_anc)^{-1}`` on the excited ancilla space; ``H_anc`` is
    diagonal in the computational basis so this is a division.
    """
    if not 1 <= order <= 4:
        raise ValidationError("order must be between 1 and 4")
    H, lo, hi = _blocks(g)
    diag = g.penalty_diagonal()
    V = H - np.diag(diag)
    gap = float(np.min(diag[hi])) if hi.size else math.inf
    vnorm = float(np.linalg.norm(V, 2))
    if vnorm >= gap:
        raise ValidationError(f"perturbation norm {vnorm:.3g} is not below the penalty gap {gap:.3g}")
    Gp = 1.0 / (z - diag[hi])
    Vmm, Vmp, Vpm, Vpp = (V[np.ix_(lo, lo)], V[np.ix_(lo, hi)], V[np.ix_(hi, lo)],
                          V[np.ix_(hi, hi)])
    terms = [Vmm]
    right = Gp[:, None] * Vpm
    for _ in range(2, order + 1):
        terms.append(Vmp @ right)
        right = Gp[:, None] * (Vpp @ right)
    return terms


def self_energy_series(g: GadgetizedHamiltonian, z: float, order: int) -> np.ndarray:
    return sum(self_energy_terms(g, z, order))


def perturbation_ratio(g: GadgetizedHamiltonian) -> tuple[float, float]:
    """``(||V||, gap of H_anc)`` with ``V = H - H_anc``."""
    H, lo, hi = _blocks(g)
    diag = g.penalty_diagonal()
    return float(np.linalg.norm(H - np.diag(diag), 2)), float(np.min(diag[hi]))


def third_order_structure(g: GadgetizedHamiltonian, z: float = 0.0) -> float:
    """``||Sigma^(3)(z) - (-6 sum B1 B2 B3 X X X)||`` on the low subspace."""
    lo = g.low_indices()
    n = g.n_total
    target = PauliSum(n, {})
    for t, anc in zip(g.triples, g.ancillas):
        prod = t.product_pauli(g.n_comp).embed(n)
        xxx = PauliSum(n, {_string(n, {a: "X" for a in anc}): 1.0})
        target = target - 6.0 * g.scale * _times(prod, xxx)
    t3 = self_energy_terms(g, z, 3)[2]
    return float(np.linalg.norm(t3 - target.to_dense()[np.ix_(lo, lo)], 2))


@dataclass(frozen=True)
class SpectrumComparison:
    delta: float
    k_levels: int
    target_levels: list[float]
    gadget_levels: list[float]
    deviation: float
    ground_fidelity: float  # target ground vs gadget ground reduced to the computational qubits
    ancilla_fidelity: list[float]  # per triple, against (|000> + |111>)/sqrt2

    def to_json(self) -> dict:
        return dict(self.__dict__)


def compare_lower_spectra(h3_full, g: GadgetizedHamiltonian, k_levels: int = 2) -> SpectrumComparison:
    h3 = h3_full.to_dense() if isinstance(h3_full, PauliSum) else np.asarray(h3_full, dtype=complex)
    if h3.shape[0] != 1 << g.n_comp:
        raise ValidationError("target does not act on the computational register")
    if not 1 <= k_levels <= h3.shape[0]:
        raise ValidationError("k_levels out of range")
    wt, vt = np.linalg.eigh(h3)
    wg, vg = np.linalg.eigh(g.dense())
    dev = float(np.max(np.abs(wg[:k_levels] - wt[:k_levels])))
    ground = vg[:, 0]
    rc = reduced_state(ground, range(1, g.n_comp + 1))
    fid = float(np.real(np.vdot(vt[:, 0], rc @ vt[:, 0])))
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / math.sqrt(2)
    anc_fid = [float(np.real(np.vdot(ghz, reduced_state(ground, anc) @ ghz))) for anc in g.ancillas]
    return SpectrumComparison(g.delta, k_levels, wt[:k_levels].tolist(), wg[:k_levels].tolist(),
                              dev, fid, anc_fid)


def cz_step_target(coupling: float = 0.002, field: float = 0.008) -> tuple[PauliSum, PauliSum, PauliSum]:
    """A step whose change is genuinely 3-local: ``CZ(1,2)`` applied to a 2-local Hamiltonian.

    Returns ``(H_prev, V, H_next)`` on three qubits with ``H_next = CZ H_prev CZ``
    and ``H_prev = field (X1 - Z2 - X3) + coupling X1 X3``.  The conjugation
    turns ``X1 X3`` into ``X1 Z2 X3``.

    The ground state ``|-,0,+>`` is exactly the range of the projector
    product the gadget uses, and ``16 coupling > 2 field`` keeps the
    wrong-parity ancilla sector above the first excited level.  The gadget
    error has the form ``delta r^4 f(r delta)`` with ``r`` the cube root of
    the triple scale, so it is linear in ``delta`` over ``[0.05, 0.2]`` only
    when ``r`` is small; the default coupling gives ``r ~ 0.11``.
    """
    H_prev = PauliSum.from_terms(3, [(field, "XII"), (-field, "IZI"), (-field, "IIX"),
                                     (coupling, "XIX")])
    return H_prev, *conjugate_step(H_prev, "CZ", (1, 2))


def conjugate_step(H_prev: PauliSum, gate: str, qubits) -> tuple[PauliSum, PauliSum]:
    """``(V, H_next)`` for ``H_next = U H_prev U^dag`` with a fixed two-qubit gate."""
    U = kron_lift(FIXED_GATES[gate], qubits, H_prev.n)
    Hp = H_prev.to_dense()
    H_next = pauli_decompose(hermitize(U @ Hp @ U.conj().T), tol=1e-12)
    return (H_next - H_prev).pruned(1e-12), H_next


def _normalized_gap(M: np.ndarray) -> tuple[float, float]:
    w = np.linalg.eigvalsh(M)
    return float((w[1] - w[0]) / (w[-1] - w[0])), float(w[1] - w[0])


def repeated_gadget_gap(steps: int, delta: float) -> list[float]:
    """Normalized ground gap after 0..``steps`` nested gadgetizations.

    Step 1 gadgetizes the CZ step of :func:`cz_step_target`.  Every later
    step applies ``CZ`` between the last ancilla of the previous gadget and
    computational qubit 2; this turns that ancilla's ``B X`` coupling into a
    3-local term of strength ``~delta^-2`` times the previous scale, which is
    gadgetized again at an energy scale raised by the same factor.
    """
    if not 0 <= steps <= 3:
        raise ValidationError("steps must be between 0 and 3")
    if 3 + 3 * steps > MAX_QUBITS:
        raise ValidationError("register too large")
    H_prev, V, H_next = cz_step_target()
    gaps = [_normalized_gap(H_next.to_dense())[0]]
    if steps == 0:
        return gaps
    ref = max(abs(c) for c in V.part(3).coeffs.values())
    g = gadgetize(V, delta, base=H_prev)
    current = g.total
    gaps.append(_normalized_gap(current.to_dense())[0])
    last_anc = g.ancillas[-1][-1]
    for _ in range(2, steps + 1):
        V, _ = conjugate_step(current, "CZ", (last_anc, 2))
        c3 = max(abs(c) for c in V.part(3).coeffs.values())
        scale = c3 / ref
        Y, triples = psd_triple_decompose(V * (1.0 / scale))
        g = build_gadget(V * (1.0 / scale), Y, triples, delta, base=current, scale=scale)
        current = g.total
        gaps.append(_normalized_gap(current.to_dense())[0])
        last_anc = g.ancillas[-1][-1]
    return gaps

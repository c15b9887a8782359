"""Weighted Pauli-string sums and the positive-semidefinite triple rewrite.

Letter strings are written qubit 1 first: ``"ZI"`` is ``Z`` on qubit 1 and
the identity on qubit 2.  As a matrix that is ``np.kron(I, Z)`` because
qubit 1 is the least-significant bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .operators import ValidationError, as_operator, qubit_count

_LETTERS = "IXYZ"
_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def weight(letters: str) -> int:
    return sum(c != "I" for c in letters)


def support(letters: str) -> tuple[int, ...]:
    """1-based qubits on which the string acts non-trivially."""
    return tuple(i + 1 for i, c in enumerate(letters) if c != "I")


def _masks(letters: str) -> tuple[int, int, int]:
    xm = zm = ny = 0
    for i, c in enumerate(letters):
        if c in "XY":
            xm |= 1 << i
        if c in "ZY":
            zm |= 1 << i
        ny += c == "Y"
    return xm, zm, ny


def string_matrix(letters: str) -> np.ndarray:
    """Dense matrix of one Pauli string (qubit 1 = least-significant bit)."""
    n = len(letters)
    dim = 1 << n
    xm, zm, ny = _masks(letters)
    k = np.arange(dim)
    signs = np.array([(-1) ** bin(v & zm).count("1") for v in range(dim)]) if zm else np.ones(dim)
    m = np.zeros((dim, dim), dtype=complex)
    # Y = i X Z, so P|k> = i^ny (-1)^{popcount(k & zmask)} |k ^ xmask>
    m[k ^ xm, k] = (1j ** ny) * signs
    return m


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    letters: str

    @property
    def weight(self) -> int:
        return weight(self.letters)


@dataclass(frozen=True)
class PauliSum:
    """Hermitian operator as ``sum_P c_P P`` with real coefficients."""

    n: int
    coeffs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[str, float] = {}
        for letters, c in dict(self.coeffs).items():
            if len(letters) != self.n or any(ch not in _LETTERS for ch in letters):
                raise ValidationError(f"bad Pauli string {letters!r} for {self.n} qubits")
            c = float(np.real_if_close(c))
            if not math.isfinite(c):
                raise ValidationError(f"non-finite coefficient on {letters}")
            merged[letters] = merged.get(letters, 0.0) + c
        object.__setattr__(self, "coeffs", merged)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[float, str]]) -> "PauliSum":
        acc: dict[str, float] = {}
        for c, letters in terms:
            acc[letters] = acc.get(letters, 0.0) + float(c)
        return cls(n, acc)

    @classmethod
    def single(cls, n: int, letter: str, qubit: int, coeff: float = 1.0) -> "PauliSum":
        s = ["I"] * n
        s[qubit - 1] = letter
        return cls(n, {"".join(s): coeff})

    @property
    def terms(self) -> list[PauliTerm]:
        return [PauliTerm(c, s) for s, c in sorted(self.coeffs.items())]

    def pruned(self, tol: float = 1e-12) -> "PauliSum":
        return PauliSum(self.n, {s: c for s, c in self.coeffs.items() if abs(c) > tol})

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n != self.n:
            raise ValidationError("qubit counts differ")
        acc = dict(self.coeffs)
        for s, c in other.coeffs.items():
            acc[s] = acc.get(s, 0.0) + c
        return PauliSum(self.n, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, {s: scalar * c for s, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return -1.0 * self

    def embed(self, n_total: int, qubits: Iterable[int] | None = None) -> "PauliSum":
        """Place this sum on ``qubits`` (default ``1..n``) of a larger register."""
        qs = list(qubits) if qubits is not None else list(range(1, self.n + 1))
        acc = {}
        for s, c in self.coeffs.items():
            big = ["I"] * n_total
            for ch, q in zip(s, qs):
                big[q - 1] = ch
            acc["".join(big)] = c
        return PauliSum(n_total, acc)

    def locality(self, tol: float = 1e-12) -> int:
        return max((weight(s) for s, c in self.coeffs.items() if abs(c) > tol), default=0)

    def part(self, k: int, tol: float = 1e-12) -> "PauliSum":
        """Terms of weight exactly ``k``."""
        return PauliSum(self.n, {s: c for s, c in self.coeffs.items()
                                 if weight(s) == k and abs(c) > tol})

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n
        m = np.zeros((dim, dim), dtype=complex)
        k = np.arange(dim)
        for s, c in self.coeffs.items():
            if c == 0.0:
                continue
            xm, zm, ny = _masks(s)
            par = np.zeros(dim, dtype=np.int64)
            v = k & zm
            while np.any(v):
                par ^= v & 1
                v = v >> 1
            m[k ^ xm, k] += c * (1j ** ny) * (1 - 2 * par)
        return m

    def to_text(self) -> str:
        return "\n".join(f"{c!r} {s}" for s, c in sorted(self.coeffs.items()))

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        terms = []
        n = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"line {lineno}: expected '<coeff> <LETTERS>', got {raw!r}")
            try:
                c = float(parts[0].replace("−", "-"))
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad coefficient {parts[0]!r}") from exc
            letters = parts[1].upper()
            if n is None:
                n = len(letters)
            if len(letters) != n or any(ch not in _LETTERS for ch in letters):
                raise ValidationError(f"line {lineno}: bad Pauli string {parts[1]!r}")
            terms.append((c, letters))
        if n is None:
            raise ValidationError("empty Pauli sum")
        return cls.from_terms(n, terms)

    def to_json(self) -> dict:
        return {"n": self.n, "terms": [[s, c] for s, c in sorted(self.coeffs.items()) if c != 0.0]}

    @classmethod
    def from_json(cls, data: dict) -> "PauliSum":
        try:
            return cls.from_terms(int(data["n"]), [(float(c), str(s)) for s, c in data["terms"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed Pauli sum: {exc}") from exc

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}*{s}" for s, c in sorted(self.coeffs.items()) if c != 0.0)
        return f"PauliSum(n={self.n}: {body or '0'})"


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = a.copy()
    h = 1
    n = a.shape[-1]
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x, y = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


def pauli_decompose(op, *, tol: float = 1e-12, check_hermitian: bool = True) -> PauliSum:
    """Coefficients ``c_P = tr(P op) / 2^n`` for every Pauli string ``P``."""
    m = as_operator(op, hermitian=check_hermitian, herm_tol=1e-10)
    dim = m.shape[0]
    n = qubit_count(dim)
    k = np.arange(dim)
    # row x of d holds the x-shifted diagonal d[x, k] = M[k, k ^ x]
    d = m[k[None, :], k[None, :] ^ k[:, None]]
    w = _fwht(d)  # w[x, zz] = sum_k d[x, k] (-1)^{popcount(k & zz)}
    coeffs = {}
    for xm, zz in zip(*np.nonzero(np.abs(w) > tol * dim)):
        letters = []
        ny = 0
        for i in range(n):
            xb, zb = (xm >> i) & 1, (zz >> i) & 1
            if xb and zb:
                letters.append("Y")
                ny += 1
            else:
                letters.append("X" if xb else "Z" if zb else "I")
        c = w[xm, zz] * (1j ** ny) / dim
        if abs(c) > tol:
            coeffs["".join(letters)] = float(c.real)
    return PauliSum(n, coeffs)


def locality(h: PauliSum) -> int:
    return h.locality()


@dataclass(frozen=True)
class GadgetTriple:
    """``scale * B1 B2 B3`` with each ``B`` a rank-one projector ``(1 +/- sigma)/2``.

    ``qubits`` are the three (1-based) computational qubits, ``letters`` the
    Pauli letter on each and ``signs`` the +/-1 inside each projector.
    """

    qubits: tuple[int, int, int]
    letters: tuple[str, str, str]
    signs: tuple[int, int, int]
    scale: float

    def projector(self, i: int) -> np.ndarray:
        return 0.5 * (np.eye(2) + self.signs[i] * _SINGLE[self.letters[i]])

    def factors(self) -> list[np.ndarray]:
        """The ``B`` operators with the scale spread evenly (cube root on each)."""
        r = self.scale ** (1.0 / 3.0)
        return [r * self.projector(i) for i in range(3)]

    def factor_paulis(self, n: int) -> list[PauliSum]:
        """Each scaled ``B`` as a PauliSum on an ``n``-qubit register."""
        r = self.scale ** (1.0 / 3.0)
        out = []
        for q, ch, sg in zip(self.qubits, self.letters, self.signs):
            out.append(PauliSum(n, {"I" * n: r / 2}) + PauliSum.single(n, ch, q, sg * r / 2))
        return out

    def product_pauli(self, n: int) -> PauliSum:
        """``scale * B1 B2 B3`` (unit-cube-root factors) expanded into Pauli strings."""
        acc = {}
        for mask in itertools.product((0, 1), repeat=3):
            s = ["I"] * n
            c = self.scale / 8.0
            for on, q, ch, sg in zip(mask, self.qubits, self.letters, self.signs):
                if on:
                    s[q - 1] = ch
                    c *= sg
            key = "".join(s)
            acc[key] = acc.get(key, 0.0) + c
        return PauliSum(n, acc)


def psd_triple_decompose(v3: PauliSum) -> tuple[PauliSum, list[GadgetTriple]]:
    """Split ``v3`` into ``Y - 6 * sum_m scale_m B_m1 B_m2 B_m3`` with ``Y`` at most 2-local.

    A weight-3 term ``c * abc`` is rewritten with projectors: for ``c < 0``
    use ``(1+a)(1+b)(1+c)``, for ``c > 0`` use ``-(1-a)(1+b)(1+c)`` with the
    sign flip on the lowest-numbered qubit.  Lower-order pieces of the
    expansion go into ``Y``.
    """
    if v3.locality() != 3:
        raise ValidationError(f"expected a 3-local operator, got locality {v3.locality()}")
    n = v3.n
    triples = []
    Yrest = PauliSum(n, {s: c for s, c in v3.coeffs.items() if weight(s) < 3})
    for s, c in sorted(v3.part(3).coeffs.items()):
        qs = support(s)
        letters = tuple(s[q - 1] for q in qs)
        signs = (-1, 1, 1) if c > 0 else (1, 1, 1)
        # abc = sign * 8 * P1 P2 P3 + lower order; -6 * scale = 8 * c * sign
        scale = 8.0 * abs(c) / 6.0
        t = GadgetTriple(qs, letters, signs, scale)
        triples.append(t)
        # Y = v3 + 6 * scale * B1B2B3 restricted to the weight < 3 pieces
        prod = t.product_pauli(n)
        low = PauliSum(n, {k: 6.0 * v for k, v in prod.coeffs.items() if weight(k) < 3})
        Yrest = Yrest + low
    return Yrest.pruned(), triples


def triple_reconstruction(Y: PauliSum, triples: list[GadgetTriple]) -> PauliSum:
    """``Y - 6 * sum scale B1 B2 B3`` as a PauliSum."""
    out = Y
    for t in triples:
        out = out - 6.0 * t.product_pauli(Y.n)
    return out.pruned()


def local_strings(n: int, k: int, *, include_identity: bool = False) -> list[str]:
    """All Pauli strings on ``n`` qubits with weight between 1 and ``k``."""
    out = ["I" * n] if include_identity else []
    for w in range(1, min(k, n) + 1):
        for qs in itertools.combinations(range(n), w):
            for lets in itertools.product("XYZ", repeat=w):
                s = ["I"] * n
                for q, ch in zip(qs, lets):
                    s[q] = ch
                out.append("".join(s))
    return out


def random_local(n: int, k: int, rng: np.random.Generator, *, scale: float = 1.0) -> PauliSum:
    """Gaussian coefficients on every string of weight ``1..k``."""
    strings = local_strings(n, k)
    return PauliSum(n, dict(zip(strings, scale * rng.normal(size=len(strings)))))

"""Gates, circuits, a line-oriented circuit format and a state-vector simulator.

Circuit files hold one gate per line::

    # Bell pair
    QUBITS 2
    H 1
    CNOT 1 2          # control 1, target 2
    RZ 2 0.785398
    U 1 2             # custom two-qubit unitary, followed by 4 rows of
    1 0 0 0 0 0 0 0   # 8 numbers (re im re im ...)
    ...

Qubits are 1-based.  ``QUBITS`` is optional; without it the register is
as wide as the largest index used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import ValidationError, apply_gate, as_state, check_targets

_S2 = 1 / math.sqrt(2)

FIXED_GATES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    # local index bit 0 is the first listed qubit (the control)
    "CNOT": np.eye(4, dtype=complex)[:, [0, 3, 2, 1]],
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
ROTATIONS = {"RX", "RY", "RZ"}
ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "T": 1, "RX": 1, "RY": 1, "RZ": 1,
         "CNOT": 2, "CZ": 2}


def _rotation(kind: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    custom: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"{kind}: repeated qubit in {self.qubits}")
        if kind == "U":
            if self.custom is None:
                raise ValidationError("custom gate needs a matrix")
            m = np.asarray(self.custom, dtype=complex)
            d = 1 << len(self.qubits)
            if m.shape != (d, d):
                raise ValidationError(f"custom gate matrix must be {d}x{d}")
            if np.max(np.abs(m.conj().T @ m - np.eye(d))) > 1e-10:
                raise ValidationError("custom gate matrix is not unitary")
            object.__setattr__(self, "custom", m)
        elif kind in ARITY:
            if len(self.qubits) != ARITY[kind]:
                raise ValidationError(f"{kind} acts on {ARITY[kind]} qubit(s), got {len(self.qubits)}")
            if kind in ROTATIONS and len(self.params) != 1:
                raise ValidationError(f"{kind} needs one angle")
            if kind not in ROTATIONS and self.params:
                raise ValidationError(f"{kind} takes no angle")
        else:
            raise ValidationError(f"unknown gate {kind!r}")

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "U":
            return self.custom
        if self.kind in ROTATIONS:
            return _rotation(self.kind, self.params[0])
        return FIXED_GATES[self.kind]

    def to_text(self) -> str:
        head = " ".join([self.kind, *map(str, self.qubits), *(repr(float(p)) for p in self.params)])
        if self.kind != "U":
            return head
        rows = [" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row) for row in self.custom]
        return "\n".join([head, *rows])


def gate_matrix(kind: str, *params: float) -> np.ndarray:
    kind = kind.upper()
    return _rotation(kind, params[0]) if kind in ROTATIONS else FIXED_GATES[kind].copy()


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            check_targets(g.qubits, self.n)

    @property
    def depth(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        return "\n".join([f"QUBITS {self.n}", *(g.to_text() for g in self.gates)]) + "\n"

    def inverse(self) -> "Circuit":
        inv = [Gate("U", g.qubits, custom=g.matrix.conj().T) for g in reversed(self.gates)]
        return Circuit(self.n, inv)


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    lines = text.splitlines()
    gates: list[Gate] = []
    declared = None
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].split("#", 1)[0].strip()
        i += 1
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            if kind == "QUBITS":
                declared = int(parts[1])
                continue
            if kind == "U":
                qubits = tuple(int(p) for p in parts[1:])
                if not 1 <= len(qubits) <= 2:
                    raise ValidationError("custom gate acts on 1 or 2 qubits")
                d = 1 << len(qubits)
                rows = []
                while len(rows) < d:
                    if i >= len(lines):
                        raise ValidationError("custom gate matrix truncated")
                    row = lines[i].split("#", 1)[0].split()
                    i += 1
                    if not row:
                        continue
                    vals = [float(v) for v in row]
                    if len(vals) != 2 * d:
                        raise ValidationError(f"matrix row needs {2 * d} numbers, got {len(vals)}")
                    rows.append([complex(vals[2 * k], vals[2 * k + 1]) for k in range(d)])
                gates.append(Gate("U", qubits, custom=np.array(rows)))
                continue
            if kind not in ARITY:
                raise ValidationError(f"unknown gate {parts[0]!r}")
            k = ARITY[kind]
            if len(parts) < 1 + k:
                raise ValidationError(f"{kind} needs {k} qubit index(es)")
            qubits = tuple(int(p) for p in parts[1:1 + k])
            params = tuple(float(p) for p in parts[1 + k:])
            gates.append(Gate(kind, qubits, params))
        except (ValidationError, ValueError, IndexError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    width = n or declared or max((max(g.qubits) for g in gates), default=1)
    for g in gates:
        if max(g.qubits) > width or min(g.qubits) < 1:
            raise ValidationError(f"gate {g.kind} on {g.qubits} outside a {width}-qubit register")
    return Circuit(width, gates)


def load_circuit(path, n: int | None = None) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read(), n)


def apply_circuit(c: Circuit, psi) -> np.ndarray:
    """Run the circuit on a state vector: ``U_L ... U_1 |psi>``."""
    v = as_state(psi, tol=1e-10)
    if v.size != 1 << c.n:
        raise ValidationError(f"state of length {v.size} does not fit {c.n} qubits")
    for g in c.gates:
        v = apply_gate(g.matrix, g.qubits, v)
    return v


def circuit_unitary(c: Circuit) -> np.ndarray:
    u = np.eye(1 << c.n, dtype=complex)
    for g in c.gates:
        u = apply_gate(g.matrix, g.qubits, u)
    return u


def ghz_circuit(n: int) -> Circuit:
    """Hadamard on qubit 1 followed by the CNOT ladder 1->2->...->n."""
    gates = [Gate("H", (1,))] + [Gate("CNOT", (i, i + 1)) for i in range(1, n)]
    return Circuit(n, gates)


def random_circuit(n: int, depth: int, rng: np.random.Generator) -> Circuit:
    singles = ["H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ"]
    gates = []
    for _ in range(depth):
        if n >= 2 and rng.random() < 0.5:
            a, b = (int(q) + 1 for q in rng.choice(n, size=2, replace=False))
            gates.append(Gate(str(rng.choice(["CNOT", "CZ"])), (a, b)))
        else:
            kind = str(rng.choice(singles))
            q = int(rng.integers(1, n + 1))
            params = (float(rng.uniform(-math.pi, math.pi)),) if kind in ROTATIONS else ()
            gates.append(Gate(kind, (q,), params))
    return Circuit(n, gates)

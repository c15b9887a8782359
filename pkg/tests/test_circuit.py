import math

import numpy as np
import pytest

from circadia.circuit import (Circuit, Gate, apply_circuit, circuit_unitary, ghz_circuit,
                              parse_circuit, random_circuit)
from circadia.operators import ValidationError, basis_state, kron_lift


def test_parse_and_text_roundtrip():
    text = "# demo\nQUBITS 3\nH 1\nCNOT 1 2\nRZ 3 0.5\nU 2\n0 0 1 0\n1 0 0 0\n"
    c = parse_circuit(text)
    assert c.n == 3 and c.depth == 4
    again = parse_circuit(c.to_text())
    assert np.allclose(circuit_unitary(again), circuit_unitary(c))


@pytest.mark.parametrize("text,line", [("H 1\nFOO 2\n", 2), ("CNOT 1\n", 1), ("RX 1\n", 1),
                                        ("U 1\n1 0 0 0\n", 1)])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ValidationError, match=f"line {line}"):
        parse_circuit(text)


def test_out_of_range_qubit():
    with pytest.raises(ValidationError):
        parse_circuit("QUBITS 2\nH 3\n")


def test_ghz_circuit_prepares_ghz():
    out = apply_circuit(ghz_circuit(4), basis_state(0, 4))
    want = np.zeros(16)
    want[0] = want[15] = 1 / math.sqrt(2)
    assert np.allclose(out, want)


def test_cnot_control_is_first_listed_qubit():
    c = parse_circuit("CNOT 2 1\n")
    # |q2=1, q1=0> = index 2 goes to index 3
    assert np.allclose(apply_circuit(c, basis_state(2, 2)), basis_state(3, 2))


def test_inverse_circuit(rng):
    c = random_circuit(3, 6, rng)
    assert np.allclose(circuit_unitary(c.inverse()) @ circuit_unitary(c), np.eye(8))


def test_apply_matches_unitary(rng):
    c = random_circuit(4, 8, rng)
    psi = basis_state(5, 4)
    assert np.allclose(apply_circuit(c, psi), circuit_unitary(c) @ psi)

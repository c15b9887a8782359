import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from circadia.operators import (BranchAmbiguityError, ValidationError, X, Y, Z, apply_gate,
                                as_operator, as_state, eig_hermitian, kron_lift, partial_trace,
                                principal_log, random_hermitian, random_state, random_unitary,
                                reduced_state, unitary_exp, unitary_fidelity)

I2 = np.eye(2)
seeds = st.integers(0, 2**32 - 1)


def test_lift_puts_qubit_one_in_the_low_bit():
    assert np.allclose(kron_lift(Z, [1], 2), np.kron(I2, Z))
    assert np.allclose(kron_lift(X, [2], 3), np.kron(I2, np.kron(X, I2)))


def test_two_qubit_lift_matches_permuted_kron():
    cnot = np.eye(4)[:, [0, 3, 2, 1]]  # control on local bit 0
    # control qubit 3, target 1 on three qubits: flip bit 0 when bit 2 set
    want = np.zeros((8, 8))
    for i in range(8):
        j = i ^ 1 if i & 4 else i
        want[j, i] = 1
    assert np.allclose(kron_lift(cnot, [3, 1], 3), want)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_apply_gate_agrees_with_lift(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    a, b = (int(q) + 1 for q in rng.choice(n, 2, replace=False))
    g = random_unitary(4, rng)
    psi = random_state(1 << n, rng)
    assert np.allclose(apply_gate(g, [a, b], psi), kron_lift(g, [a, b], n) @ psi)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_principal_log_inverts_exp(seed):
    rng = np.random.default_rng(seed)
    U = random_unitary(4, rng)
    K = principal_log(U)
    assert np.allclose(unitary_exp(K), U, atol=1e-10)
    assert np.max(np.abs(np.linalg.eigvalsh(K))) <= math.pi + 1e-12
    assert np.allclose(K, -1j * sla.logm(U), atol=1e-8)


def test_cz_log_is_pi_projector():
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    K = principal_log(cz)
    assert np.allclose(K, np.diag([0, 0, 0, math.pi]))


def test_branch_cut_strict_raises():
    with pytest.raises(BranchAmbiguityError):
        principal_log(np.diag([1, -1]).astype(complex) * np.exp(1j * 1e-15), strict=True)


def test_validation():
    with pytest.raises(ValidationError):
        as_operator(np.ones((3, 3)))
    with pytest.raises(ValidationError):
        as_operator([[0, 1], [0, 0]], hermitian=True)
    with pytest.raises(ValidationError):
        as_operator([[1, 1], [0, 1]], unitary=True)
    with pytest.raises(ValidationError):
        as_state([1, 1])
    with pytest.raises(ValidationError):
        kron_lift(X, [3], 2)
    with pytest.raises(ValidationError):
        partial_trace(np.diag([1.0, 1.0, 0, 0]), [1])


def test_spectrum_report():
    rep = eig_hermitian(np.diag([3.0, -1.0, -1.0, 2.0]))
    assert rep.ground_energy == -1.0
    assert rep.ground_degeneracy() == 2
    assert rep.gap == 0.0
    assert np.allclose(rep.ground_projector(), np.diag([0, 1, 1, 0]))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_partial_trace_matches_explicit_sum(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(4, rng), random_state(2, rng)
    psi = np.kron(b, a)  # qubits 1-2 in a, qubit 3 in b
    rho = np.outer(psi, psi.conj())
    assert np.allclose(partial_trace(rho, [1, 2]), np.outer(a, a.conj()))
    assert np.allclose(partial_trace(rho, [3]), np.outer(b, b.conj()))
    assert np.allclose(reduced_state(psi, [1, 2]), partial_trace(rho, [1, 2]))


def test_unitary_fidelity_ignores_global_phase(rng):
    U = random_unitary(8, rng)
    assert unitary_fidelity(U, np.exp(0.7j) * U) == pytest.approx(1.0)
    H = random_hermitian(4, rng)
    assert np.allclose(unitary_exp(H, 0.3), sla.expm(0.3j * H))

import math

import numpy as np
import pytest
import scipy.linalg as sla

from circadia.circuit import parse_circuit
from circadia.direct_map import assemble_schedule
from circadia.evolution import (adiabatic_error, evolve, final_infidelity,
                                nonadiabatic_coupling_fd, propagate, runtime_bound)
from circadia.experiments import cz_segment_schedule, default_h0
from circadia.operators import ValidationError, random_hermitian, random_state
from circadia.pauli import PauliSum

H_EXAMPLE = PauliSum.from_text("1 ZZ\n-1 ZI\n1 IZ")


def test_propagate_constant_hamiltonian_is_exact(rng):
    H = random_hermitian(4, rng)
    psi = random_state(4, rng)
    out = propagate(lambda t: H, 2.0, 7, psi)
    assert np.allclose(out, sla.expm(-2j * H) @ psi)


def test_propagate_converges_second_order(rng):
    A, B = random_hermitian(2, rng), random_hermitian(2, rng)
    H = lambda t: A + math.sin(t) * B
    psi = random_state(2, rng)
    ref = propagate(H, 3.0, 4000, psi)
    e1 = np.linalg.norm(propagate(H, 3.0, 50, psi) - ref)
    e2 = np.linalg.norm(propagate(H, 3.0, 100, psi) - ref)
    assert 3.5 < e1 / e2 < 4.5


def test_cnot_schedule_adiabatic_at_large_T():
    sch = assemble_schedule(parse_circuit("CNOT 2 1\n"), H_EXAMPLE)
    res = evolve(sch, sch.ground_state(0), 200.0, 4000, check_doubling=False)
    assert res.final_fidelity >= 0.999
    assert res.to_csv().splitlines()[0] == "t,s,gap,fidelity"


def test_diabatic_limit_fails():
    sch = assemble_schedule(parse_circuit("CNOT 2 1\n"), H_EXAMPLE)
    assert evolve(sch, sch.ground_state(0), 0.1, 100).final_fidelity < 0.5


def test_constant_schedule_keeps_fidelity_one():
    sch = assemble_schedule(parse_circuit("QUBITS 2\n"), default_h0(2))
    res = evolve(sch, sch.ground_state(0), 5.0, 100)
    assert all(f == pytest.approx(1.0) for _, f in res.fidelity_trace)


def test_step_doubling_guard():
    sch = assemble_schedule(parse_circuit("H 1\n"), default_h0(1))
    with pytest.raises(ValidationError, match="step doubling"):
        evolve(sch, sch.ground_state(0), 50.0, 100, check_doubling=True, doubling_tol=1e-12)
    with pytest.raises(ValidationError):
        evolve(sch, sch.ground_state(0), 1.0, 10)


def test_cz_alpha_is_pi_over_T():
    est = adiabatic_error(cz_segment_schedule(), 1, 400.0)
    assert est.alpha_bound * 400 == pytest.approx(math.pi, abs=1e-12)
    assert est.max_amplitude <= math.pi


def test_amplitudes_match_finite_difference_oracle():
    sch = cz_segment_schedule()
    est = adiabatic_error(sch, 1)
    fd = nonadiabatic_coupling_fd(sch, 1, 0.0)
    # d/ds|0(s)> at s = 0 is iK|0>, so the projected norms agree
    assert np.allclose([a for _, a in est.per_level_amplitudes], fd, atol=1e-6)


def test_infidelity_drops_with_T():
    sch = cz_segment_schedule()
    psi0 = sch.ground_state(0)
    assert final_infidelity(sch, psi0, 400.0) < final_infidelity(sch, psi0, 40.0)


def test_runtime_bound():
    per, gap, T = runtime_bound(10, 0.1)
    assert per == pytest.approx(1e-3)
    assert T == pytest.approx(1e18)
    with pytest.raises(ValidationError):
        runtime_bound(3, 0.0)

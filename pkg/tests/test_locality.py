import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circadia import locality as loc
from circadia.operators import ValidationError, density, random_unitary
from circadia.pauli import PauliSum, local_strings, string_matrix


def test_ground_state_saturates_with_zero():
    H = np.diag([0.0, 1.0, 3.0, 5.0])
    g = np.eye(4)[0]
    r = loc.theorem1_check(loc.Theorem1Instance(H, g, density(g)))
    assert r.lhs == 0 and r.rhs == 0 and r.holds and r.F == pytest.approx(1.0)


def test_orthogonal_state_gives_full_range():
    H = np.diag([0.0, 1.0, 3.0, 5.0])
    psi = np.eye(4)[3]
    r = loc.theorem1_check(loc.Theorem1Instance(H, psi, density(psi)))
    assert r.F == 0 and r.rhs == pytest.approx(5.0) and r.holds


def test_mismatched_expectation_rejected():
    H = np.diag([0.0, 1.0])
    with pytest.raises(ValidationError):
        loc.Theorem1Instance(H, np.eye(2)[0], density(np.eye(2)[1]))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bound_never_violated(seed):
    rng = np.random.default_rng(seed)
    inst = loc.random_theorem1_instance(int(rng.integers(1, 5)), rng)
    assert abs(np.trace(inst.rho @ inst.H).real - np.vdot(inst.psi, inst.H @ inst.psi).real) < 1e-8
    assert loc.theorem1_check(inst).holds


def test_ghz_marginals_match_mixture():
    from circadia.operators import partial_trace
    for pair in [(1, 2), (1, 3), (2, 3)]:
        assert np.allclose(partial_trace(density(loc.ghz_state(3)), pair),
                           partial_trace(loc.ghz_mixture(3), pair))


def test_ghz_ground_instances_have_partner(rng):
    for H in loc.ghz_ground_instances(3, 2, 10, rng):
        rep = loc.ghz_witness(H)
        assert rep.is_ground and rep.forced
        assert rep.degeneracy >= 2 and rep.partner_residual <= 1e-8
        assert rep.expectation_gap <= 1e-10


def test_eigen_only_family_puts_ghz_above_ground(rng):
    # constraining only GHZ+ leaves it an excited, non-degenerate level
    reports = [loc.ghz_witness(H) for H in loc.ghz_eigen_instances(3, 2, 20, rng)]
    assert all(r.is_eigenstate and not r.is_ground for r in reports)


def test_eigen_family_is_exact(rng):
    basis = loc.ghz_eigen_family(3, 2)
    g = loc.ghz_state(3)
    c = basis.T @ rng.normal(size=basis.shape[0])
    M = sum(w * string_matrix(s) for w, s in zip(c, local_strings(3, 2)))
    e = np.vdot(g, M @ g)
    assert np.linalg.norm(M @ g - e * g) < 1e-10


def test_witness_rejects_full_locality():
    with pytest.raises(ValidationError):
        loc.ghz_witness(PauliSum.from_text("1 ZZZ"))


def test_non_eigenstate_report():
    rep = loc.ghz_witness(PauliSum.from_text("1 XII\n1 IZZ"))
    assert not rep.is_eigenstate and not rep.forced


def test_ancilla_witness():
    ok = loc.ancilla_witness(PauliSum.from_text("-1 ZZII\n-1 IZZI\n-1 IIIZ"), 3)
    assert ok.status == "ok" and ok.m == 1 and ok.ground_degeneracy == 2 and ok.forced_degeneracy == 2
    assert ok.expectation_gap < 1e-10
    # qubit 3 is locked into a Bell pair with the ancilla, so GHZ cannot factor out
    bad = loc.ancilla_witness(PauliSum.from_text("-1 IIXX\n-1 IIZZ"), 3)
    assert bad.status == "inapplicable"


@pytest.mark.parametrize("n", [2, 3, 4])
def test_conjugated_spectrum_counts(n, rng):
    got = loc.conjugated_spectrum_numeric(n, random_unitary(1 << n, rng))
    want = loc.conjugated_spectrum(n)
    assert [m for _, m in got] == [m for _, m in want]
    assert np.allclose([e for e, _ in got], [e for e, _ in want])
    assert sum(m for _, m in loc.conjugated_spectrum(n)) == 1 << n


def test_lowest_average():
    assert loc.lowest_average(3, 1) == 0
    assert loc.lowest_average(3, 4) == pytest.approx(0.25)


@pytest.mark.parametrize("n", [3, 6])
def test_tensor_ghz_bound(n):
    r = loc.tensor_ghz_bound(n, 0.05)
    assert r.rank == 2 ** (n // 3)
    assert r.marginal_deviation < 1e-12
    assert 1 - r.F**2 == pytest.approx(0.05, abs=1e-9)
    assert r.lhs <= r.rhs + 1e-9
    assert r.avg_gap <= r.avg_gap_bound + 1e-9

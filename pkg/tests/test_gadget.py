import numpy as np
import pytest

from circadia import gadget as gd
from circadia.operators import ValidationError
from circadia.pauli import PauliSum, psd_triple_decompose


@pytest.fixture(scope="module")
def step():
    return gd.cz_step_target()


def test_cz_step_is_three_local(step):
    H_prev, V, H_next = step
    assert V.locality() == 3
    assert set(V.part(3).coeffs) == {"XZX"}
    assert H_prev.locality() == 2


def test_penalty_spectrum():
    d = 0.2
    diag = np.real(np.diag(gd.penalty(3, (1, 2, 3), d).to_dense()))
    assert diag[0] == pytest.approx(0) and diag[7] == pytest.approx(0)
    assert np.allclose(diag[1:7], d ** -3)


def test_gadget_layout_and_locality(step):
    _, V, _ = step
    g = gd.gadgetize(V, 0.1)
    assert g.n_total == 6 and g.ancillas == [(4, 5, 6)]
    assert g.total.locality() == 2
    assert g.low_indices().size == 2 ** 3 * 2


def test_bad_reconstruction_rejected(step):
    _, V, _ = step
    Y, triples = psd_triple_decompose(V)
    with pytest.raises(ValidationError):
        gd.build_gadget(V, Y + PauliSum.from_text("1 ZII"), triples, 0.1)
    with pytest.raises(ValidationError):
        gd.build_gadget(V, Y, triples, 1.5)


@pytest.mark.parametrize("z", [-0.3, 0.0, 0.4])
def test_schur_matches_resolvent(step, z):
    _, V, _ = step
    g = gd.gadgetize(V, 0.2, base=step[0])
    a = gd.self_energy_exact(g, z, method="schur").sigma_minus
    b = gd.self_energy_exact(g, z, method="resolvent").sigma_minus
    assert np.allclose(a, b, atol=1e-8)


def test_self_energy_deviation_shrinks(step):
    H_prev, V, _ = step
    devs = [gd.self_energy_window(gd.gadgetize(V, d, base=H_prev)) for d in (0.2, 0.1, 0.05)]
    assert devs[0] > devs[1] > devs[2]


def test_fourth_order_series_error(step):
    H_prev, V, _ = step
    g = gd.gadgetize(V, 0.1, base=H_prev)
    vnorm, gap = gd.perturbation_ratio(g)
    exact = gd.self_energy_exact(g, 0.0).sigma_minus
    err = np.linalg.norm(exact - gd.self_energy_series(g, 0.0, 4), 2)
    assert err <= vnorm ** 4 / gap ** 3


def test_third_order_term_is_linear_in_delta(step):
    _, V, _ = step
    errs = [gd.third_order_structure(gd.gadgetize(V, d)) / d for d in (0.2, 0.1, 0.05)]
    assert max(errs) / min(errs) < 1.5


def test_lower_spectrum_and_ancilla_state(step):
    H_prev, V, H_next = step
    cmp = gd.compare_lower_spectra(H_next, gd.gadgetize(V, 0.05, base=H_prev))
    assert cmp.deviation <= 0.002 * 0.05
    assert cmp.ground_fidelity > 0.999
    assert cmp.ancilla_fidelity[0] >= 0.99


def test_repeated_gadget_gap_shrinks():
    gaps = gd.repeated_gadget_gap(2, 0.3)
    assert gaps[0] > gaps[1] > gaps[2] > 0
    one = [gd.repeated_gadget_gap(1, d)[1] / d ** 3 for d in (0.3, 0.2, 0.1)]
    assert max(one) / min(one) < 1.2

from __future__ import annotations


import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlczsim.bogoliubov import beam_splitter, lossy_channel, one_mode_squeeze, phase_shift, two_mode_squeeze
from dlczsim.fockstate import (
    Detection,
    FockDensityMatrix,
    FockStateError,
    TruncationLeakError,
    bell_state,
    fock_state,
    oracle_apply,
    partial_trace,
    photon_number_distribution,
    pure_state,
    random_density_matrix,
    tensor,
    truncated_hamiltonian,
    two_mode_squeezed_populations,
    vacuum,
)


def test_fock_state_projector():
    rho = fock_state((1, 0), 2)
    assert rho.trace() == 1.0
    assert rho.element((1, 0), (1, 0)) == 1.0
    assert rho.dim == 9


def test_bell_state_coherence():
    rho = bell_state(2)
    assert rho.element((0, 1), (1, 0)) == pytest.approx(0.5)
    assert rho.populations()[0, 1] == pytest.approx(0.5)


def test_shape_mismatch_rejected():
    with pytest.raises(FockStateError, match="expected a 9x9"):
        FockDensityMatrix(np.eye(4), 2, 2)


def test_small_hermiticity_error_is_repaired():
    rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
    rho[0, 1] = 1e-12
    out = FockDensityMatrix(rho, 1, 2)
    assert out.elements[0, 1] == out.elements[1, 0].conjugate()


def test_large_hermiticity_error_rejected():
    rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
    rho[0, 1] = 0.1
    with pytest.raises(FockStateError, match="Hermitian"):
        FockDensityMatrix(rho, 1, 2)


def test_negative_population_rejected_and_tiny_ones_clipped():
    with pytest.raises(FockStateError, match="negative"):
        FockDensityMatrix(np.diag([1.1, -0.1, 0.0]), 1, 2)
    out = FockDensityMatrix(np.diag([1.0, -1e-12, 0.0]), 1, 2)
    assert out.populations().min() == 0.0


def test_trace_checks():
    with pytest.raises(FockStateError, match="trace"):
        FockDensityMatrix(np.diag([0.5, 0.0, 0.0]), 1, 2)
    weighted = FockDensityMatrix(np.diag([0.5, 0.0, 0.0]), 1, 2, normalized=False)
    assert weighted.normalize().trace() == pytest.approx(1.0)
    with pytest.raises(FockStateError, match="zero trace"):
        FockDensityMatrix(np.zeros((3, 3)), 1, 2, normalized=False).normalize()


def test_elements_are_read_only():
    rho = vacuum(1)
    with pytest.raises(ValueError):
        rho.elements[0, 0] = 2


@given(st.integers(0, 10_000))
def test_partial_trace_of_product(seed):
    rng = np.random.default_rng(seed)
    a = random_density_matrix(1, 2, rng)
    b = random_density_matrix(2, 2, rng)
    ab = tensor(a, b)
    np.testing.assert_allclose(partial_trace(ab, [1, 2]).elements, a.elements, atol=1e-14)
    np.testing.assert_allclose(partial_trace(ab, [0]).elements, b.elements, atol=1e-14)


def test_partial_trace_rejects_everything():
    with pytest.raises(ValueError, match="scalar"):
        partial_trace(bell_state(), [0, 1])
    with pytest.raises(ValueError, match="out of range"):
        partial_trace(bell_state(), [2])


def test_tensor_needs_common_cutoff():
    with pytest.raises(FockStateError, match="cutoff"):
        tensor(vacuum(1, 2), vacuum(1, 3))


def test_with_cutoff_round_trip():
    rho = bell_state(1)
    up = rho.with_cutoff(3)
    assert up.trace() == pytest.approx(1.0)
    np.testing.assert_allclose(up.with_cutoff(1).elements, rho.elements)


def test_pure_state_normalizes():
    rho = pure_state({(0,): 1.0, (2,): 1.0j}, 2)
    assert rho.element((0,), (2,)) == pytest.approx(-0.5j)


def test_csv_rows_have_seventeen_digits():
    rows = bell_state(1).to_csv_rows()
    assert len(rows) == 4 and len(rows[0]) == 8
    assert rows[1][2] == "5.0000000000000011e-01" or float(rows[1][2]) == pytest.approx(0.5)
    assert all("e" in cell for cell in rows[0])


def test_photon_number_distribution():
    dist = photon_number_distribution(bell_state(2))
    np.testing.assert_allclose(dist[:2], [0.0, 1.0], atol=1e-15)


def test_truncated_hamiltonian_is_hermitian():
    A = np.array([[0.3, 0.1j], [-0.1j, -0.2]])
    G = np.array([[0.1, 0.05j], [0.05j, 0.0]])
    H = truncated_hamiltonian(A, G, 4).toarray()
    np.testing.assert_allclose(H, H.conj().T, atol=1e-14)


# oracle behaviour on textbook cases


@given(st.floats(0.0, 1.0))
def test_oracle_beam_splitter_splits_single_photon(T):
    out = oracle_apply([beam_splitter((0, 1), T)], {}, fock_state((1, 0), 2), 6)
    pops = out.populations()
    assert pops[1, 0] == pytest.approx(T, abs=1e-12)
    assert pops[0, 1] == pytest.approx(1 - T, abs=1e-12)


def test_oracle_hong_ou_mandel_dip():
    out = oracle_apply([beam_splitter((0, 1), 0.5)], {}, fock_state((1, 1), 2), 6)
    assert out.populations()[1, 1] == pytest.approx(0.0, abs=1e-14)
    assert out.populations()[2, 0] == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=10)
@given(st.floats(0.0, 0.4))
def test_oracle_down_converter_statistics(r):
    out = oracle_apply([two_mode_squeeze((0, 1), r)], {}, vacuum(2, 2), 20, leak_tol=1e-10)
    diag = [out.populations()[k, k] for k in range(3)]
    np.testing.assert_allclose(diag, two_mode_squeezed_populations(r, 2), atol=1e-12)


def test_oracle_loss_and_projectors():
    rho = fock_state((1,), 2)
    circuit = [lossy_channel(0.3, 0, 1)]
    dark = oracle_apply(circuit, {1: Detection.DARK}, rho, 6, mode_count=2, input_modes=[0], outputs=[0])
    click = oracle_apply(circuit, {1: Detection.COUNTING}, rho, 6, mode_count=2, input_modes=[0], outputs=[0])
    assert dark.trace() == pytest.approx(0.7)
    assert click.trace() == pytest.approx(0.3)
    assert not dark.normalized


def test_oracle_phase_shift_rotates_coherence():
    rho = pure_state({(0,): 1.0, (1,): 1.0}, 2)
    out = oracle_apply([phase_shift(0, 0.7)], {}, rho, 6)
    assert np.angle(out.elements[1, 0]) == pytest.approx(0.7)


def test_oracle_reports_truncation_leak():
    with pytest.raises(TruncationLeakError) as info:
        oracle_apply([one_mode_squeeze(0, 1.5)], {}, vacuum(1, 2), 4)
    assert info.value.leak > 1e-6

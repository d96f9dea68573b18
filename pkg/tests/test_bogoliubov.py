from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlczsim.bogoliubov import (
    BogoliubovError,
    BogoliubovMap,
    ReducedMemory,
    augment_dark_counts,
    beam_splitter,
    circuit_map,
    complete_row,
    compose,
    dark_count_noise,
    general_element,
    hamiltonian_of,
    lossy_channel,
    memory_element,
    one_mode_squeeze,
    phase_shift,
    reduce_memory,
    two_mode_squeeze,
)
from dlczsim.fockstate import oracle_apply, random_density_matrix
from dlczsim.genfun import transfer_tensor

angles = st.floats(0, 2 * math.pi)
squeeze = st.floats(-0.5, 0.5)
transmission = st.floats(0.01, 0.99)


def random_map(seed: int, n: int = 3) -> BogoliubovMap:
    rng = np.random.default_rng(seed)
    elements = []
    for _ in range(5):
        a, b = rng.choice(n, size=2, replace=False)
        elements.append(beam_splitter((a, b), rng.uniform(0.1, 0.9), rng.uniform(0, 6)))
        elements.append(one_mode_squeeze(a, rng.uniform(-0.3, 0.3)))
        elements.append(two_mode_squeeze((a, b), rng.uniform(-0.3, 0.3)))
    return circuit_map(elements, n)


def test_identity_is_unitary_and_passive():
    m = BogoliubovMap.identity(3)
    assert m.residuals() == (0.0, 0.0)
    assert m.is_passive()


def test_non_unitary_map_rejected():
    with pytest.raises(BogoliubovError, match="not unitary"):
        BogoliubovMap([[1.1]], [[0.0]])
    with pytest.raises(BogoliubovError):
        BogoliubovMap(np.eye(2), np.zeros((3, 3)))


def test_beam_splitter_matrix():
    m = beam_splitter((0, 1), 0.25, 0.0).local_map()
    np.testing.assert_allclose(m.B, [[0.5, math.sqrt(0.75)], [-math.sqrt(0.75), 0.5]])
    assert m.is_passive()


def test_squeezer_matrix():
    m = one_mode_squeeze(0, 0.3).local_map()
    assert m.B[0, 0] == pytest.approx(math.cosh(0.3))
    assert m.C[0, 0] == pytest.approx(math.sinh(0.3))


@given(st.integers(0, 10_000))
def test_composition_stays_unitary(seed):
    norm, sym = random_map(seed).residuals()
    assert norm < 1e-12 and sym < 1e-12


@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_composition_is_associative(s1, s2, s3):
    a, b, c = random_map(s1), random_map(s2), random_map(s3)
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    np.testing.assert_allclose(left.B, right.B, atol=1e-12)
    np.testing.assert_allclose(left.C, right.C, atol=1e-12)


@given(st.integers(0, 10_000))
def test_inverse_composes_to_identity(seed):
    m = random_map(seed)
    eye = compose(m, m.inverse())
    np.testing.assert_allclose(eye.B, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(eye.C, 0, atol=1e-12)


@given(transmission, angles, squeeze)
def test_element_generator_reproduces_map(T, phi, r):
    for el in (beam_splitter((0, 1), T, phi), one_mode_squeeze(0, r), two_mode_squeeze((0, 1), r), phase_shift(0, phi / 2)):
        A, G = el.generator()
        n = A.shape[0]
        # d/dt (a, a^dag) = -i [ (a, a^dag), H ] gives the symplectic generator
        M = -1j * np.block([[A, G], [-G.conj(), -A.conj()]])
        import scipy.linalg

        S = scipy.linalg.expm(M)
        np.testing.assert_allclose(S[:n, :n], el.local_map().B, atol=1e-12)
        np.testing.assert_allclose(S[:n, n:], el.local_map().C, atol=1e-12)


@given(st.integers(0, 10_000))
def test_hamiltonian_round_trip(seed):
    m = random_map(seed, 2)
    el = general_element(m, (0, 1))
    A, G = el.generator()
    np.testing.assert_allclose(A, A.conj().T, atol=1e-12)
    np.testing.assert_allclose(G, G.T, atol=1e-12)
    rebuilt = hamiltonian_of(m)
    np.testing.assert_allclose(rebuilt[0], A, atol=1e-12)


def test_circuit_map_validates_modes():
    with pytest.raises(ValueError, match="outside"):
        circuit_map([beam_splitter((0, 3))], 2)
    with pytest.raises(ValueError, match="repeats"):
        circuit_map([beam_splitter((1, 1))], 2)


def test_lossy_channel_transmits_amplitude():
    m = lossy_channel(0.36, 0, 1).local_map()
    assert abs(m.B[0, 0]) == pytest.approx(0.8)


# reduced memories


def test_reduced_memory_validation():
    ReducedMemory(1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(BogoliubovError):
        ReducedMemory(1.0, 0.5, 0.0, 0.0, 0.0)


def test_reduced_memory_config_round_trip():
    mem = ReducedMemory(math.sqrt(1.0 + 0.04 + 0.01 - 0.25), 0.5, 0.2, 0.1, 0.0)
    cfg = {"b1": repr(mem.b1), "b2": repr(mem.b2), "c1": repr(mem.c1), "c2": repr(complex(mem.c2)), "c3": repr(mem.c3)}
    assert ReducedMemory.from_config(cfg) == mem
    with pytest.raises(BogoliubovError, match="missing"):
        ReducedMemory.from_config({"b2": "0"})


@st.composite
def memory_rows(draw):
    k = draw(st.integers(1, 3))
    vals = [complex(draw(st.floats(-0.4, 0.4)), draw(st.floats(-0.4, 0.4))) for _ in range(2 * k + 1)]
    c1 = vals[0]
    b_aux = np.array(vals[1 : k + 1])
    c_aux = np.array(vals[k + 1 :])
    b1_sq = 1 + abs(c1) ** 2 + np.sum(np.abs(c_aux) ** 2) - np.sum(np.abs(b_aux) ** 2)
    phase = draw(angles)
    return complex(math.sqrt(b1_sq) * np.exp(1j * phase)), c1, b_aux, c_aux


@given(memory_rows())
def test_reduce_memory_preserves_normalization(row):
    b1, c1, b_aux, c_aux = row
    mem = reduce_memory(b1, c1, b_aux, c_aux)
    assert mem.norm() == pytest.approx(1.0, abs=1e-12)
    assert abs(mem.b1) == pytest.approx(abs(b1), abs=1e-12)
    assert abs(mem.c1) == pytest.approx(abs(c1), abs=1e-12)
    assert mem.b2 == pytest.approx(np.linalg.norm(b_aux), abs=1e-12)


@given(memory_rows())
def test_reduced_memory_acts_like_full_map(row):
    """The retrieved mode is the same state whether the memory is described fully or reduced."""
    b1, c1, b_aux, c_aux = row
    k = len(b_aux)
    full = complete_row(np.concatenate([[b1], b_aux]), np.concatenate([[c1], c_aux]))
    reduced = reduce_memory(b1, c1, b_aux, c_aux)
    rho = random_density_matrix(1, 2, np.random.default_rng(k))
    T_full = transfer_tensor([general_element(full, range(k + 1))], {}, [0], [0], 2, mode_count=k + 1)
    T_red = transfer_tensor([memory_element(reduced, 0, (1, 2))], {}, [0], [0], 2, mode_count=3)
    a = np.einsum("abij,ij->ab", T_full.M, rho.elements)
    b = np.einsum("abij,ij->ab", T_red.M, rho.elements)
    # the reduction discards a phase on the retrieved mode: rho_jk -> rho_jk e^{i chi (j - k)}
    np.testing.assert_allclose(np.diag(a), np.diag(b), atol=1e-10)
    chi = np.angle(b[1, 0]) - np.angle(a[1, 0]) if abs(a[1, 0]) > 1e-6 else 0.0
    idx = np.arange(3)
    rotated = a * np.exp(1j * chi * (idx[:, None] - idx[None, :]))
    np.testing.assert_allclose(rotated, b, atol=1e-9)


def test_reduced_memory_of_real_row_needs_no_phase():
    b_aux, c_aux = np.array([0.3, 0.1j]), np.array([0.05, 0.2])
    c1 = 0.1
    b1 = -math.sqrt(1 + c1**2 + np.sum(np.abs(c_aux) ** 2) - np.sum(np.abs(b_aux) ** 2))
    full = complete_row(np.concatenate([[b1], b_aux]), np.concatenate([[c1], c_aux]))
    mem = reduce_memory(b1, c1, b_aux, c_aux)
    assert mem.b1 < 0 and mem.input_phase == 0.0
    rho = random_density_matrix(1, 2, np.random.default_rng(3))
    T_full = transfer_tensor([general_element(full, range(3))], {}, [0], [0], 2, mode_count=3)
    T_red = transfer_tensor([memory_element(mem, 0, (1, 2))], {}, [0], [0], 2, mode_count=3)
    np.testing.assert_allclose(
        np.einsum("abij,ij->ab", T_full.M, rho.elements), np.einsum("abij,ij->ab", T_red.M, rho.elements), atol=1e-10
    )


def test_complex_c2_memory_matches_oracle():
    mem = ReducedMemory(math.sqrt(1 - 0.09 + 0.04 + 0.02), 0.3, 0.2, 0.1 + 0.1j, 0.0)
    rho = random_density_matrix(1, 2, np.random.default_rng(5))
    el = [memory_element(mem, 0, (1, 2))]
    T = transfer_tensor(el, {}, [0], [0], 2, mode_count=3)
    gf = np.einsum("abij,ij->ab", T.M, rho.elements)
    oracle = oracle_apply(el, {}, rho, 24, mode_count=3, input_modes=[0], outputs=[0], out_cutoff=2, leak_tol=1e-12)
    np.testing.assert_allclose(gf, oracle.elements, atol=1e-10)


def test_complete_row_keeps_first_row():
    b = np.array([1.1, 0.3j, 0.2])
    c = np.array([0.4, 0.0, 0.1 - 0.2j])
    b[0] = math.sqrt(1 + np.sum(np.abs(c) ** 2) - np.sum(np.abs(b[1:]) ** 2))
    m = complete_row(b, c)
    np.testing.assert_allclose(m.B[0], b, atol=1e-14)
    np.testing.assert_allclose(m.C[0], c, atol=1e-14)
    assert max(m.residuals()) < 1e-12


def test_dark_count_augmentation_of_ideal_memory():
    mem = augment_dark_counts(ReducedMemory(1, 0, 0, 0, 0), 1e-4)
    assert mem.coefficients == pytest.approx((1.0, 1e-2, 0.0, 0.0, 1e-2))
    assert mem.norm() == pytest.approx(1.0)


@given(st.floats(0, 0.5), st.floats(0, 1e-2))
def test_dark_count_augmentation_adds_in_quadrature(b2, n_dc):
    b1 = math.sqrt(1 + 0.0 - b2**2 + 0.01)
    mem = ReducedMemory(b1, b2, 0.0, 0.0, 0.1)
    aug = augment_dark_counts(mem, n_dc)
    assert aug.b2 == pytest.approx(math.sqrt(b2**2 + n_dc))
    assert aug.c3 == pytest.approx(math.sqrt(0.01 + n_dc))
    assert aug.norm() == pytest.approx(1.0)


def test_dark_count_noise_has_thermal_mean():
    T = transfer_tensor([dark_count_noise(0.01, 0, (1, 2))], {}, [0], [0], 2, mode_count=3)
    vac = np.zeros((3, 3))
    vac[0, 0] = 1
    out = np.einsum("abij,ij->ab", T.M, vac)
    mean = float(np.real(out[1, 1] + 2 * out[2, 2]))
    assert mean == pytest.approx(0.01, rel=1e-3)

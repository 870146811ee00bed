from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspins.dynmap import evolve, map_coefficients
from centralspins.model import DomainError, ModelParams, SectorCoefficients
from centralspins.oracle import (
    SmallBathModel,
    full_hp_deviation,
    full_propagator,
    projected_propagator,
    sector_expm,
)
from centralspins.states import basis_state, bell_state, named_state, random_density_matrix


def test_sector_expm_trivial():
    co = SectorCoefficients(0.3, -1.0, 2.0, 1.0, 0.5, 0.2, 0.1)
    np.testing.assert_allclose(sector_expm(co, 0.0).asarray(), [1, 0, 0], atol=1e-15)
    diag = SectorCoefficients(0.7, 1.0, 2.0, 0, 0, 0, 0)
    np.testing.assert_allclose(sector_expm(diag, 1.5).asarray(), [np.exp(-0.7j * 1.5), 0, 0], atol=1e-14)


def test_size_guard(small_params):
    with pytest.raises(DomainError):
        SmallBathModel(replace(small_params, M=9, N=8))
    SmallBathModel(replace(small_params, M=8, N=8))


def test_hamiltonian_is_hermitian(small_params):
    H = SmallBathModel(small_params).H
    assert np.max(np.abs(H - H.conj().T)) == 0.0


def test_projected_identity_at_zero(small_params):
    rho0 = random_density_matrix(np.random.default_rng(0))
    np.testing.assert_allclose(projected_propagator(small_params, rho0, 0.0), rho0, atol=1e-14)


def test_projected_blocks_are_unitary(small_params):
    m = SmallBathModel(small_params)
    V = m.columns(2.3, projected=True)
    np.testing.assert_allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-12)
    for seed in (0, 17, 60, 99):
        assert len(m.closure(seed)) <= 3


def test_uncoupled_populations_constant(small_params):
    p = replace(small_params, eps1=0.0, eps2=0.0)
    rho0 = random_density_matrix(np.random.default_rng(1))
    for t in (0.4, 2.0):
        np.testing.assert_allclose(np.diag(projected_propagator(p, rho0, t)).real, np.diag(rho0).real, atol=1e-13)


@pytest.mark.parametrize("state", ["11", "10", "01", "00", "bell", "mixed"])
def test_map_matches_projected_propagator(small_params, state):
    m = SmallBathModel(small_params)
    rho0 = named_state(state)
    for t in np.linspace(0, 5, 8):
        np.testing.assert_allclose(evolve(map_coefficients(small_params, t), rho0), m.evolve(rho0, t), atol=1e-10)


@settings(max_examples=20)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(0, 6), st.integers(0, 2**32 - 1))
def test_diagonal_inputs_match_for_any_bath_size(M, N, t, seed):
    p = ModelParams(2.0, 1.9, 2.5, 1.1, 1.2, 2.6, 2.5, M, N, 1.0)
    w = np.random.default_rng(seed).dirichlet(np.ones(4))
    rho0 = np.diag(w).astype(complex)
    np.testing.assert_allclose(evolve(map_coefficients(p, t), rho0), projected_propagator(p, rho0, t), atol=1e-10)


def test_cross_sector_coherence_transfer_not_in_map(small_params):
    """The map drops four coherence-to-coherence channels that the exact trace keeps.

    A coherence between seeds that differ by one flip (e.g. rho_12) leaks into
    the coherence between their partners (rho_34) through bath overlaps.  The
    map reproduces everything else, and none of the leak reaches populations.
    """
    rho0 = random_density_matrix(np.random.default_rng(5))
    t = 1.3
    diff = np.abs(evolve(map_coefficients(small_params, t), rho0) - SmallBathModel(small_params).evolve(rho0, t))
    leak = np.zeros((4, 4), dtype=bool)
    for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
        leak[i, j] = leak[j, i] = True
    assert diff[~leak].max() < 1e-12
    assert diff[leak].min() > 1e-4


def test_full_equals_projected_without_coupling(small_params):
    p = replace(small_params, eps1=0.0, eps2=0.0)
    assert full_hp_deviation(p, bell_state(), np.linspace(0, 5, 6)).max_abs_deviation < 1e-13


def test_full_deviation_small_when_perturbative(small_params):
    # regression number: measured 1.6e-7 at these settings
    p = replace(small_params, delta=10.0, eps1=0.05, eps2=0.05)
    rep = full_hp_deviation(p, basis_state("11"), np.linspace(0, 5, 11))
    assert rep.max_abs_deviation < 1e-2
    assert rep.max_abs_deviation < 1e-6


def test_full_deviation_reported_at_figure_couplings(small_params):
    rep = full_hp_deviation(small_params, basis_state("11"), np.linspace(0, 5, 11))
    assert rep.max_abs_deviation > 0.0
    assert rep.location.startswith("rho[")


def test_full_propagator_is_physical(small_params):
    rho = full_propagator(small_params, bell_state(), 2.0)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12

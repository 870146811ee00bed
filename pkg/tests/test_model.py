import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from centralspins.model import (
    DomainError,
    ModelParams,
    Sector,
    SECTOR_SPECS,
    bath_energy,
    occupation_grid,
    sector_coefficient_arrays,
    sector_coefficients,
    sector_norm_factors,
)
from centralspins.oracle import SmallBathModel


@st.composite
def params_st(draw, max_k=100):
    f = st.floats(0.1, 5.0)
    return ModelParams(
        omega1=draw(f), omega2=draw(f), delta=draw(st.floats(-5, 5)),
        omega_a=draw(f), omega_b=draw(f),
        eps1=draw(st.floats(0.0, 3.0)), eps2=draw(st.floats(0.0, 3.0)),
        M=draw(st.integers(1, max_k)), N=draw(st.integers(1, max_k)), T=draw(st.floats(0.1, 10)),
    )


@st.composite
def draw_case(draw, max_k=100):
    p = draw(params_st(max_k))
    return p, draw(st.sampled_from(list(Sector))), draw(st.integers(0, p.M)), draw(st.integers(0, p.N))


def test_seed_11_ground_bath_values(fig2_params):
    co = sector_coefficients(fig2_params, Sector.S11, 0, 0)
    expected = (2.05, -1.15, -1.35, 2.5, 2.6, 2.5, 2.6)
    np.testing.assert_allclose(co.astuple(), expected, atol=1e-12)


def test_bath_energy_levels():
    assert bath_energy(0, 10) == -0.5
    np.testing.assert_allclose(bath_energy(np.arange(4), 3), [-0.5, 0.5, 5 / 6, 0.5])


def test_bath_energy_formula():
    k = np.arange(11)
    np.testing.assert_allclose(bath_energy(k, 10), k * (1 - (k - 1) / 10) - 0.5)


@pytest.mark.parametrize(
    "kwargs",
    [dict(T=0.0), dict(T=-1.0), dict(M=0), dict(N=2.5), dict(eps1=-0.1), dict(omega1=float("nan"))],
)
def test_params_validation(kwargs):
    base = dict(omega1=2.0, omega2=1.9, delta=2.5, omega_a=1.1, omega_b=1.2, eps1=2.6, eps2=2.5, M=4, N=4, T=1.0)
    base.update(kwargs)
    with pytest.raises(DomainError):
        ModelParams(**base)


@pytest.mark.parametrize("m,n", [(-1, 0), (0, 5), (5, 0), (1.5, 0)])
def test_occupation_domain(small_params, m, n):
    with pytest.raises(DomainError):
        sector_coefficients(small_params, Sector.S11, m, n)


@given(draw_case())
def test_forward_backward_ratio_is_norm_weight(case):
    p, sector, m, n = case
    co = sector_coefficients(p, sector, m, n)
    wy, wz = sector_norm_factors(p, sector, m, n)
    spec = SECTOR_SPECS[sector]
    assert wy == (n + 1 if spec.q2 == 1 else n)
    assert wz == (m + 1 if spec.q1 == 1 else m)
    assert co.d == pytest.approx(wy * co.f, abs=1e-12)
    assert co.e == pytest.approx(wz * co.g, abs=1e-12)
    assert co.f >= 0 and co.g >= 0


@given(draw_case())
def test_label_swap_symmetry(case):
    p, sector, m, n = case
    swap = {Sector.S11: Sector.S11, Sector.S00: Sector.S00, Sector.S10: Sector.S01, Sector.S01: Sector.S10}
    a = sector_coefficients(p, sector, m, n)
    b = sector_coefficients(p.swapped(), swap[sector], n, m)
    # relabelling the qubits exchanges the two partner amplitudes
    np.testing.assert_allclose((a.a, a.b, a.c, a.d, a.e, a.f, a.g), (b.a, b.c, b.b, b.e, b.d, b.g, b.f), atol=1e-12)


def test_arrays_match_scalar(small_params):
    m, n = occupation_grid(small_params)
    for sector in Sector:
        arrs = sector_coefficient_arrays(small_params, sector)
        for k in range(m.size):
            co = sector_coefficients(small_params, sector, int(m[k]), int(n[k]))
            assert tuple(arrs[x][k] for x in "abcdefg") == pytest.approx(co.astuple(), abs=1e-14)


def test_boundary_couplings_vanish(small_params):
    p = small_params
    assert sector_coefficients(p, Sector.S11, 0, p.N).d == 0.0
    assert sector_coefficients(p, Sector.S11, p.M, 0).e == 0.0
    assert sector_coefficients(p, Sector.S00, 0, 0).d == 0.0
    assert sector_coefficients(p, Sector.S00, 0, 0).e == 0.0


@pytest.mark.parametrize("M,N", [(3, 3), (2, 5)])
def test_coefficients_match_hamiltonian_blocks(M, N):
    """Diagonal and coupling products agree with the operator-built Hamiltonian."""
    p = ModelParams(2.0, 1.9, 2.5, 1.1, 1.2, 2.6, 2.5, M, N, 1.0)
    H = SmallBathModel(p).H
    nb = (M + 1) * (N + 1)

    def idx(s, m, n):
        return s * nb + m * (N + 1) + n

    for sector, spec in SECTOR_SPECS.items():
        for m in range(M + 1):
            for n in range(N + 1):
                co = sector_coefficients(p, sector, m, n)
                s = idx(spec.sector.index, m, n)
                assert H[s, s] == pytest.approx(co.a, abs=1e-12)
                ny, mz = n + spec.dn_y, m + spec.dm_z
                if 0 <= ny <= N:
                    y = idx(spec.y_index, m, ny)
                    assert H[y, y] == pytest.approx(co.b, abs=1e-12)
                    assert H[s, y] ** 2 == pytest.approx(co.d * co.f, abs=1e-12)
                else:
                    assert co.d == co.f == 0.0
                if 0 <= mz <= M:
                    z = idx(spec.z_index, mz, n)
                    assert H[z, z] == pytest.approx(co.c, abs=1e-12)
                    assert H[s, z] ** 2 == pytest.approx(co.e * co.g, abs=1e-12)
                else:
                    assert co.e == co.g == 0.0


def test_swapped_is_involution(fig2_params):
    assert fig2_params.swapped().swapped() == fig2_params

import numpy as np
import pytest
from hypothesis import assume, example, given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from centralspins.linsolve3 import (
    CubicCoefficients,
    amplitudes_at,
    boundary_weights,
    cubic_roots,
    sector_eigensystem,
    solve_cubic,
    solve_pairs,
    solve_sectors,
)
from centralspins.model import DomainError, Sector, SectorCoefficients, sector_coefficients
from centralspins.oracle import sector_expm

coef = st.floats(-10, 10, allow_nan=False)


def _matched_gap(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def test_distinct_real_roots():
    # (x-1)(x-2)(x-3)
    assert solve_cubic(CubicCoefficients(1, -6, 11, -6)) == pytest.approx((1, 2, 3), abs=1e-12)


def test_triple_root():
    np.testing.assert_allclose(cubic_roots(2, -6, 6, -2), [1, 1, 1], atol=1e-12)


def test_complex_pair_sorted():
    # x^3 - 1: roots 1 and exp(+-2 pi i / 3)
    r = cubic_roots(1, 0, 0, -1)
    assert r[0] == pytest.approx(-0.5 - 0.5j * np.sqrt(3), abs=1e-12)
    assert r[1] == pytest.approx(-0.5 + 0.5j * np.sqrt(3), abs=1e-12)
    assert r[2] == pytest.approx(1.0, abs=1e-12)


def test_zero_leading_coefficient():
    with pytest.raises(DomainError):
        solve_cubic(CubicCoefficients(0, 1, 2, 3))


@given(st.floats(0.1, 10) | st.floats(-10, -0.1), coef, coef, coef)
def test_roots_match_companion_matrix(a1, b1, c1, d1):
    roots = cubic_roots(a1, b1, c1, d1)
    ref = np.roots([a1, b1, c1, d1])
    # tolerance scaled by the condition of clustered roots
    spread = min(abs(ref[i] - ref[j]) for i in range(3) for j in range(i + 1, 3))
    assume(spread > 1e-4)
    assert _matched_gap(roots, ref) < 1e-9 * max(1.0, np.max(np.abs(ref))) / min(1.0, spread)


@given(coef, coef, coef)
def test_roots_reconstruct_monic_polynomial(r1, r2, r3):
    # clustered roots are ill-conditioned for any method; keep them apart
    spread = min(abs(r1 - r2), abs(r2 - r3), abs(r1 - r3))
    assume(spread > 1e-2 * (1 + max(abs(r1), abs(r2), abs(r3))))
    b1, c1, d1 = -(r1 + r2 + r3), r1 * r2 + r2 * r3 + r1 * r3, -r1 * r2 * r3
    roots = cubic_roots(1.0, b1, c1, d1)
    assert _matched_gap(roots, [r1, r2, r3]) < 1e-9 * (1 + abs(b1))


@st.composite
def sector_coeffs(draw):
    diag = st.floats(-8, 8)
    cpl = st.floats(0, 3)
    wy, wz = draw(st.integers(0, 101)), draw(st.integers(0, 101))
    f, g = draw(cpl), draw(cpl)
    return SectorCoefficients(draw(diag), draw(diag), draw(diag), wy * f, wz * g, f, g)


@given(sector_coeffs(), st.floats(0, 10))
def test_closed_form_matches_expm(co, t):
    sol = boundary_weights(sector_eigensystem(co))
    got = amplitudes_at(sol, t).asarray()
    assert np.max(np.abs(got - sector_expm(co, t).asarray())) < 1e-8


@given(sector_coeffs(), st.floats(0, 10))
def test_batch_matches_scalar(co, t):
    batch = solve_sectors(*(np.array([x]) for x in co.astuple())).amplitudes([t])[0, 0]
    scalar = amplitudes_at(boundary_weights(sector_eigensystem(co)), t).asarray()
    assert np.max(np.abs(batch - scalar)) < 1e-8


def test_initial_condition():
    co = SectorCoefficients(1.0, -0.3, 0.7, 2.0, 1.5, 1.0, 0.5)
    np.testing.assert_allclose(amplitudes_at(boundary_weights(sector_eigensystem(co)), 0.0).asarray(), [1, 0, 0],
                               atol=1e-12)


def test_uncoupled_block_is_a_phase():
    co = SectorCoefficients(1.3, 0.2, -0.4, 0, 0, 0, 0)
    sol = boundary_weights(sector_eigensystem(co))
    np.testing.assert_allclose(amplitudes_at(sol, 2.0).asarray(), [np.exp(-1.3j * 2.0), 0, 0], atol=1e-12)


@pytest.mark.parametrize(
    "co",
    [
        SectorCoefficients(1.0, 0.5, 0.5, 2.0, 2.0, 1.0, 1.0),  # b == c
        SectorCoefficients(0.5, 0.5, 0.5, 0.0, 2.0, 0.0, 1.0),  # Y decoupled at the seed energy
        SectorCoefficients(0.0, 0.0, 0.0, 1e-12, 1e-12, 1e-12, 1e-12),
    ],
)
def test_degenerate_blocks_use_fallback(co):
    sol = boundary_weights(sector_eigensystem(co))
    assert sol.degenerate_fallback_used
    for t in (0.0, 0.7, 3.1):
        np.testing.assert_allclose(amplitudes_at(sol, t).asarray(), sector_expm(co, t).asarray(), atol=1e-10)


def test_amplitudes_need_weights():
    co = SectorCoefficients(1.0, -0.3, 0.7, 2.0, 1.5, 1.0, 0.5)
    with pytest.raises(DomainError):
        amplitudes_at(sector_eigensystem(co), 1.0)


def test_full_grid_against_expm(fig2_params):
    """Every block of a full-size table, including the boundary and fallback ones."""
    from centralspins.model import sector_coefficient_arrays

    rng = np.random.default_rng(3)
    for sector in Sector:
        arr = sector_coefficient_arrays(fig2_params, sector)
        batch = solve_sectors(*(arr[k] for k in "abcdefg"))
        ks = np.concatenate([np.flatnonzero(batch.fallback)[:40], rng.integers(0, len(batch), 40)])
        t = 3.7
        amp = batch.amplitudes([t])[0]
        for k in ks:
            co = SectorCoefficients(*(arr[x][k] for x in "abcdefg"))
            assert np.max(np.abs(amp[k] - expm(-1j * co.matrix() * t)[:, 0])) < 1e-8


@given(st.floats(-5, 5), st.floats(0, 3), st.floats(0, 3), st.floats(-5, 5), st.floats(0, 10))
@example(a=0.0, e=3.515201625672273e-194, g=1.0, c=1.0, t=1.0)  # lopsided couplings
@example(a=1.0, e=1e-30, g=1e-30, c=1.0 + 1e-12, t=10.0)  # near-repeated eigenvalue
def test_pairs_match_expm(a, e, g, c, t):
    pb = solve_pairs(np.array([a]), np.array([e]), np.array([g]), np.array([c]))
    ref = expm(-1j * np.array([[a, e], [g, c]]) * t)[:, 0]
    assert np.max(np.abs(pb.amplitudes([t])[0, 0] - ref)) < 1e-8


def test_coefficients_from_table_are_solvable(small_params):
    co = sector_coefficients(small_params, Sector.S10, 2, 3)
    sol = boundary_weights(sector_eigensystem(co))
    assert len(sol.lambdas) == 3 and sol.weights is not None


def test_clustered_spectra_against_expm():
    """Near-degenerate blocks, where eigenvalues from the expanded polynomial lose digits."""
    rng = np.random.default_rng(7)
    K = 3000
    a = rng.normal(size=K) * 3
    sep = 10.0 ** rng.uniform(-12, -1, size=(K, 2))
    b = a + sep[:, 0] * rng.choice([-1, 1], K)
    c = a + sep[:, 1] * rng.choice([-1, 1], K)
    wy, wz = rng.integers(0, 102, K), rng.integers(0, 102, K)
    f = np.where(wy == 0, 0.0, 10.0 ** rng.uniform(-8, 0.5, K))
    g = np.where(wz == 0, 0.0, 10.0 ** rng.uniform(-8, 0.5, K))
    batch = solve_sectors(a, b, c, wy * f, wz * g, f, g)
    t = 10.0
    amp = batch.amplitudes([t])[0]
    worst = 0.0
    for k in range(K):
        m = np.array([[a[k], wy[k] * f[k], wz[k] * g[k]], [f[k], b[k], 0], [g[k], 0, c[k]]])
        worst = max(worst, np.max(np.abs(amp[k] - expm(-1j * m * t)[:, 0])))
    assert worst < 1e-10

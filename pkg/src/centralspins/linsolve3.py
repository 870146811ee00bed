"""Closed-form solution of the three-amplitude sector ODEs.

The system ``i d/dt (X, Y, Z) = M (X, Y, Z)`` with ``M = [[a, d, e], [f, b, 0],
[g, 0, c]]`` and ``(X, Y, Z)(0) = (1, 0, 0)`` is solved by the matrix method:

* eigenvalues from the characteristic cubic, solved with Cardano's formulas,
* eigenvectors ``((l-b)(l-c), f(l-c), g(l-b))``,
* weights ``v_j`` from the three boundary conditions,

so that ``(X, Y, Z)(t) = sum_j v_j exp(-i l_j t) (alpha_j, beta_j, gamma_j)``.

The closed forms break down when an eigenvalue hits ``b`` or ``c`` or when two
eigenvalues coincide.  Those blocks are recomputed with a dense eigensolver and
a direct linear solve.  Everything is vectorized over stacks of blocks; the
scalar functions are thin wrappers around the batch code.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import DomainError, SectorCoefficients

__all__ = [
    "CubicCoefficients",
    "SectorSolution",
    "SectorBatch",
    "PairBatch",
    "AmplitudeTriple",
    "DEGENERACY_RTOL",
    "solve_cubic",
    "cubic_roots",
    "sector_eigensystem",
    "boundary_weights",
    "amplitudes_at",
    "solve_sectors",
    "solve_pairs",
]

DEGENERACY_RTOL = 1e-9
# Largest acceptable sum_j |v_j| * |vec_j|; exact solutions give <= 3.
_MAX_AMPLIFICATION = 1e3
_PHI = complex(-0.5, np.sqrt(3.0) / 2.0)


@dataclass(frozen=True)
class CubicCoefficients:
    a1: float
    b1: float
    c1: float
    d1: float


def _polish(a1, b1, c1, d1, x, steps=3):
    """Newton refinement of cubic roots, keeping a step only if it helps."""
    for _ in range(steps):
        p = ((a1 * x + b1) * x + c1) * x + d1
        dp = (3.0 * a1 * x + 2.0 * b1) * x + c1
        ok = np.abs(dp) > 0
        step = np.where(ok, p / np.where(ok, dp, 1.0), 0.0)
        x_new = x - step
        p_new = ((a1 * x_new + b1) * x_new + c1) * x_new + d1
        x = np.where(np.abs(p_new) < np.abs(p), x_new, x)
    return x


def cubic_roots(a1, b1, c1, d1, polish: bool = True) -> np.ndarray:
    """Vectorized Cardano roots; returns shape ``(..., 3)`` complex.

    Roots are sorted ascending by real part, ties by imaginary part.
    """
    a1, b1, c1, d1 = (np.asarray(x, dtype=complex) for x in (a1, b1, c1, d1))
    if np.any(a1 == 0):
        raise DomainError("leading cubic coefficient must be nonzero")
    d0 = b1 * b1 - 3.0 * a1 * c1
    dd1 = 2.0 * b1 ** 3 - 9.0 * a1 * b1 * c1 + 27.0 * a1 * a1 * d1
    sq = np.sqrt(dd1 * dd1 - 4.0 * d0 ** 3)
    # Either sign of the square root gives the same root set; pick the one
    # that keeps Q away from zero.
    plus = dd1 + sq
    minus = dd1 - sq
    inner = np.where(np.abs(plus) >= np.abs(minus), plus, minus) / 2.0
    q = inner ** (1.0 / 3.0)
    triple = q == 0
    q_safe = np.where(triple, 1.0, q)
    roots = []
    for k in (1, 2, 3):
        pk = _PHI ** k * q_safe
        xk = -(b1 + pk + d0 / pk) / (3.0 * a1)
        roots.append(np.where(triple, -b1 / (3.0 * a1), xk))
    roots = np.stack(roots, axis=-1)
    if polish:
        roots = _polish(a1[..., None], b1[..., None], c1[..., None], d1[..., None], roots)
    return _sort_roots(roots)


def _sort_roots(roots):
    idx = np.lexsort((roots.imag, roots.real), axis=-1)
    return np.take_along_axis(roots, idx, axis=-1)


def solve_cubic(c: CubicCoefficients) -> tuple[complex, complex, complex]:
    """Roots of ``a1 x^3 + b1 x^2 + c1 x + d1``, ascending by (real, imag)."""
    if c.a1 == 0:
        raise DomainError("a1 must be nonzero")
    r = cubic_roots(c.a1, c.b1, c.c1, c.d1)
    return tuple(complex(x) for x in r)


# ---------------------------------------------------------------- batches


@dataclass(frozen=True)
class SectorBatch:
    """Eigensystems of a stack of ``K`` blocks.

    ``vecs[k, j]`` is the eigenvector ``(alpha_j, beta_j, gamma_j)`` of block
    ``k`` for eigenvalue ``lambdas[k, j]``.  ``wvecs = weights[..., None] * vecs``
    is cached because it is all that time evaluation needs.
    """

    lambdas: np.ndarray
    vecs: np.ndarray
    weights: np.ndarray
    fallback: np.ndarray

    @property
    def wvecs(self) -> np.ndarray:
        return self.weights[..., None] * self.vecs

    def __len__(self):
        return self.lambdas.shape[0]

    def amplitudes(self, times) -> np.ndarray:
        """Amplitudes at each time; shape ``(T, K, 3)`` for ``(X, Y, Z)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        arg = times[:, None, None] * self.lambdas[None, :, :]
        phase = np.cos(arg) - 1j * np.sin(arg)
        return np.einsum("tkj,kjc->tkc", phase, self.wvecs)


def _scale(coeffs: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.max(np.abs(coeffs), axis=-1))


def _matrices(a, b, c, d, e, f, g):
    K = a.shape[0]
    mat = np.zeros((K, 3, 3))
    mat[:, 0, 0], mat[:, 0, 1], mat[:, 0, 2] = a, d, e
    mat[:, 1, 0], mat[:, 1, 1] = f, b
    mat[:, 2, 0], mat[:, 2, 2] = g, c
    return mat


def _secular(lam, a, b, c, df, eg):
    """Characteristic polynomial and derivative in factored form."""
    la, lb, lc = lam - a, lam - b, lam - c
    p = la * lb * lc - df * lc - eg * lb
    dp = lb * lc + la * lc + la * lb - df - eg
    return p, dp


def _refine_eigenvalues(lam, a, b, c, df, eg, max_steps=40):
    """Newton iteration on the factored polynomial, run to convergence.

    The expanded monomial coefficients lose digits when eigenvalues cluster;
    the factored form does not.  Starting points inside a tight cluster can
    be several gaps off, so the early steps converge only linearly.
    """
    a, b, c, df, eg = (x[..., None] for x in (a, b, c, df, eg))
    tol = 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(lam))
    for _ in range(max_steps):
        p, dp = _secular(lam, a, b, c, df, eg)
        ok = dp != 0
        step = np.where(ok, p / np.where(ok, dp, 1.0), 0.0)
        new = lam - step
        p_new, _ = _secular(new, a, b, c, df, eg)
        take = np.abs(p_new) < np.abs(p)
        lam = np.where(take, new, lam)
        if not np.any(take & (np.abs(step) > tol)):
            break
    return np.sort(lam, axis=-1)


def _closed_form_vectors(lam, b, c, f, g):
    lb = lam - b[:, None]
    lc = lam - c[:, None]
    return np.stack([lb * lc, f[:, None] * lc, g[:, None] * lb], axis=-1)


def _cramer_weights(vecs):
    al, be, ga = vecs[..., 0], vecs[..., 1], vecs[..., 2]
    n1 = be[:, 2] * ga[:, 1] - be[:, 1] * ga[:, 2]
    n2 = be[:, 0] * ga[:, 2] - be[:, 2] * ga[:, 0]
    n3 = be[:, 1] * ga[:, 0] - be[:, 0] * ga[:, 1]
    den = al[:, 0] * n1 + al[:, 1] * n2 + al[:, 2] * n3
    num = np.stack([n1, n2, n3], axis=-1)
    return num, den


def _numeric_eigensystem(mat):
    """Dense fallback: eigenpairs plus weights from a direct linear solve.

    Blocks whose couplings pair up (d f > 0 or d = f = 0, same for e, g) are
    symmetrized first so the Hermitian solver returns exactly real spectra.
    """
    K = mat.shape[0]
    d, f = mat[:, 0, 1], mat[:, 1, 0]
    e, g = mat[:, 0, 2], mat[:, 2, 0]
    paired_y = ((d * f) > 0) | ((d == 0) & (f == 0))
    paired_z = ((e * g) > 0) | ((e == 0) & (g == 0))
    sym_ok = paired_y & paired_z
    lam = np.empty((K, 3))
    vecs = np.empty((K, 3, 3))
    if np.any(sym_ok):
        ms = mat[sym_ok]
        dd, ff, ee, gg = ms[:, 0, 1], ms[:, 1, 0], ms[:, 0, 2], ms[:, 2, 0]
        sym = ms.copy()
        sym[:, 0, 1] = sym[:, 1, 0] = np.sqrt(dd * ff)
        sym[:, 0, 2] = sym[:, 2, 0] = np.sqrt(ee * gg)
        w, u = np.linalg.eigh(sym)
        # Undo the similarity D M D^-1 with D = diag(1, sqrt(d/f), sqrt(e/g)).
        with np.errstate(divide="ignore", invalid="ignore"):
            ry = np.where(ff != 0, np.sqrt(ff / np.where(dd != 0, dd, 1.0)), 1.0)
            rz = np.where(gg != 0, np.sqrt(gg / np.where(ee != 0, ee, 1.0)), 1.0)
        dinv = np.stack([np.ones_like(ry), ry, rz], axis=-1)
        lam[sym_ok] = w
        vecs[sym_ok] = np.swapaxes(dinv[:, :, None] * u, -1, -2)
    if np.any(~sym_ok):
        w, u = np.linalg.eig(mat[~sym_ok])
        idx = np.argsort(w.real, axis=-1)
        w = np.take_along_axis(w.real, idx, axis=-1)
        u = np.take_along_axis(u.real, idx[:, None, :], axis=-1)
        lam[~sym_ok] = w
        vecs[~sym_ok] = np.swapaxes(u, -1, -2)
    # Columns of P are eigenvectors: P v = (1, 0, 0).
    P = np.swapaxes(vecs, -1, -2)
    e1 = np.array([1.0, 0.0, 0.0])
    weights = np.empty((K, 3))
    for k in range(K):
        try:
            weights[k] = np.linalg.solve(P[k], e1)
        except np.linalg.LinAlgError:
            weights[k] = np.linalg.lstsq(P[k], e1, rcond=None)[0]
    return lam, vecs, weights.astype(complex)


def _check_solution(mat, lam, vecs, weights, scale):
    """Boolean mask of blocks whose eigen/boundary residuals are acceptable."""
    res = np.einsum("kab,kjb->kja", mat, vecs) - lam[..., None] * vecs
    vnorm = np.linalg.norm(vecs, axis=-1)
    eig_ok = np.all(np.linalg.norm(res, axis=-1) <= DEGENERACY_RTOL * scale[:, None] * np.maximum(vnorm, 1e-300), axis=-1)
    wv = weights[..., None] * vecs
    boundary = wv.sum(axis=1) - np.array([1.0, 0.0, 0.0])
    bnd_ok = np.all(np.abs(boundary) <= DEGENERACY_RTOL, axis=-1)
    amp = np.sum(np.abs(weights) * vnorm, axis=-1)
    return eig_ok & bnd_ok & np.isfinite(amp) & (amp <= _MAX_AMPLIFICATION)


def solve_sectors(a, b, c, d, e, f, g) -> SectorBatch:
    """Solve a stack of blocks given coefficient arrays of equal length."""
    a, b, c, d, e, f, g = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (a, b, c, d, e, f, g))
    K = a.shape[0]
    coeffs = np.stack([a, b, c, d, e, f, g], axis=-1)
    scale = _scale(coeffs)
    thr = DEGENERACY_RTOL * scale

    c2 = a * b + b * c + a * c - f * d - e * g
    c3 = f * d * c + e * g * b - a * b * c
    roots = cubic_roots(np.ones(K), -(a + b + c), c2, c3)
    lam = _refine_eigenvalues(np.sort(roots.real, axis=-1), a, b, c, d * f, e * g)

    degenerate = (
        np.any(np.abs(lam - b[:, None]) < thr[:, None], axis=-1)
        | np.any(np.abs(lam - c[:, None]) < thr[:, None], axis=-1)
        | np.any(np.diff(lam, axis=-1) < thr[:, None], axis=-1)
        # two starts captured by one root would show up here
        | (np.abs(lam.sum(axis=-1) - (a + b + c)) > thr)
    )
    vecs = _closed_form_vectors(lam, b, c, f, g)
    num, den = _cramer_weights(vecs)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = (num / den[:, None]).astype(complex)
    mat = _matrices(a, b, c, d, e, f, g)
    good = ~degenerate & (np.abs(den) > 0)
    good &= _check_solution(mat, lam, vecs, np.where(good[:, None], weights, 0.0), scale)

    fallback = ~good
    if np.any(fallback):
        lam_f, vecs_f, w_f = _numeric_eigensystem(mat[fallback])
        lam = lam.copy()
        lam[fallback] = lam_f
        vecs[fallback] = vecs_f
        weights[fallback] = w_f
    return SectorBatch(lambdas=lam, vecs=vecs, weights=weights, fallback=fallback)


# ---------------------------------------------------------------- 2x2 blocks


@dataclass(frozen=True)
class PairBatch:
    """Stack of two-amplitude blocks ``i d/dt (X, Z) = [[a, e], [g, c]] (X, Z)``.

    Stored as ``mean * I + N`` with ``N = [[s, e], [g, -s]]`` and ``N @ N = h**2 I``,
    so the propagator is a rotation and never needs eigenvectors.  The
    ``sin(h t) / h`` factor goes through ``sinc``, which keeps repeated
    eigenvalues (h -> 0) and lopsided couplings exact.
    """

    mean: np.ndarray
    half: np.ndarray
    skew: np.ndarray
    g: np.ndarray

    @property
    def lambdas(self) -> np.ndarray:
        return np.stack([self.mean - self.half.real, self.mean + self.half.real], axis=-1)

    def amplitudes(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        t = times[:, None]
        arg = t * self.mean[None, :]
        phase = np.cos(arg) - 1j * np.sin(arg)
        ht = t * self.half[None, :]
        S = t * np.sinc(ht / np.pi)
        X = np.cos(ht) - 1j * self.skew[None, :] * S
        Z = -1j * self.g[None, :] * S
        return phase[..., None] * np.stack([X, Z], axis=-1)


def solve_pairs(a, e, g, c) -> PairBatch:
    """Closed-form propagators for a stack of 2x2 blocks."""
    a, e, g, c = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (a, e, g, c))
    skew = 0.5 * (a - c)
    h2 = skew**2 + e * g
    # opposite-sign couplings can make h imaginary (growing/decaying pair)
    half = np.sqrt(h2) if np.all(h2 >= 0) else np.sqrt(h2.astype(complex))
    return PairBatch(mean=0.5 * (a + c), half=half, skew=skew, g=g)


# ---------------------------------------------------------------- scalar API


@dataclass(frozen=True)
class SectorSolution:
    lambdas: tuple
    vecs: tuple
    weights: tuple | None
    degenerate_fallback_used: bool
    coeffs: SectorCoefficients | None = None

    def as_batch(self) -> SectorBatch:
        if self.weights is None:
            raise DomainError("boundary weights not computed yet")
        return SectorBatch(
            lambdas=np.array([self.lambdas], dtype=float),
            vecs=np.array([self.vecs], dtype=float),
            weights=np.array([self.weights], dtype=complex),
            fallback=np.array([self.degenerate_fallback_used]),
        )


@dataclass(frozen=True)
class AmplitudeTriple:
    x: complex
    y: complex
    z: complex

    def asarray(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def sector_eigensystem(coeffs: SectorCoefficients) -> SectorSolution:
    """Eigenvalues and closed-form eigenvectors of one block.

    On the degenerate path the numeric fallback also fills in the weights.
    """
    a, b, c, d, e, f, g = coeffs.astuple()
    scale = max(1.0, max(abs(x) for x in coeffs.astuple()))
    thr = DEGENERACY_RTOL * scale
    lam = np.sort(cubic_roots(1.0, -(a + b + c), a * b + b * c + a * c - f * d - e * g,
                              f * d * c + e * g * b - a * b * c).real)
    lam = _refine_eigenvalues(lam[None], *(np.array([x]) for x in (a, b, c, d * f, e * g)))[0]
    degenerate = (
        np.any(np.abs(lam - b) < thr) or np.any(np.abs(lam - c) < thr) or np.any(np.diff(lam) < thr)
        or abs(lam.sum() - (a + b + c)) > thr
    )
    if degenerate:
        lam_f, vecs_f, w_f = _numeric_eigensystem(coeffs.matrix()[None])
        return SectorSolution(
            lambdas=tuple(lam_f[0]), vecs=tuple(map(tuple, vecs_f[0])),
            weights=tuple(w_f[0]), degenerate_fallback_used=True, coeffs=coeffs,
        )
    vecs = _closed_form_vectors(lam[None], np.array([b]), np.array([c]), np.array([f]), np.array([g]))[0]
    return SectorSolution(
        lambdas=tuple(lam), vecs=tuple(map(tuple, vecs)), weights=None,
        degenerate_fallback_used=False, coeffs=coeffs,
    )


def boundary_weights(sol: SectorSolution) -> SectorSolution:
    """Fill in the boundary weights ``v_j`` (no-op on the fallback path)."""
    if sol.degenerate_fallback_used and sol.weights is not None:
        return sol
    vecs = np.array([sol.vecs])
    num, den = _cramer_weights(vecs)
    ok = abs(den[0]) > 0
    if ok:
        weights = num[0] / den[0]
        coeffs = sol.coeffs
        if coeffs is not None:
            scale = np.array([max(1.0, max(abs(x) for x in coeffs.astuple()))])
            ok = bool(_check_solution(coeffs.matrix()[None], np.array([sol.lambdas]), vecs,
                                      weights[None].astype(complex), scale)[0])
    if not ok:
        if sol.coeffs is None:
            raise DomainError("eigenvectors are linearly dependent and no coefficients to fall back on")
        lam_f, vecs_f, w_f = _numeric_eigensystem(sol.coeffs.matrix()[None])
        return replace(sol, lambdas=tuple(lam_f[0]), vecs=tuple(map(tuple, vecs_f[0])),
                       weights=tuple(w_f[0]), degenerate_fallback_used=True)
    return replace(sol, weights=tuple(complex(w) for w in weights))


def amplitudes_at(sol: SectorSolution, t: float) -> AmplitudeTriple:
    """Evaluate ``(X, Y, Z)`` at time ``t``."""
    amp = sol.as_batch().amplitudes([t])[0, 0]
    return AmplitudeTriple(complex(amp[0]), complex(amp[1]), complex(amp[2]))

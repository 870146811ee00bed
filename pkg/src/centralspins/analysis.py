"""Diagnostics of the reduced dynamics: distances and correlations.

Entropies are in bits.  Discord measures qubit 2 with the projectors
``|u><u|``, ``|v><v|`` where ``u = cos(theta)|1> + e^{i phi} sin(theta)|0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .dynmap import evolve_trajectory, local_map, local_product_evolve
from .model import DomainError, InvariantViolation, ModelParams
from .states import bell_state, validate_density_matrix

__all__ = [
    "MeasurementAngles",
    "CorrelationRecord",
    "trace_distance",
    "witness_trajectory",
    "global_local_gap",
    "concurrence",
    "concurrence_via_product",
    "von_neumann_entropy",
    "discord",
    "discord_grid",
    "correlation_trajectory",
    "strict_local_extrema",
    "GRID_THETA",
    "GRID_PHI",
]

GRID_THETA = 65
GRID_PHI = 128
N_STARTS = 3
_CLAMP = 1e-9
_SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float


@dataclass(frozen=True)
class CorrelationRecord:
    t: float
    concurrence: float
    discord: float
    argmin_angles: MeasurementAngles


def trace_distance(rho, sigma) -> float:
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def witness_trajectory(params: ModelParams, rho0, times, threads: int = 1) -> list[tuple[float, float]]:
    """Distance between the evolved state and the initial state over time."""
    rho0 = validate_density_matrix(rho0, "rho0")
    return [(t, trace_distance(rho, rho0)) for t, rho in evolve_trajectory(params, rho0, times, threads)]


def global_local_gap(params: ModelParams, rho0, times, threads: int = 1) -> list[tuple[float, float]]:
    """Distance between the two-qubit map and the product of local maps."""
    rho0 = validate_density_matrix(rho0, "rho0")
    out = []
    for t, rho_g in evolve_trajectory(params, rho0, times, threads):
        rho_l = local_product_evolve(local_map(params, 1, t), local_map(params, 2, t), rho0)
        out.append((t, trace_distance(rho_g, rho_l)))
    return out


def _clamped_spectrum(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -_CLAMP:
        raise InvariantViolation(f"state has eigenvalue {w.min():.3e} below -{_CLAMP}")
    return np.clip(w, 0.0, None)


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def concurrence(rho) -> float:
    """Wootters concurrence from the spectrum of ``sqrt(sqrt(rho) rho~ sqrt(rho))``."""
    rho = np.asarray(rho, dtype=complex)
    _clamped_spectrum(rho)
    tilde = _SIGMA_YY @ rho.conj() @ _SIGMA_YY
    s = _psd_sqrt(rho)
    R = s @ tilde @ s
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (R + R.conj().T)), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_via_product(rho) -> float:
    """Same quantity from the square roots of the eigenvalues of ``rho rho~``."""
    rho = np.asarray(rho, dtype=complex)
    tilde = _SIGMA_YY @ rho.conj() @ _SIGMA_YY
    ev = np.linalg.eigvals(rho @ tilde).real
    lam = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _h(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def von_neumann_entropy(rho) -> float:
    return float(np.sum(_h(_clamped_spectrum(np.asarray(rho, dtype=complex)))))


def _measurement_vectors(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phase = np.exp(1j * np.asarray(phi, dtype=float))
    u = np.stack([np.cos(theta) + 0j, phase * np.sin(theta)], axis=-1)
    v = np.stack([np.sin(theta) + 0j, -phase * np.cos(theta)], axis=-1)
    return u, v


def _conditional_entropy(r4, theta, phi):
    """``sum_k p_k S(rho_1|k)`` for arrays of angles.

    ``r4`` is the state reshaped as ``[i1, i2, j1, j2]``.
    """
    total = 0.0
    for vec in _measurement_vectors(theta, phi):
        # unnormalized conditional state of qubit 1: <vec|_2 rho |vec>_2
        sig = np.einsum("...b,abcd,...d->...ac", vec.conj(), r4, vec)
        p = np.real(sig[..., 0, 0] + sig[..., 1, 1])
        det = np.real(sig[..., 0, 0] * sig[..., 1, 1] - sig[..., 0, 1] * sig[..., 1, 0])
        disc = np.sqrt(np.clip(p * p - 4.0 * det, 0.0, None))
        l1 = np.clip(0.5 * (p + disc), 0.0, None)
        l2 = np.clip(0.5 * (p - disc), 0.0, None)
        # p S(sigma/p) = -sum l log2(l/p); zero-probability outcomes drop out.
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(l1 > 0, -l1 * np.log2(np.where(l1 > 0, l1, 1.0) / np.where(p > 0, p, 1.0)), 0.0)
            s = s + np.where(l2 > 0, -l2 * np.log2(np.where(l2 > 0, l2, 1.0) / np.where(p > 0, p, 1.0)), 0.0)
        total = total + s
    return total


def _point_entropy(R, theta, phi):
    """Scalar version of ``_conditional_entropy`` for the optimizer.

    ``R`` maps ``conj(v_b) v_d`` (flattened ``bd``) to the conditional state
    (flattened ``ac``).
    """
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    W = np.array([[c * c, s * s], [c * s * e, -c * s * e], [c * s / e, -c * s / e], [s * s, c * c]])
    sig = R @ W
    total = 0.0
    for k in (0, 1):
        p = (sig[0, k] + sig[3, k]).real
        det = (sig[0, k] * sig[3, k] - sig[1, k] * sig[2, k]).real
        disc = math.sqrt(max(p * p - 4.0 * det, 0.0))
        for lam in (0.5 * (p + disc), 0.5 * (p - disc)):
            if lam > 0 and p > 0:
                total -= lam * math.log2(lam / p)
    return total


def _entropy_terms(rho):
    rho = np.asarray(rho, dtype=complex)
    r4 = rho.reshape(2, 2, 2, 2)
    rho2 = np.einsum("abad->bd", r4)
    return r4, von_neumann_entropy(rho2) - von_neumann_entropy(rho)


def discord_grid(rho, n_theta: int = GRID_THETA, n_phi: int = GRID_PHI):
    """Grid-only minimization; returns ``(discord, angles)``."""
    r4, base = _entropy_terms(rho)
    theta = np.linspace(0.0, np.pi / 2, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    cond = _conditional_entropy(r4, TH, PH)
    k = np.unravel_index(np.argmin(cond), cond.shape)
    return float(base + cond[k]), MeasurementAngles(float(TH[k]), float(PH[k]))


def discord(rho, n_theta: int = GRID_THETA, n_phi: int = GRID_PHI) -> tuple[float, MeasurementAngles]:
    """Quantum discord with measurement on qubit 2.

    A coarse grid over the angles is refined with Nelder-Mead on an unnormalized
    3-vector along the measurement axis (no chart singularity at the poles),
    started from the best few grid points.  A refined point is kept only if it
    improves on the grid value.
    """
    rho = np.asarray(rho, dtype=complex)
    r4, base = _entropy_terms(rho)
    theta = np.linspace(0.0, np.pi / 2, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    cond = _conditional_entropy(r4, TH, PH)
    k = np.unravel_index(np.argmin(cond), cond.shape)
    best, angles = float(cond[k]), MeasurementAngles(float(TH[k]), float(PH[k]))

    def to_angles(v):
        r = np.linalg.norm(v)
        if r == 0.0:
            return 0.0, 0.0
        return np.arccos(np.clip(v[2] / r, -1.0, 1.0)), np.arctan2(v[1], v[0])

    R = r4.transpose(0, 2, 1, 3).reshape(4, 4)

    def objective(v):
        return _point_entropy(R, *to_angles(v))

    for idx in np.argsort(cond, axis=None)[:N_STARTS]:
        th, ph = TH.flat[idx], PH.flat[idx]
        v0 = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        simplex = np.vstack([v0, v0 + 0.1 * np.eye(3)])
        res = minimize(objective, v0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-12, "maxiter": 800})
        if res.fun < best:
            th, ph = to_angles(res.x)
            # fold onto the upper hemisphere; n and -n are the same measurement
            if th > np.pi / 2:
                th, ph = np.pi - th, ph + np.pi
            best, angles = float(res.fun), MeasurementAngles(float(th), float(ph) % (2 * np.pi))
    return float(base + best), angles


def correlation_trajectory(params: ModelParams, rho0=None, times=(0.0,), threads: int = 1) -> list[CorrelationRecord]:
    if rho0 is None:
        rho0 = bell_state()
    out = []
    for t, rho in evolve_trajectory(params, rho0, times, threads):
        q_d, angles = discord(rho)
        out.append(CorrelationRecord(t=t, concurrence=concurrence(rho), discord=max(0.0, q_d), argmin_angles=angles))
    return out


def strict_local_extrema(values, margin: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Indices of strict local maxima and minima (beating both neighbours by ``margin``)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise DomainError("need at least three samples")
    i = np.arange(1, v.size - 1)
    maxima = i[(v[i] > v[i - 1] + margin) & (v[i] > v[i + 1] + margin)]
    minima = i[(v[i] < v[i - 1] - margin) & (v[i] < v[i + 1] - margin)]
    return maxima, minima

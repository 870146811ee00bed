"""Brute-force references for the closed-form dynamics.

Nothing here uses the coefficient tables or the Cardano solver.  The joint
Hamiltonian is assembled from qubit and truncated-boson operators on the full
space ``system (4) x bath1 (M+1) x bath2 (N+1)`` and propagated with dense
matrix exponentials.  Two propagators are offered:

* ``projected`` -- each seed ``|s, m, n>`` evolves inside the span of itself
  and the states it couples to directly, which is the three-state closure the
  analytic map is built on;
* ``full`` -- the untruncated Hamiltonian, which also reaches the doubly
  flipped state.  Used only to measure the closure error.

The bath is traced out exactly, including any cross-sector overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import DomainError, ModelParams, SectorCoefficients
from .linsolve3 import AmplitudeTriple

__all__ = [
    "OracleReport",
    "SmallBathModel",
    "MAX_BATH_STATES",
    "sector_expm",
    "projected_propagator",
    "full_propagator",
    "full_hp_deviation",
]

MAX_BATH_STATES = 81

_SZ = np.diag([1.0, -1.0])
_SP = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1><0| in the (|1>, |0>) basis
_SM = _SP.T
_I2 = np.eye(2)


@dataclass(frozen=True)
class OracleReport:
    max_abs_deviation: float
    location: str

    def __str__(self):
        return f"max_abs_deviation={self.max_abs_deviation:.3e} at {self.location}"


def sector_expm(coeffs: SectorCoefficients, t: float) -> AmplitudeTriple:
    """``expm(-i M t) (1, 0, 0)`` by scaling and squaring."""
    col = expm(-1j * coeffs.matrix() * t)[:, 0]
    return AmplitudeTriple(complex(col[0]), complex(col[1]), complex(col[2]))


def _hp_ladder(K: int):
    """``J+``, ``J-`` of a K-spin bath as truncated Holstein-Primakoff bosons."""
    a = np.diag(np.sqrt(np.arange(1, K + 1, dtype=float)), 1)
    root = np.diag(np.sqrt(np.clip(1.0 - np.arange(K + 1) / K, 0.0, None)))
    jp = np.sqrt(K) * a.T @ root
    return jp, jp.T


class SmallBathModel:
    """Dense joint Hamiltonian for small baths."""

    def __init__(self, params: ModelParams):
        nb = (params.M + 1) * (params.N + 1)
        if nb > MAX_BATH_STATES:
            raise DomainError(f"(M+1)(N+1) = {nb} exceeds the oracle limit {MAX_BATH_STATES}")
        self.params = params
        p = params
        self.nb = nb
        I1, I2b = np.eye(p.M + 1), np.eye(p.N + 1)
        jp1, jm1 = _hp_ladder(p.M)
        jp2, jm2 = _hp_ladder(p.N)
        hb1 = p.omega_a * (jp1 @ jm1 / p.M - 0.5 * I1)
        hb2 = p.omega_b * (jp2 @ jm2 / p.N - 0.5 * I2b)

        def op(q1, q2, b1, b2):
            return np.kron(np.kron(q1, q2), np.kron(b1, b2))

        H = (
            0.5 * p.omega1 * op(_SZ, _I2, I1, I2b)
            + 0.5 * p.omega2 * op(_I2, _SZ, I1, I2b)
            + 0.5 * p.delta * op(_SZ, _SZ, I1, I2b)
            + op(_I2, _I2, hb1, I2b)
            + op(_I2, _I2, I1, hb2)
            + p.eps1 / np.sqrt(p.M) * (op(_SP, _I2, jm1, I2b) + op(_SM, _I2, jp1, I2b))
            + p.eps2 / np.sqrt(p.N) * (op(_I2, _SP, I1, jm2) + op(_I2, _SM, I1, jp2))
        )
        self.H = H
        eb = np.add.outer(np.diag(hb1), np.diag(hb2)).ravel()
        w = np.exp(-(eb - eb.min()) / p.T)
        self.prob = w / w.sum()

    def closure(self, seed: int) -> np.ndarray:
        """Seed index followed by every state it couples to directly."""
        col = self.H[:, seed]
        nbrs = [j for j in np.flatnonzero(col) if j != seed]
        return np.array([seed] + nbrs)

    def columns(self, t: float, projected: bool = True) -> np.ndarray:
        """Matrix whose column ``k`` is the evolved basis state ``k``."""
        if not projected:
            return expm(-1j * self.H * t)
        dim = self.H.shape[0]
        V = np.zeros((dim, dim), dtype=complex)
        for seed in range(dim):
            idx = self.closure(seed)
            U = expm(-1j * self.H[np.ix_(idx, idx)] * t)
            V[idx, seed] = U[:, 0]
        return V

    def reduce(self, V: np.ndarray, rho0) -> np.ndarray:
        """Trace the bath out of ``V (rho0 x rho_B) V^dagger``."""
        V4 = V.reshape(4, self.nb, 4, self.nb)
        rho0 = np.asarray(rho0, dtype=complex)
        return np.einsum("absm,st,m,cbtm->ac", V4, rho0, self.prob, V4.conj(), optimize=True)

    def evolve(self, rho0, t: float, projected: bool = True) -> np.ndarray:
        return self.reduce(self.columns(t, projected), rho0)


def projected_propagator(params: ModelParams, rho0, t: float) -> np.ndarray:
    return SmallBathModel(params).evolve(rho0, t, projected=True)


def full_propagator(params: ModelParams, rho0, t: float) -> np.ndarray:
    return SmallBathModel(params).evolve(rho0, t, projected=False)


def full_hp_deviation(params: ModelParams, rho0, times) -> OracleReport:
    """Largest element-wise gap between untruncated and closure dynamics."""
    model = SmallBathModel(params)
    worst, where = 0.0, "none"
    for t in np.atleast_1d(times):
        diff = np.abs(model.evolve(rho0, t, projected=False) - model.evolve(rho0, t, projected=True))
        k = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[k] > worst:
            worst, where = float(diff[k]), f"rho[{k[0] + 1}{k[1] + 1}] t={float(t):g}"
    return OracleReport(worst, where)

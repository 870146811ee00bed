"""Reduced two-qubit dynamics from thermally averaged sector amplitudes.

For every bath occupation pair ``(m, n)`` the four sectors are solved once
(:class:`ReducedDynamics`), and any number of time points is then evaluated
by summing phases.  The thermal reductions run over the flattened grid in
``m``-outer / ``n``-inner order; time points are processed in fixed-size
chunks so results do not depend on how many worker threads are used.

The map itself:

* populations mix through a 4x4 column-stochastic transfer matrix
  (single flips only, ``|11> <-> |00>`` is never reached directly);
* each coherence ``rho_ij`` is multiplied by ``<X_i X_j^*>``, the thermal
  average of the seed amplitudes of sectors ``i`` and ``j``.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .linsolve3 import solve_pairs, solve_sectors
from .model import (
    DomainError,
    ModelParams,
    SECTOR_SPECS,
    Sector,
    occupation_grid,
    sector_coefficient_arrays,
    sector_norm_factors,
)
from .states import validate_density_matrix
from .thermal import bath_exponents, thermal_table

__all__ = [
    "MapCoefficients",
    "ReducedDynamics",
    "LocalMap",
    "LocalDynamics",
    "reduced_dynamics",
    "map_coefficients",
    "evolve",
    "apply_map",
    "evolve_trajectory",
    "local_map",
    "local_product_evolve",
    "TIME_CHUNK",
]

TIME_CHUNK = 16
_SECTOR_ORDER = (Sector.S11, Sector.S10, Sector.S01, Sector.S00)


@dataclass(frozen=True)
class MapCoefficients:
    """Thermal averages defining the map at time ``t``.

    ``gram[i, j]`` is ``<X_i X_j^*>`` over seeds ordered like the basis
    (``X`` is A, J, G, D for seeds 11, 10, 01, 00).  ``transfer[out, in]`` is
    the population transferred from basis state ``in`` to ``out``.
    """

    t: float
    gram: np.ndarray
    transfer: np.ndarray

    # sector 11
    @property
    def pop_A(self):
        return self.transfer[0, 0]

    @property
    def pop_B(self):
        return self.transfer[1, 0]

    @property
    def pop_C(self):
        return self.transfer[2, 0]

    # sector 10
    @property
    def pop_J(self):
        return self.transfer[1, 1]

    @property
    def pop_K(self):
        return self.transfer[0, 1]

    @property
    def pop_L(self):
        return self.transfer[3, 1]

    # sector 01
    @property
    def pop_G(self):
        return self.transfer[2, 2]

    @property
    def pop_H(self):
        return self.transfer[3, 2]

    @property
    def pop_I(self):
        return self.transfer[0, 2]

    # sector 00
    @property
    def pop_D(self):
        return self.transfer[3, 3]

    @property
    def pop_E(self):
        return self.transfer[2, 3]

    @property
    def pop_F(self):
        return self.transfer[1, 3]

    @property
    def coh_AJ(self):
        return self.gram[0, 1]

    @property
    def coh_AG(self):
        return self.gram[0, 2]

    @property
    def coh_AD(self):
        return self.gram[0, 3]

    @property
    def coh_JG(self):
        return self.gram[1, 2]

    @property
    def coh_JD(self):
        return self.gram[1, 3]

    @property
    def coh_GD(self):
        return self.gram[2, 3]

    def sector_norms(self) -> np.ndarray:
        """Thermal averages of the four weighted sector norms (each should be 1)."""
        return self.transfer.sum(axis=0)


class ReducedDynamics:
    """Solved sector eigensystems for one parameter set, reusable at any time."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.thermal = thermal_table(params)
        self.prob = np.ascontiguousarray(self.thermal.probabilities.ravel())
        m, n = occupation_grid(params)
        self.sectors = {}
        self.norm_factors = {}
        for sector in _SECTOR_ORDER:
            self.sectors[sector] = solve_sectors(**sector_coefficient_arrays(params, sector))
            wy, wz = sector_norm_factors(params, sector, m, n)
            self.norm_factors[sector] = (np.broadcast_to(wy, m.shape).astype(float),
                                         np.broadcast_to(wz, m.shape).astype(float))

    @property
    def fallback_count(self) -> int:
        return int(sum(b.fallback.sum() for b in self.sectors.values()))

    def sector_amplitudes(self, sector: Sector, times) -> np.ndarray:
        """``(T, K, 3)`` amplitudes, evaluated elementwise for reproducibility."""
        batch = self.sectors[sector]
        times = np.atleast_1d(np.asarray(times, dtype=float))
        arg = times[:, None, None] * batch.lambdas[None]
        cos, sin = np.cos(arg), np.sin(arg)
        phase = cos - 1j * sin
        wv = batch.wvecs
        out = np.empty((times.size, len(batch), 3), dtype=complex)
        for c in range(3):
            out[..., c] = phase[..., 0] * wv[:, 0, c] + phase[..., 1] * wv[:, 1, c] + phase[..., 2] * wv[:, 2, c]
        return out

    def _reduce(self, q: np.ndarray) -> np.ndarray:
        return np.sum(np.ascontiguousarray(q * self.prob), axis=-1)

    def _chunk(self, times: np.ndarray) -> list[MapCoefficients]:
        T = times.size
        transfer = np.zeros((T, 4, 4))
        seeds = []
        for sector in _SECTOR_ORDER:
            spec = SECTOR_SPECS[sector]
            amp = self.sector_amplitudes(sector, times)
            x = np.ascontiguousarray(amp[..., 0])
            y2 = amp[..., 1].real ** 2 + amp[..., 1].imag ** 2
            z2 = amp[..., 2].real ** 2 + amp[..., 2].imag ** 2
            wy, wz = self.norm_factors[sector]
            i = spec.sector.index
            transfer[:, i, i] = self._reduce(x.real ** 2 + x.imag ** 2)
            transfer[:, spec.y_index, i] = self._reduce(wy * y2)
            transfer[:, spec.z_index, i] = self._reduce(wz * z2)
            seeds.append(x)
        gram = np.zeros((T, 4, 4), dtype=complex)
        for i in range(4):
            gram[:, i, i] = transfer[:, i, i]
            for j in range(i + 1, 4):
                gram[:, i, j] = self._reduce(seeds[i] * seeds[j].conj())
                gram[:, j, i] = gram[:, i, j].conj()
        return [MapCoefficients(t=float(t), gram=gram[k], transfer=transfer[k]) for k, t in enumerate(times)]

    def map_coefficients(self, t: float) -> MapCoefficients:
        return self.map_coefficients_many([t])[0]

    def map_coefficients_many(self, times, threads: int = 1) -> list[MapCoefficients]:
        times = np.asarray(times, dtype=float).ravel()
        chunks = [times[i:i + TIME_CHUNK] for i in range(0, times.size, TIME_CHUNK)]
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(self._chunk, chunks))
        else:
            parts = [self._chunk(c) for c in chunks]
        return [mc for part in parts for mc in part]


@functools.lru_cache(maxsize=8)
def reduced_dynamics(params: ModelParams) -> ReducedDynamics:
    return ReducedDynamics(params)


def map_coefficients(params: ModelParams, t: float) -> MapCoefficients:
    if not np.isfinite(t):
        raise DomainError("t must be finite")
    return reduced_dynamics(params).map_coefficients(t)


def apply_map(coeffs: MapCoefficients, X) -> np.ndarray:
    """Apply the map to any 4x4 operator (no validation; linear)."""
    X = np.asarray(X, dtype=complex)
    out = coeffs.gram * X
    np.fill_diagonal(out, coeffs.transfer @ np.diag(X))
    return out


def evolve(coeffs: MapCoefficients, rho0) -> np.ndarray:
    rho0 = validate_density_matrix(rho0, "rho0")
    return apply_map(coeffs, rho0)


def evolve_trajectory(params: ModelParams, rho0, times, threads: int = 1) -> list[tuple[float, np.ndarray]]:
    rho0 = validate_density_matrix(rho0, "rho0")
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        raise DomainError("times must be nonempty")
    if np.any(np.diff(times) < 0):
        raise DomainError("times must be ascending")
    coeffs = reduced_dynamics(params).map_coefficients_many(times, threads=threads)
    return [(mc.t, apply_map(mc, rho0)) for mc in coeffs]


# ------------------------------------------------------------------ local maps


@dataclass(frozen=True)
class LocalMap:
    """Single-qubit map in the basis ``(|1>, |0>)``.

    ``decay`` is the 1 -> 0 population transfer and ``excite`` the 0 -> 1
    transfer; ``coherence`` multiplies ``rho_10``.
    """

    which: int
    t: float
    stay_excited: float
    decay: float
    excite: float
    stay_ground: float
    coherence: complex

    def superoperator(self) -> np.ndarray:
        """Tensor ``S[o, p, i, j]`` mapping ``rho[i, j]`` to ``rho'[o, p]``."""
        S = np.zeros((2, 2, 2, 2), dtype=complex)
        S[0, 0, 0, 0] = self.stay_excited
        S[0, 0, 1, 1] = self.excite
        S[1, 1, 0, 0] = self.decay
        S[1, 1, 1, 1] = self.stay_ground
        S[0, 1, 0, 1] = self.coherence
        S[1, 0, 1, 0] = np.conj(self.coherence)
        return S

    def apply(self, rho) -> np.ndarray:
        return np.einsum("opij,ij->op", self.superoperator(), np.asarray(rho, dtype=complex))


class LocalDynamics:
    """One qubit with its own bath; the partner qubit and ``delta`` are dropped.

    Built from the 11 and 00 sector tables with the other qubit's frequency,
    ``delta`` and the other bath's coupling set to zero, which leaves one
    two-amplitude block per bath occupation.
    """

    def __init__(self, params: ModelParams, which: int):
        if which not in (1, 2):
            raise DomainError("which must be 1 or 2")
        self.which = which
        if which == 1:
            reduced = replace(params, omega2=0.0, delta=0.0, eps2=0.0)
            K, omega = params.M, params.omega_a
            k = np.arange(K + 1)
            grid = (k, np.zeros_like(k))
            keys = ("a", "e", "g", "c")
        else:
            reduced = replace(params, omega1=0.0, delta=0.0, eps1=0.0)
            K, omega = params.N, params.omega_b
            k = np.arange(K + 1)
            grid = (np.zeros_like(k), k)
            keys = ("a", "d", "f", "b")
        self.blocks = {}
        for sector in (Sector.S11, Sector.S00):
            coeffs = sector_coefficient_arrays(reduced, sector, *grid)
            self.blocks[sector] = solve_pairs(*(coeffs[x] for x in keys))
        self.factor_up = k + 1.0  # excited seed: partner carries k+1
        self.factor_down = k.astype(float)
        expo = bath_exponents(omega, K, params.T)
        w = np.exp(expo - expo.max())
        self.prob = w / np.sum(w)

    def at(self, t: float) -> LocalMap:
        up = self.blocks[Sector.S11].amplitudes([t])[0]
        down = self.blocks[Sector.S00].amplitudes([t])[0]
        p = self.prob
        return LocalMap(
            which=self.which,
            t=float(t),
            stay_excited=float(np.sum(p * np.abs(up[:, 0]) ** 2)),
            decay=float(np.sum(p * self.factor_up * np.abs(up[:, 1]) ** 2)),
            excite=float(np.sum(p * self.factor_down * np.abs(down[:, 1]) ** 2)),
            stay_ground=float(np.sum(p * np.abs(down[:, 0]) ** 2)),
            coherence=complex(np.sum(p * up[:, 0] * down[:, 0].conj())),
        )


@functools.lru_cache(maxsize=16)
def _local_dynamics(params: ModelParams, which: int) -> LocalDynamics:
    return LocalDynamics(params, which)


def local_map(params: ModelParams, which: int, t: float) -> LocalMap:
    return _local_dynamics(params, which).at(t)


def local_product_evolve(lm1: LocalMap, lm2: LocalMap, rho0) -> np.ndarray:
    """Apply ``lm1 (x) lm2`` to a two-qubit state."""
    if lm1.t != lm2.t:
        raise DomainError(f"local maps at different times: {lm1.t} vs {lm2.t}")
    if (lm1.which, lm2.which) != (1, 2):
        raise DomainError("expected the qubit-1 map first and the qubit-2 map second")
    rho0 = validate_density_matrix(rho0, "rho0")
    r = rho0.reshape(2, 2, 2, 2)  # [i1, i2, j1, j2]
    out = np.einsum("apik,bqjl,ijkl->abpq", lm1.superoperator(), lm2.superoperator(), r)
    return out.reshape(4, 4)

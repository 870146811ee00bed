"""Physical parameters and per-sector ODE coefficients.

Each bath is a collection of spins mapped onto a single truncated boson
(occupation ``m`` for bath 1, ``n`` for bath 2).  Starting from a system basis
state and a bath Fock state ``|m, n>``, the dynamics closes on three amplitudes
``(X, Y, Z)``:

* ``X`` -- the seed state itself,
* ``Y`` -- qubit 2 flipped, one excitation exchanged with bath 2,
* ``Z`` -- qubit 1 flipped, one excitation exchanged with bath 1.

The amplitudes obey ``i d/dt (X, Y, Z) = M (X, Y, Z)`` with
``M = [[a, d, e], [f, b, 0], [g, 0, c]]``.  The seven reals are tabulated here
from a single data-driven description of the four seeds.

System basis order everywhere in the package is ``(|11>, |10>, |01>, |00>)``
with ``|1>`` the excited state of a qubit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np

__all__ = [
    "DomainError",
    "InvariantViolation",
    "ModelParams",
    "Sector",
    "SectorCoefficients",
    "SectorSpec",
    "SECTOR_SPECS",
    "BASIS_LABELS",
    "bath_energy",
    "sector_coefficients",
    "sector_coefficient_arrays",
    "sector_norm_factors",
    "occupation_grid",
]

BASIS_LABELS = ("11", "10", "01", "00")


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class InvariantViolation(RuntimeError):
    """A computed object broke one of its defining invariants."""


@dataclass(frozen=True)
class ModelParams:
    """Constants of the two-qubit, two-bath Hamiltonian (hbar = k_B = 1)."""

    omega1: float
    omega2: float
    delta: float
    omega_a: float
    omega_b: float
    eps1: float
    eps2: float
    M: int
    N: int
    T: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("M", "N"):
                if isinstance(value, bool) or int(value) != value:
                    raise DomainError(f"{f.name} must be an integer, got {value!r}")
                object.__setattr__(self, f.name, int(value))
                if value < 1:
                    raise DomainError(f"{f.name} must be >= 1, got {value}")
            else:
                value = float(value)
                object.__setattr__(self, f.name, value)
                if not math.isfinite(value):
                    raise DomainError(f"{f.name} must be finite, got {value}")
        if self.T <= 0:
            raise DomainError(f"T must be > 0, got {self.T}")
        if self.eps1 < 0 or self.eps2 < 0:
            raise DomainError("eps1 and eps2 must be >= 0")

    def swapped(self) -> "ModelParams":
        """Exchange the roles of qubit/bath 1 and qubit/bath 2."""
        return replace(
            self,
            omega1=self.omega2, omega2=self.omega1,
            omega_a=self.omega_b, omega_b=self.omega_a,
            eps1=self.eps2, eps2=self.eps1,
            M=self.N, N=self.M,
        )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Sector(enum.Enum):
    """Seed system state of a three-amplitude block."""

    S11 = "11"
    S10 = "10"
    S01 = "01"
    S00 = "00"

    @property
    def index(self) -> int:
        return BASIS_LABELS.index(self.value)


@dataclass(frozen=True)
class SectorCoefficients:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.d, self.e], [self.f, self.b, 0.0], [self.g, 0.0, self.c]]
        )

    def astuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d, self.e, self.f, self.g)


@dataclass(frozen=True)
class SectorSpec:
    """Table row describing one sector.

    ``q1``, ``q2`` are the seed qubit states (1 excited, 0 ground).  Flipping an
    excited qubit hands its excitation to the bath (occupation +1); flipping a
    ground qubit takes one from the bath (occupation -1).
    """

    sector: Sector
    q1: int
    q2: int

    @property
    def dn_y(self) -> int:
        return 1 if self.q2 == 1 else -1

    @property
    def dm_z(self) -> int:
        return 1 if self.q1 == 1 else -1

    @property
    def y_index(self) -> int:
        return BASIS_LABELS.index(f"{self.q1}{1 - self.q2}")

    @property
    def z_index(self) -> int:
        return BASIS_LABELS.index(f"{1 - self.q1}{self.q2}")


SECTOR_SPECS = {
    Sector.S11: SectorSpec(Sector.S11, 1, 1),
    Sector.S10: SectorSpec(Sector.S10, 1, 0),
    Sector.S01: SectorSpec(Sector.S01, 0, 1),
    Sector.S00: SectorSpec(Sector.S00, 0, 0),
}


def _system_energy(p: ModelParams, q1: int, q2: int) -> float:
    s1 = 1.0 if q1 else -1.0
    s2 = 1.0 if q2 else -1.0
    return 0.5 * (s1 * p.omega1 + s2 * p.omega2 + s1 * s2 * p.delta)


def bath_energy(k, K: int):
    """Truncated-boson bath level ``k (1 - (k-1)/K) - 1/2`` (in units of the bath frequency)."""
    k = np.asarray(k, dtype=float)
    return k * (1.0 - (k - 1.0) / K) - 0.5


def _radical(j, K: int):
    return np.sqrt(np.maximum(0.0, 1.0 - np.asarray(j, dtype=float) / K))


def _coupling(eps: float, k, K: int, dk: int):
    """Return ``(forward, backward, factor)`` for an exchange ``k -> k + dk``.

    ``forward`` multiplies the partner amplitude in the seed equation,
    ``backward`` the seed amplitude in the partner equation, and ``factor``
    is their ratio (the integer norm weight of the partner amplitude).
    """
    k = np.asarray(k, dtype=float)
    if dk == 1:
        r = _radical(k, K)
        factor = k + 1.0
    else:
        # no partner below the empty bath
        r = np.where(k > 0, _radical(k - 1.0, K), 0.0)
        factor = k
    back = eps * r
    return back * factor, back, factor


def _check_range(p: ModelParams, m, n):
    m = np.asarray(m)
    n = np.asarray(n)
    if np.any(m < 0) or np.any(m > p.M) or np.any(n < 0) or np.any(n > p.N):
        raise DomainError(f"occupations must satisfy 0<=m<={p.M}, 0<=n<={p.N}")


def _coefficients(p: ModelParams, sector: Sector, m, n):
    spec = SECTOR_SPECS[sector]
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    dn, dm = spec.dn_y, spec.dm_z
    ea_m = p.omega_a * bath_energy(m, p.M)
    eb_n = p.omega_b * bath_energy(n, p.N)
    a = _system_energy(p, spec.q1, spec.q2) + ea_m + eb_n
    b = _system_energy(p, spec.q1, 1 - spec.q2) + ea_m + p.omega_b * bath_energy(n + dn, p.N)
    c = _system_energy(p, 1 - spec.q1, spec.q2) + p.omega_a * bath_energy(m + dm, p.M) + eb_n
    d, f, _ = _coupling(p.eps2, n, p.N, dn)
    e, g, _ = _coupling(p.eps1, m, p.M, dm)
    return a, b, c, d, e, f, g


def sector_coefficients(params: ModelParams, sector: Sector, m: int, n: int) -> SectorCoefficients:
    """Coefficients ``(a, ..., g)`` of the block seeded by ``sector`` at ``|m, n>``."""
    if int(m) != m or int(n) != n:
        raise DomainError("occupations must be integers")
    _check_range(params, m, n)
    return SectorCoefficients(*(float(x) for x in _coefficients(params, sector, m, n)))


def occupation_grid(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Flattened ``(m, n)`` grid, m outer and n inner, both ascending."""
    m, n = np.meshgrid(np.arange(params.M + 1), np.arange(params.N + 1), indexing="ij")
    return m.ravel(), n.ravel()


def sector_coefficient_arrays(params: ModelParams, sector: Sector, m=None, n=None) -> dict[str, np.ndarray]:
    """Coefficients of one sector evaluated over arrays of occupations.

    Defaults to the full grid, ordered like :func:`occupation_grid`.
    """
    if m is None and n is None:
        m, n = occupation_grid(params)
    m, n = np.broadcast_arrays(np.asarray(m), np.asarray(n))
    _check_range(params, m, n)
    names = ("a", "b", "c", "d", "e", "f", "g")
    return {k: np.broadcast_to(v, m.shape).astype(float) for k, v in zip(names, _coefficients(params, sector, m, n))}


def sector_norm_factors(params: ModelParams, sector: Sector, m, n):
    """Integer weights ``(wY, wZ)`` with ``|X|^2 + wY |Y|^2 + wZ |Z|^2 = 1``."""
    spec = SECTOR_SPECS[sector]
    _, _, wy = _coupling(params.eps2, n, params.N, spec.dn_y)
    _, _, wz = _coupling(params.eps1, m, params.M, spec.dm_z)
    return wy, wz

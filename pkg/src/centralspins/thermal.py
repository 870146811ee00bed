"""Boltzmann weights of the two bath occupations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, bath_energy

__all__ = ["ThermalTable", "thermal_table", "bath_exponents"]


def bath_exponents(omega: float, K: int, T: float) -> np.ndarray:
    """Log Boltzmann factors ``-omega/T * (k(1-(k-1)/K) - 1/2)`` for k = 0..K."""
    return -(omega / T) * bath_energy(np.arange(K + 1), K)


@dataclass(frozen=True)
class ThermalTable:
    """Boltzmann weights indexed ``(m, n)``.

    ``weights`` are shifted by ``exp(-shift)`` so the largest equals one; ``z``
    is their sum, hence every ratio ``weights / z`` is the true thermal
    probability.  ``exponents`` holds the unshifted logarithms.
    """

    exponents: np.ndarray
    weights: np.ndarray
    z: float
    shift: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def boltzmann_factor(self, m: int, n: int) -> float:
        """Unshifted factor ``exp(exponent)`` for one occupation pair."""
        return float(np.exp(self.exponents[m, n]))

    @property
    def partition_function(self) -> float:
        """``Z`` in the unshifted normalization (may overflow to inf)."""
        with np.errstate(over="ignore"):
            return float(self.z * np.exp(self.shift))


def thermal_table(params: ModelParams) -> ThermalTable:
    ea = bath_exponents(params.omega_a, params.M, params.T)
    eb = bath_exponents(params.omega_b, params.N, params.T)
    exponents = ea[:, None] + eb[None, :]
    shift = float(exponents.max())
    weights = np.exp(exponents - shift)
    weights.setflags(write=False)
    exponents.setflags(write=False)
    # m outer, n inner.
    z = float(np.sum(weights.ravel()))
    return ThermalTable(exponents=exponents, weights=weights, z=z, shift=shift)

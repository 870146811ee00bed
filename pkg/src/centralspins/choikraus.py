"""Choi matrix of the reduced map and its Kraus decomposition.

Index convention: ``C[4*i + a, 4*j + b] = <a| phi(|i><j|) |b>``, i.e. the input
basis label is the major index.  An eigenvector ``v`` with eigenvalue ``l``
gives the Kraus operator ``K[a, i] = sqrt(l) * v[4*i + a]``, so that
``sum_k K rho K^dagger = phi(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynmap import MapCoefficients
from .model import InvariantViolation
from .states import validate_density_matrix

__all__ = [
    "ChoiMatrix",
    "KrausSet",
    "CompletePositivityError",
    "choi",
    "kraus_from_choi",
    "apply_kraus",
    "CP_TOL",
]

CP_TOL = 1e-8


class CompletePositivityError(InvariantViolation):
    """Choi matrix has an eigenvalue below ``-CP_TOL``."""


@dataclass(frozen=True)
class ChoiMatrix:
    entries: np.ndarray
    t: float

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class KrausSet:
    operators: list
    eigenvalues: list

    def completeness(self) -> np.ndarray:
        """``sum_k K^dagger K`` (identity for a trace-preserving map)."""
        out = np.zeros((4, 4), dtype=complex)
        for k in self.operators:
            out += k.conj().T @ k
        return out


def choi(coeffs: MapCoefficients, t: float | None = None) -> ChoiMatrix:
    """Dense 16x16 Choi matrix with the sparsity pattern of the reduced map."""
    C = np.zeros((16, 16), dtype=complex)
    T = coeffs.transfer
    for i in range(4):
        for a in range(4):
            C[4 * i + a, 4 * i + a] = T[a, i]
    for i in range(4):
        for j in range(4):
            if i != j:
                C[4 * i + i, 4 * j + j] = coeffs.gram[i, j]
    return ChoiMatrix(entries=C, t=coeffs.t if t is None else float(t))


def kraus_from_choi(c: ChoiMatrix, threshold: float = 1e-10) -> KrausSet:
    """Kraus operators from the eigendecomposition, largest eigenvalue first."""
    w, v = np.linalg.eigh(0.5 * (c.entries + c.entries.conj().T))
    if w.min() < -CP_TOL:
        raise CompletePositivityError(f"Choi eigenvalue {w.min():.3e} at t={c.t}")
    order = np.argsort(w)[::-1]
    ops, kept = [], []
    for k in order:
        if w[k] <= threshold:
            continue
        ops.append(np.sqrt(w[k]) * v[:, k].reshape(4, 4).T)
        kept.append(float(w[k]))
    return KrausSet(operators=ops, eigenvalues=kept)


def apply_kraus(ks: KrausSet, rho0) -> np.ndarray:
    rho0 = validate_density_matrix(rho0, "rho0")
    out = np.zeros((4, 4), dtype=complex)
    for k in ks.operators:
        out += k @ rho0 @ k.conj().T
    return out

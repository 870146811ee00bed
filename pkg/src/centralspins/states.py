"""Two-qubit density matrices in the basis ``(|11>, |10>, |01>, |00>)``."""

from __future__ import annotations

import numpy as np

from .model import BASIS_LABELS, DomainError

__all__ = [
    "HERMITIAN_TOL",
    "TRACE_TOL",
    "PSD_TOL",
    "validate_density_matrix",
    "basis_state",
    "bell_state",
    "named_state",
    "NAMED_STATES",
    "random_density_matrix",
]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


def validate_density_matrix(rho, name: str = "rho", tol_trace: float = TRACE_TOL) -> np.ndarray:
    """Return ``rho`` as a complex 4x4 array or raise :class:`DomainError`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"{name} must be 4x4, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise DomainError(f"{name} has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise DomainError(f"{name} is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol_trace:
        raise DomainError(f"{name} trace is {tr!r}, expected 1")
    lmin = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lmin < -PSD_TOL:
        raise DomainError(f"{name} has negative eigenvalue {lmin:.3g}")
    return rho


def basis_state(label: str) -> np.ndarray:
    k = BASIS_LABELS.index(label)
    rho = np.zeros((4, 4), dtype=complex)
    rho[k, k] = 1.0
    return rho


def bell_state() -> np.ndarray:
    """``(|00> + |11>)/sqrt(2)`` as a density matrix."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


NAMED_STATES = ("11", "10", "01", "00", "bell", "mixed")


def named_state(name: str) -> np.ndarray:
    if name in BASIS_LABELS:
        return basis_state(name)
    if name == "bell":
        return bell_state()
    if name == "mixed":
        return np.eye(4, dtype=complex) / 4.0
    raise DomainError(f"unknown state {name!r}; expected one of {NAMED_STATES}")


def random_density_matrix(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    """Random state from a Ginibre ensemble of the given rank."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real

"""
Validated density matrices and pure states in a fixed computational basis.

Everything downstream (measures, channels, the solver) consumes the two
immutable types defined here. Incoherence is always relative to the basis of
the stored array; there is deliberately no basis-change API.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotNormalized, NotPSD, NotUnitTrace

TOL_STATE = 1e-9
TOL_CHAN = 1e-8


def _env_tol() -> float | None:
    raw = os.environ.get("COHERENCE_TOL")
    if raw is None or raw == "":
        return None
    value = float(raw)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"COHERENCE_TOL must be a positive number, got {raw!r}")
    return value


def tol_state() -> float:
    """State-validation tolerance, overridable through ``COHERENCE_TOL``."""
    env = _env_tol()
    return TOL_STATE if env is None else env


def tol_chan() -> float:
    """Channel-classification tolerance, overridable through ``COHERENCE_TOL``."""
    env = _env_tol()
    return TOL_CHAN if env is None else env


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace d x d matrix.

    Build instances through :func:`validate_density`; the constructor does not
    check the invariants.
    """

    data: np.ndarray

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm complex d-vector. Build through :func:`validate_pure`."""

    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(_frozen(np.outer(v, v.conj())))

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim})"


def validate_density(raw, tol: float | None = None) -> DensityMatrix:
    """Check the three density-matrix invariants and wrap ``raw``.

    Parameters
    ----------
    raw : array_like or DensityMatrix
        Square complex array.
    tol : float, optional
        Absolute tolerance applied to every invariant. Defaults to
        :func:`tol_state`.

    Raises
    ------
    NotHermitian, NotUnitTrace, NotPSD
        The message carries the size of the violation.
    """
    if isinstance(raw, DensityMatrix):
        raw = raw.data
    tol = tol_state() if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(raw, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf")

    herm_err = float(np.max(np.abs(m - m.conj().T)))
    if herm_err > tol:
        raise NotHermitian(f"max |m - m^dagger| = {herm_err:.3e} exceeds {tol:.1e}")
    trace_err = abs(complex(np.trace(m)) - 1.0)
    if trace_err > tol:
        raise NotUnitTrace(f"|Tr - 1| = {trace_err:.3e} exceeds {tol:.1e}")
    h = 0.5 * (m + m.conj().T)
    lam_min = float(np.linalg.eigvalsh(h)[0])
    if lam_min < -tol:
        raise NotPSD(f"smallest eigenvalue {lam_min:.3e} below -{tol:.1e}")
    return DensityMatrix(_frozen(m))


def validate_pure(raw, tol: float | None = None) -> PureState:
    """Wrap ``raw`` as a :class:`PureState` if its squared norm is 1 within ``tol``."""
    if isinstance(raw, PureState):
        raw = raw.amplitudes
    tol = tol_state() if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.asarray(raw, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    norm_err = abs(float(np.vdot(v, v).real) - 1.0)
    if norm_err > tol:
        raise NotNormalized(f"| ||v||^2 - 1 | = {norm_err:.3e} exceeds {tol:.1e}")
    return PureState(_frozen(v))


def fidelity_pure_mixed(psi: PureState, sigma: DensityMatrix) -> float:
    """Return <psi|sigma|psi>."""
    if psi.dim != sigma.dim:
        raise DimensionMismatch(f"pure state dim {psi.dim} != density dim {sigma.dim}")
    val = complex(np.vdot(psi.amplitudes, sigma.data @ psi.amplitudes))
    if abs(val.imag) > tol_state():
        raise NotHermitian(f"fidelity has imaginary part {val.imag:.3e}")
    return float(min(max(val.real, 0.0), 1.0))


def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Completely dephase ``rho`` in the computational basis."""
    return DensityMatrix(_frozen(np.diag(np.diag(rho.data))))


def mcs_state(d: int, phases=None) -> PureState:
    """Maximally coherent state with amplitudes exp(i*phase_n)/sqrt(d)."""
    if d < 1:
        raise ValueError("d must be positive")
    phases = np.zeros(d) if phases is None else np.asarray(phases, dtype=float)
    if phases.shape != (d,):
        raise DimensionMismatch(f"expected {d} phases, got shape {phases.shape}")
    return PureState(_frozen(np.exp(1j * phases) / np.sqrt(d)))


def is_incoherent_state(rho: DensityMatrix, tol: float | None = None) -> bool:
    tol = tol_state() if tol is None else tol
    off = rho.data - np.diag(np.diag(rho.data))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def basis_state(d: int, index: int) -> PureState:
    v = np.zeros(d, dtype=np.complex128)
    v[index] = 1.0
    return PureState(_frozen(v))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(_frozen(np.eye(d) / d))


def random_pure(d: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state."""
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(_frozen(v / np.linalg.norm(v)))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random state from the induced (Ginibre) measure; full rank by default."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix(_frozen(0.5 * (m + m.conj().T)))


def random_qubit(rng: np.random.Generator) -> DensityMatrix:
    """Qubit state with Bloch vector uniform in the unit ball."""
    r = rng.uniform() ** (1.0 / 3.0)
    direction = rng.normal(size=3)
    x, y, z = r * direction / np.linalg.norm(direction)
    m = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
    return DensityMatrix(_frozen(m))

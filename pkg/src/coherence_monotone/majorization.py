"""
Coherence vectors, the majorization order, and the pure-to-ensemble
conversion test.

A pure state ``psi`` converts under incoherent operations into the ensemble
``{w_i, phi_i}`` exactly when the weighted sum of the sorted coherence vectors
of the ``phi_i`` majorizes the sorted coherence vector of ``psi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CoherenceError, DimensionMismatch, NotProbabilityVector
from .states import DensityMatrix, PureState, _frozen, validate_pure

TOL_MAJOR = 1e-9
TOL_SUM = 1e-9
TOL_MIX = 1e-8


@dataclass(frozen=True, eq=False)
class CoherenceVector:
    probs: np.ndarray
    sorted: bool = False

    def __post_init__(self):
        p = np.array(self.probs, dtype=float, copy=True)
        if p.ndim != 1 or p.size == 0:
            raise DimensionMismatch(f"coherence vector must be 1-d, got shape {p.shape}")
        if abs(p.sum() - 1.0) > TOL_SUM:
            raise NotProbabilityVector(f"coherence vector sums to {p.sum():.12f}")
        if np.any(p < -TOL_SUM) or np.any(p > 1 + TOL_SUM):
            raise NotProbabilityVector("coherence vector entries must lie in [0, 1]")
        if self.sorted and np.any(np.diff(p) > TOL_SUM):
            raise CoherenceError("vector flagged sorted is not non-increasing")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.shape[0]

    def __repr__(self) -> str:
        return f"CoherenceVector({np.array2string(self.probs, precision=6)}, sorted={self.sorted})"


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite list of ``(weight, PureState)`` pairs with weights summing to 1."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((float(w), s) for w, s in self.entries)
        if not entries:
            raise CoherenceError("ensemble is empty")
        dims = {s.dim for _, s in entries}
        if len(dims) != 1:
            raise DimensionMismatch(f"ensemble members have dims {sorted(dims)}")
        weights = np.array([w for w, _ in entries])
        if np.any(weights <= 0) or np.any(weights > 1 + TOL_SUM):
            raise NotProbabilityVector("ensemble weights must lie in (0, 1]")
        if abs(weights.sum() - 1.0) > TOL_SUM:
            raise NotProbabilityVector(f"ensemble weights sum to {weights.sum():.12f}")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries[0][1].dim

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    def mixture(self) -> np.ndarray:
        vecs = np.array([s.amplitudes for _, s in self.entries])
        return (vecs.T * self.weights) @ vecs.conj()

    def check_target(self, rho: DensityMatrix, tol: float = TOL_MIX) -> float:
        """Return the max entry error against ``rho``; raise if above ``tol``."""
        if rho.dim != self.dim:
            raise DimensionMismatch(f"ensemble dim {self.dim} != target dim {rho.dim}")
        err = float(np.max(np.abs(self.mixture() - rho.data)))
        if err > tol:
            raise CoherenceError(f"ensemble mixes to a state {err:.3e} away from the target")
        return err


def coherence_vector(psi: PureState) -> CoherenceVector:
    p = np.abs(psi.amplitudes) ** 2
    return CoherenceVector(p / p.sum())


def _sorted_desc(p: np.ndarray) -> np.ndarray:
    # stable on the negated values keeps ties in original index order
    return p[np.argsort(-p, kind="stable")]


def sort_desc(mu: CoherenceVector) -> CoherenceVector:
    return CoherenceVector(_sorted_desc(mu.probs), sorted=True)


def _pad(p: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate([p, np.zeros(n - p.size)])


def majorizes(q: CoherenceVector, p: CoherenceVector, tol: float = TOL_MAJOR) -> bool:
    """True iff ``q`` majorizes ``p`` (``p`` is below ``q`` in the order).

    Vectors of different length are compared after zero-padding the shorter.
    """
    n = max(q.dim, p.dim)
    cq = np.cumsum(_sorted_desc(_pad(q.probs, n)))
    cp = np.cumsum(_sorted_desc(_pad(p.probs, n)))
    if abs(cq[-1] - cp[-1]) > tol:
        return False
    return bool(np.all(cq >= cp - tol))


def aggregate_vector(ens: Ensemble) -> CoherenceVector:
    """Weighted sum of the members' sorted coherence vectors."""
    total = np.zeros(ens.dim)
    for w, s in ens.entries:
        total += w * _sorted_desc(np.abs(s.amplitudes) ** 2)
    total = total / total.sum()
    return CoherenceVector(total, sorted=True)


def pure_from_vector(mu: CoherenceVector) -> PureState:
    """Real non-negative pure state whose coherence vector is ``sort_desc(mu)``."""
    p = np.clip(_sorted_desc(mu.probs), 0.0, None)
    return PureState(_frozen(np.sqrt(p / p.sum())))


def convertible_pure_to_ensemble(psi: PureState, ens: Ensemble) -> bool:
    if psi.dim != ens.dim:
        raise DimensionMismatch(f"pure state dim {psi.dim} != ensemble dim {ens.dim}")
    return majorizes(aggregate_vector(ens), sort_desc(coherence_vector(psi)))


def make_ensemble(weights: Sequence[float], vectors: Sequence) -> Ensemble:
    """Convenience constructor validating each vector as a pure state."""
    return Ensemble(tuple((w, validate_pure(v)) for w, v in zip(weights, vectors)))

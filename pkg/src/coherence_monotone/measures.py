"""
Symmetric concave functionals of the coherence vector.

Each functional maps a probability vector to a non-negative number, vanishes
on the basis vectors and peaks only at the uniform vector. The three
built-ins are the geometric coherence, the entropy of the coherence vector
(relative-entropy coherence of a pure state, in bits) and the l1 norm
coherence. Arbitrary callables can be wrapped as ``custom`` functionals and
sampled with :func:`probe_functional`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .majorization import CoherenceVector


def _probs(mu) -> np.ndarray:
    return mu.probs if isinstance(mu, CoherenceVector) else np.asarray(mu, dtype=float)


def _fold_last(op, arr: np.ndarray) -> np.ndarray:
    # numpy reductions over a short trailing axis are slow on large batches
    out = arr[..., 0]
    for j in range(1, arr.shape[-1]):
        out = op(out, arr[..., j])
    return out


def _geometric_rows(p: np.ndarray) -> np.ndarray:
    return np.maximum(1.0 - _fold_last(np.maximum, p), 0.0)


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > 0, p, 1.0)
    terms = np.where(p > 0, p * np.log2(safe), 0.0)
    return np.maximum(-_fold_last(np.add, terms), 0.0)


def _l1_rows(p: np.ndarray) -> np.ndarray:
    return np.maximum(_fold_last(np.add, np.sqrt(np.clip(p, 0.0, None))) ** 2 - 1.0, 0.0)


def eval_geometric(mu) -> float:
    """1 minus the largest entry: one minus the best fidelity to an incoherent state."""
    return float(_geometric_rows(_probs(mu)))


def eval_relative_entropy(mu) -> float:
    """Shannon entropy of ``mu`` in bits, with 0 log 0 = 0."""
    return float(_entropy_rows(_probs(mu)))


def eval_l1(mu) -> float:
    return float(_l1_rows(_probs(mu)))


@dataclass(frozen=True)
class PureCoherenceFunctional:
    """A named functional of the coherence vector.

    ``batch`` evaluates many vectors stacked along the last axis at once; when
    absent it falls back to a row loop over ``func``.
    """

    kind: str
    name: str
    func: Callable[[np.ndarray], float]
    batch: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, mu) -> float:
        return float(self.func(_probs(mu)))

    def rows(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.batch is not None:
            return self.batch(p)
        flat = p.reshape(-1, p.shape[-1])
        return np.array([self.func(row) for row in flat]).reshape(p.shape[:-1])


GEOMETRIC = PureCoherenceFunctional("geometric", "geometric", eval_geometric, _geometric_rows)
RELATIVE_ENTROPY = PureCoherenceFunctional("relative_entropy", "relent", eval_relative_entropy, _entropy_rows)
L1 = PureCoherenceFunctional("l1", "l1", eval_l1, _l1_rows)

BUILTINS = {"geometric": GEOMETRIC, "relent": RELATIVE_ENTROPY, "l1": L1}
_ALIASES = {"relative_entropy": "relent", "geo": "geometric"}


def get_functional(name: str) -> PureCoherenceFunctional:
    key = _ALIASES.get(name, name)
    try:
        return BUILTINS[key]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; choose from {sorted(BUILTINS)}") from None


def custom_functional(func: Callable[[np.ndarray], float], name: str = "custom") -> PureCoherenceFunctional:
    return PureCoherenceFunctional("custom", name, func)


@dataclass
class ProbeReport:
    name: str
    dim: int
    trials: int
    seed: int
    symmetry_violations: int = 0
    concavity_violations: int = 0
    endpoint_violations: int = 0
    worst_violation: float = 0.0

    @property
    def total_violations(self) -> int:
        return self.symmetry_violations + self.concavity_violations + self.endpoint_violations

    @property
    def ok(self) -> bool:
        return self.total_violations == 0


def probe_functional(
    f: PureCoherenceFunctional, dim: int, trials: int, seed: int, tol: float = 1e-10
) -> ProbeReport:
    """Sample the symmetry, concavity and endpoint conditions of ``f``.

    Each trial draws two Dirichlet vectors, a random permutation and a random
    mixing weight. Endpoint checks cover f = 0 on a permuted basis vector and
    f(uniform) > f(mu) for a non-uniform draw. A clean report is evidence, not
    proof.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rep = ProbeReport(f.name, dim, trials, seed)
    uniform = np.full(dim, 1.0 / dim)
    f_uniform = f(uniform)

    def note(excess: float) -> bool:
        rep.worst_violation = max(rep.worst_violation, excess)
        return excess > tol

    for _ in range(trials):
        mu = rng.dirichlet(np.ones(dim))
        nu = rng.dirichlet(np.ones(dim))
        perm = rng.permutation(dim)
        lam = rng.uniform()

        if note(abs(f(mu[perm]) - f(mu))):
            rep.symmetry_violations += 1
        mix = lam * mu + (1 - lam) * nu
        if note(lam * f(mu) + (1 - lam) * f(nu) - f(mix)):
            rep.concavity_violations += 1

        corner = np.zeros(dim)
        corner[rng.integers(dim)] = 1.0
        bad = note(abs(f(corner)))
        # draws too close to uniform cannot separate a strict maximum from rounding
        if dim > 1 and np.max(np.abs(mu - uniform)) > 1e-3:
            gap = f(mu) - f_uniform
            rep.worst_violation = max(rep.worst_violation, gap)
            bad |= gap >= 0
        if bad:
            rep.endpoint_violations += 1
    return rep

"""
Seeded verification suites.

Each suite draws ``trials`` random instances, checks one structural property
and reports how many trials violated it and by how much. The CLI ``verify``
command and the acceptance tests both run these.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import channels as ch
from .majorization import Ensemble, aggregate_vector
from .measures import BUILTINS, GEOMETRIC, probe_functional
from .solver import qubit_cm, qubit_convexity_probe
from .states import basis_state, mcs_state, random_density, random_pure, random_qubit, validate_density

QUBIT_SUITES = {"mono", "strong", "convex", "max"}
SLACK = 1e-9


@dataclass
class SuiteResult:
    suite: str
    trials: int
    failures: int
    worst_violation: float
    seed: int
    wall_time: float
    dim: int = 2

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return asdict(self)


class UnsupportedDimension(ValueError):
    pass


class _Tally:
    def __init__(self, threshold: float):
        self.threshold = threshold
        self.failures = 0
        self.worst = 0.0

    def trial(self, violations) -> None:
        worst = max(violations, default=0.0)
        self.worst = max(self.worst, worst)
        if worst > self.threshold:
            self.failures += 1


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**31))


def random_ensemble(dim: int, k: int, rng: np.random.Generator) -> Ensemble:
    w = rng.dirichlet(np.ones(k))
    w = np.maximum(w, 1e-12)
    w /= w.sum()
    return Ensemble(tuple((wi, random_pure(dim, rng)) for wi in w))


def _qubit_functionals():
    return list(BUILTINS.values())


def suite_prep(dim: int, trials: int, rng) -> _Tally:
    tally = _Tally(1e-12)
    start = basis_state(dim, 0).projector()
    for _ in range(trials):
        target = rng.dirichlet(np.ones(dim))
        out = ch.apply(ch.build_preparation_channel(target), start)
        tally.trial([float(np.max(np.abs(out.data - np.diag(target))))])
    return tally


def suite_dephase(dim: int, trials: int, rng) -> _Tally:
    tally = _Tally(1e-9)
    for _ in range(trials):
        rho = random_density(dim, rng)
        chan = ch.build_dephasing_channel(rho)
        psi = ch.canonical_pure_state(rho)
        out = ch._apply_raw(chan.kraus, psi.projector().data)
        tally.trial([float(np.max(np.abs(out - rho.data)))])
    return tally


def lemma3_violations(M, K, states) -> list[float]:
    """Trace and conversion equalities of the T/N construction for every outcome."""
    T = ch.build_T_channel(M, K)
    n_channels = [ch.build_N_channel(M, K, T, i) for i in range(len(K))]
    out = []
    for psi in states:
        proj = np.outer(psi.amplitudes, psi.amplitudes.conj())
        rho = ch._apply_raw(M.kraus, proj)
        for i, (k_i, t_i) in enumerate(zip(K.kraus, T.kraus)):
            target = k_i @ rho @ k_i.conj().T
            source = t_i @ proj @ t_i.conj().T
            out.append(abs(np.trace(source).real - np.trace(target).real))
            out.append(float(np.max(np.abs(ch._apply_raw(n_channels[i].kraus, source) - target))))
    return out


def suite_lemma3(dim: int, trials: int, rng, states_per_pair: int = 100) -> _Tally:
    tally = _Tally(1e-9)
    for _ in range(trials):
        M = ch.random_sio(dim, int(rng.integers(1, 5)), _seed(rng))
        K = ch.random_sio(dim, int(rng.integers(1, 5)), _seed(rng))
        states = [random_pure(dim, rng) for _ in range(states_per_pair)]
        tally.trial(lemma3_violations(M, K, states))
    return tally


def suite_mono(trials: int, rng) -> _Tally:
    tally = _Tally(SLACK)
    fs = _qubit_functionals()
    for _ in range(trials):
        sigma = random_qubit(rng)
        out = ch.apply(ch.random_io(2, _seed(rng)), sigma)
        tally.trial([qubit_cm(out, f) - qubit_cm(sigma, f) for f in fs])
    return tally


def suite_strong(trials: int, rng) -> _Tally:
    tally = _Tally(SLACK)
    fs = _qubit_functionals()
    for _ in range(trials):
        sigma = random_qubit(rng)
        outcomes = ch.instrument(ch.random_sio(2, int(rng.integers(1, 5)), _seed(rng)), sigma)
        tally.trial([
            sum(o.probability * qubit_cm(o.state, f) for o in outcomes) - qubit_cm(sigma, f) for f in fs
        ])
    return tally


def suite_convex(trials: int, rng) -> _Tally:
    tally = _Tally(SLACK)
    fs = _qubit_functionals()
    # second differences of |b| -> F on a grid; a negative one breaks convexity
    tally.trial([-qubit_convexity_probe(f) for f in fs])
    for _ in range(trials - 1):
        n = int(rng.integers(2, 5))
        weights = rng.dirichlet(np.ones(n))
        parts = [random_qubit(rng) for _ in range(n)]
        mix = sum(w * p.data for w, p in zip(weights, parts))
        mixed = validate_density(mix)
        tally.trial([
            qubit_cm(mixed, f) - sum(w * qubit_cm(p, f) for w, p in zip(weights, parts)) for f in fs
        ])
    return tally


def suite_max(trials: int, rng) -> _Tally:
    """Only states with |b| = 1/2 (maximally coherent qubits) reach the maximum."""
    tally = _Tally(0.0)
    fs = _qubit_functionals()
    for t in range(trials):
        if t % 10 == 0:
            sigma = mcs_state(2, rng.uniform(0, 2 * np.pi, size=2)).projector()
        else:
            sigma = random_qubit(rng)
        mod_b = abs(sigma.data[0, 1])
        violations = []
        for f in fs:
            top = f(np.array([0.5, 0.5]))
            val = qubit_cm(sigma, f)
            if mod_b < 0.5 - 1e-9:
                violations.append(1.0 if val >= top else 0.0)
            else:
                # z = sqrt(1 - 4|b|^2) turns rounding in |b| into ~1e-8 shifts, so only
                # check that the maximum is not exceeded
                violations.append(max(val - top - SLACK, 0.0))
        tally.trial(violations)
    return tally


def suite_probe(dim: int, trials: int, rng) -> _Tally:
    tally = _Tally(0.0)
    for f in BUILTINS.values():
        rep = probe_functional(f, dim, trials, _seed(rng))
        tally.failures += rep.total_violations
        tally.worst = max(tally.worst, rep.worst_violation)
    return tally


def suite_collapse(dim: int, trials: int, rng) -> _Tally:
    tally = _Tally(1e-12)
    for _ in range(trials):
        ens = random_ensemble(dim, int(rng.integers(1, 2 * dim + 1)), rng)
        lhs = GEOMETRIC(aggregate_vector(ens))
        rhs = sum(w * GEOMETRIC(np.abs(s.amplitudes) ** 2) for w, s in ens.entries)
        tally.trial([abs(lhs - rhs)])
    return tally


def suite_ordering(dim: int, trials: int, rng) -> _Tally:
    """Per-decomposition ordering: f(sum p mu_desc) >= sum p f(mu_desc)."""
    tally = _Tally(1e-12)
    fs = list(BUILTINS.values())
    for _ in range(trials):
        ens = random_ensemble(dim, int(rng.integers(1, 2 * dim + 1)), rng)
        agg = aggregate_vector(ens)
        tally.trial([
            sum(w * f(np.abs(s.amplitudes) ** 2) for w, s in ens.entries) - f(agg) for f in fs
        ])
    return tally


SUITES = ("mono", "strong", "convex", "max", "lemma3", "prep", "dephase", "probe", "collapse", "ordering")


def run_suite(name: str, dim: int = 2, trials: int = 200, seed: int = 0, **kwargs) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if name in QUBIT_SUITES and dim != 2:
        raise UnsupportedDimension(f"suite {name!r} runs on qubits only (dim 2)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    if name == "mono":
        tally = suite_mono(trials, rng)
    elif name == "strong":
        tally = suite_strong(trials, rng)
    elif name == "convex":
        tally = suite_convex(trials, rng)
    elif name == "max":
        tally = suite_max(trials, rng)
    elif name == "lemma3":
        tally = suite_lemma3(dim, trials, rng, **kwargs)
    elif name == "prep":
        tally = suite_prep(dim, trials, rng)
    elif name == "dephase":
        tally = suite_dephase(dim, trials, rng)
    elif name == "probe":
        tally = suite_probe(dim, trials, rng)
    elif name == "collapse":
        tally = suite_collapse(dim, trials, rng)
    else:
        tally = suite_ordering(dim, trials, rng)
    wall = time.perf_counter() - t0
    return SuiteResult(name, trials, tally.failures, float(tally.worst), seed, wall, dim)

"""
Numerical evaluation of the conversion monotone and the convex roof.

Both quantities minimise over pure-state decompositions of ``rho``. Every
decomposition with ``k`` members comes from a ``k x r`` isometry ``V`` acting
on the eigen-decomposition (``r`` = rank of ``rho``):

    phi~_i = sum_a V[i, a] sqrt(lam_a) |e_a>,   p_i = <phi~_i|phi~_i>.

The monotone scores a decomposition by ``f(sum_i p_i mu_desc(phi_i))``; the
roof scores it by ``sum_i p_i f(mu_desc(phi_i))``. Away from qubits the
minimisation is a non-smooth search with no optimality certificate, so the
reported values are upper bounds.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLarge, InvalidIsometry, RankMismatch
from .majorization import CoherenceVector, Ensemble, aggregate_vector
from .measures import GEOMETRIC, PureCoherenceFunctional, probe_functional
from .states import DensityMatrix, PureState, _frozen, is_incoherent_state

RANK_TOL = 1e-10
ISO_TOL = 1e-9
DIM_MAX = 8


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for the decomposition search.

    ``sizes`` lists the ensemble sizes swept by the restarts; ``None`` means
    every size from rank(rho) to d**2.
    """

    seed: int = 0
    restarts: int = 32
    max_iter: int = 3000
    patience: int = 200
    tol_improve: float = 1e-9
    sizes: tuple | None = None
    dim_max: int = DIM_MAX


@dataclass(frozen=True, eq=False)
class DecompositionParam:
    isometry: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] < v.shape[1]:
            raise InvalidIsometry(f"isometry must be k x r with k >= r, got shape {v.shape}")
        err = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))
        if err > ISO_TOL:
            raise InvalidIsometry(f"columns not orthonormal (error {err:.3e})")
        object.__setattr__(self, "isometry", _frozen(v))

    @property
    def k(self) -> int:
        return self.isometry.shape[0]

    @property
    def rank(self) -> int:
        return self.isometry.shape[1]


@dataclass
class SolveReport:
    value: float
    best_ensemble: Ensemble
    best_mu: CoherenceVector
    restarts_used: int
    converged: bool
    method: str
    upper_bound: bool = True
    extra: dict = field(default_factory=dict)

    def optimal_pure_state(self) -> PureState:
        from .majorization import pure_from_vector

        return pure_from_vector(self.best_mu)


def eigen_factor(rho: DensityMatrix) -> np.ndarray:
    """Rows ``sqrt(lam_a) e_a`` for the eigenvalues above the rank threshold."""
    lam, vecs = np.linalg.eigh(rho.data)
    keep = lam > RANK_TOL
    lam, vecs = lam[keep][::-1], vecs[:, keep][:, ::-1]
    return np.sqrt(lam)[:, None] * vecs.T


def decomposition_from_isometry(rho: DensityMatrix, param: DecompositionParam) -> Ensemble:
    base = eigen_factor(rho)
    if param.rank != base.shape[0]:
        raise RankMismatch(f"isometry has {param.rank} columns but rho has rank {base.shape[0]}")
    if base.shape[0] == 1:
        # every member of a pure state's decomposition is that state up to a phase
        return Ensemble(((1.0, PureState(_frozen(base[0] / np.linalg.norm(base[0])))),))
    members = param.isometry @ base
    weights = np.sum(np.abs(members) ** 2, axis=1)
    entries = []
    for w, vec in zip(weights, members):
        if w <= RANK_TOL * RANK_TOL:
            continue
        entries.append((w, PureState(_frozen(vec / math.sqrt(w)))))
    total = sum(w for w, _ in entries)
    return Ensemble(tuple((w / total, s) for w, s in entries))


def _sorted_members(members: np.ndarray):
    """Weights and descending coherence vectors; works on stacked batches."""
    sq = np.abs(members) ** 2
    weights = sq.sum(axis=-1)
    safe = np.where(weights > 0, weights, 1.0)
    mu = -np.sort(-(sq / safe[..., None]), axis=-1)
    return weights, mu


def cm_objective_batch(members: np.ndarray, f: PureCoherenceFunctional) -> np.ndarray:
    # p_i * mu_desc(phi_i) is just the sorted |phi~_i|^2, no normalisation needed
    sq = members.real**2 + members.imag**2
    agg = np.sum(np.sort(sq, axis=-1)[..., ::-1], axis=-2)
    return f.rows(agg)


def cf_objective_batch(members: np.ndarray, f: PureCoherenceFunctional) -> np.ndarray:
    weights, mu = _sorted_members(members)
    return np.sum(weights * f.rows(mu), axis=-1)


def _objective(kind: str):
    return cm_objective_batch if kind == "cm" else cf_objective_batch


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(1, k, rng)[0]


def haar_unitaries(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random ``k x k`` unitaries (QR of Ginibre with phase fix)."""
    z = (rng.normal(size=(n, k, k)) + 1j * rng.normal(size=(n, k, k))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def _givens(v: np.ndarray, p: int, q: int, theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    out = v.copy()
    out[p] = c * v[p] - e * s * v[q]
    out[q] = e.conjugate() * s * v[p] + c * v[q]
    return out


class _Tracker:
    """Per-member cache so a two-row rotation is scored without a full recompute.

    For the monotone only the sorted squared moduli of each member matter; for
    the roof each member contributes ``p_i f(mu_i)``.
    """

    def __init__(self, members: np.ndarray, f: PureCoherenceFunctional, kind: str):
        self.f, self.kind = f, kind
        self.members = members
        sq = members.real**2 + members.imag**2
        self.sorted_sq = np.sort(sq, axis=1)[:, ::-1].copy()
        if kind == "cm":
            self.acc = self.sorted_sq.sum(axis=0)
        else:
            self.contrib = np.array([self._member_score(row) for row in self.sorted_sq])
            self.acc = float(self.contrib.sum())
        self.value = self._score(self.acc)

    def _member_score(self, row: np.ndarray) -> float:
        w = float(row.sum())
        return w * self.f.func(row / w) if w > 0 else 0.0

    def _score(self, acc) -> float:
        return float(self.f.func(acc)) if self.kind == "cm" else float(acc)

    def propose(self, p: int, q: int, rows: np.ndarray):
        sq = rows.real**2 + rows.imag**2
        srt = np.sort(sq, axis=1)[:, ::-1]
        if self.kind == "cm":
            acc = self.acc + (srt[0] + srt[1] - self.sorted_sq[p] - self.sorted_sq[q])
            fv = None
        else:
            fv = (self._member_score(srt[0]), self._member_score(srt[1]))
            acc = self.acc + (fv[0] + fv[1] - self.contrib[p] - self.contrib[q])
        return self._score(acc), (p, q, rows, srt, fv)

    def accept(self, move) -> None:
        p, q, rows, srt, fv = move
        self.members = self.members.copy()
        self.members[[p, q]] = rows
        self.sorted_sq[[p, q]] = srt
        if self.kind == "cm":
            self.acc = self.sorted_sq.sum(axis=0)
        else:
            self.contrib[[p, q]] = fv
            self.acc = float(self.contrib.sum())
        self.value = self._score(self.acc)


def _descend(v0, base, f, kind, rng, opts: SolveOptions):
    """Randomised Givens-angle descent from the isometry ``v0``.

    Each step rotates two random ensemble slots by a random angle; the step
    scale grows on success and shrinks on failure. Stops when the best value
    improves by less than ``tol_improve`` over ``patience`` steps. Rotating
    rows of ``V`` rotates the same rows of ``V @ base``, so only the members
    are tracked; the isometry is recovered at the end.
    """
    k = v0.shape[0]
    track = _Tracker(v0 @ base, f, kind)
    v = v0.copy()
    if k < 2:
        return v, track.value, True
    scale = 0.5
    checkpoint, since = track.value, 0
    converged = False
    # draw all randomness up front; per-call Generator overhead dominates otherwise
    firsts = rng.integers(k, size=opts.max_iter)
    offsets = rng.integers(1, k, size=opts.max_iter)
    kicks = rng.normal(size=opts.max_iter)
    phases = rng.uniform(0, 2 * math.pi, size=opts.max_iter)
    for it in range(opts.max_iter):
        p = int(firsts[it])
        q = (p + int(offsets[it])) % k
        theta, phi = scale * float(kicks[it]), float(phases[it])
        c, s = math.cos(theta), math.sin(theta)
        e = complex(math.cos(phi), math.sin(phi))
        mp, mq = track.members[p], track.members[q]
        rows = np.array([c * mp - e * s * mq, e.conjugate() * s * mp + c * mq])
        val, move = track.propose(p, q, rows)
        if val < track.value:
            track.accept(move)
            v = _givens(v, p, q, theta, phi)
            scale = min(scale * 1.5, math.pi)
        else:
            scale = max(scale * 0.95, 1e-6)
        since += 1
        if since >= opts.patience:
            if checkpoint - track.value < opts.tol_improve:
                converged = True
                break
            checkpoint, since = track.value, 0
    return v, track.value, converged


def _check_dim(rho: DensityMatrix, opts: SolveOptions) -> None:
    if rho.dim > opts.dim_max:
        raise DimensionTooLarge(f"dim {rho.dim} exceeds dim_max {opts.dim_max}")


def _warn_custom(f: PureCoherenceFunctional, dim: int, seed: int) -> None:
    if f.kind != "custom":
        return
    rep = probe_functional(f, dim, trials=200, seed=seed)
    if not rep.ok:
        warnings.warn(
            f"functional {f.name!r} failed sampled checks: {rep.symmetry_violations} symmetry, "
            f"{rep.concavity_violations} concavity, {rep.endpoint_violations} endpoint",
            RuntimeWarning,
            stacklevel=3,
        )


def _incoherent_report(rho: DensityMatrix, method: str) -> SolveReport:
    d = rho.dim
    entries = []
    for i, w in enumerate(rho.diagonal):
        if w > RANK_TOL:
            v = np.zeros(d, dtype=np.complex128)
            v[i] = 1.0
            entries.append((w, PureState(_frozen(v))))
    total = sum(w for w, _ in entries)
    ens = Ensemble(tuple((w / total, s) for w, s in entries))
    return SolveReport(0.0, ens, aggregate_vector(ens), 0, True, method, upper_bound=False)


def _sizes(rank: int, dim: int, opts: SolveOptions) -> tuple:
    if opts.sizes is not None:
        return tuple(k for k in opts.sizes if k >= rank) or (rank,)
    return tuple(range(rank, max(dim * dim, rank) + 1))


def _build_report(rho, f, kind, v, base, restarts, converged, method) -> SolveReport:
    ens = decomposition_from_isometry(rho, DecompositionParam(_orthonormalize(v)))
    mu = aggregate_vector(ens)
    if kind == "cm":
        value = f(mu)
    else:
        value = float(sum(w * f(np.abs(s.amplitudes) ** 2) for w, s in ens.entries))
    return SolveReport(float(value), ens, mu, restarts, converged, method)


def _orthonormalize(v: np.ndarray) -> np.ndarray:
    # repeated Givens updates drift by ~1e-16 per step; re-project before validation
    u, _, vh = np.linalg.svd(v, full_matrices=False)
    return u @ vh


def _optimize(rho, f, opts: SolveOptions, kind: str) -> SolveReport:
    _check_dim(rho, opts)
    if is_incoherent_state(rho):
        return _incoherent_report(rho, "incoherent")
    _warn_custom(f, rho.dim, opts.seed)
    base = eigen_factor(rho)
    r = base.shape[0]
    if r == 1:
        return _build_report(rho, f, kind, np.eye(1), base, 0, True, "pure")
    sizes = _sizes(r, rho.dim, opts)
    children = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    best = (math.inf, -1, None, False)
    for idx, child in enumerate(children):
        rng = np.random.default_rng(child)
        k = sizes[idx % len(sizes)]
        if idx == 0:
            v0 = np.eye(k, r, dtype=np.complex128)
        else:
            v0 = haar_unitary(k, rng)[:, :r]
        v, val, conv = _descend(v0, base, f, kind, rng, opts)
        # strict < keeps the lowest restart index on ties
        if val < best[0]:
            best = (val, idx, v, conv)
    _, _, v, conv = best
    return _build_report(rho, f, kind, v, base, opts.restarts, conv, "optimize" if kind == "cm" else "roof")


def cm_estimate(rho: DensityMatrix, f: PureCoherenceFunctional, opts: SolveOptions | None = None,
                pool=None) -> SolveReport:
    """Upper bound on the conversion monotone of ``rho`` under functional ``f``.

    With ``pool`` (a list of isometries) only those decompositions are scored,
    which lets the monotone and the roof be compared on identical candidates.
    """
    opts = opts or SolveOptions()
    if pool is not None:
        return evaluate_pool(rho, f, pool, "cm")
    return _optimize(rho, f, opts, "cm")


def cf_estimate(rho: DensityMatrix, f: PureCoherenceFunctional, opts: SolveOptions | None = None,
                pool=None) -> SolveReport:
    """Upper bound on the convex roof of ``f`` at ``rho``."""
    opts = opts or SolveOptions()
    if pool is not None:
        return evaluate_pool(rho, f, pool, "cf")
    return _optimize(rho, f, opts, "cf")


def candidate_pool(rho: DensityMatrix, n: int, seed: int, sizes=None) -> list[np.ndarray]:
    """Eigen-decomposition plus ``n`` Haar-random isometries over ``sizes``."""
    r = eigen_factor(rho).shape[0]
    sizes = tuple(k for k in (sizes or range(r, rho.dim**2 + 1)) if k >= r) or (r,)
    rng = np.random.default_rng(seed)
    pool = [np.eye(r, dtype=np.complex128)]
    for j in range(n):
        k = sizes[j % len(sizes)]
        pool.append(haar_unitary(k, rng)[:, :r])
    return pool


def evaluate_pool(rho: DensityMatrix, f: PureCoherenceFunctional, pool, kind: str) -> SolveReport:
    base = eigen_factor(rho)
    obj = _objective(kind)
    best_val, best_v = math.inf, None
    for v in pool:
        if v.shape[1] != base.shape[0]:
            raise RankMismatch(f"pool isometry has {v.shape[1]} columns, rho has rank {base.shape[0]}")
        val = float(obj(v @ base, f))
        if val < best_val:
            best_val, best_v = val, v
    return _build_report(rho, f, kind, best_v, base, len(pool), True, "pool")


# --- qubits -----------------------------------------------------------------


def _qubit_parts(sigma: DensityMatrix):
    if sigma.dim != 2:
        raise ValueError(f"expected a qubit state, got dim {sigma.dim}")
    b = complex(sigma.data[0, 1])
    mod_b = min(abs(b), 0.5)
    return b, mod_b, qubit_z(mod_b)


def qubit_z(mod_b: float) -> float:
    z2 = 1.0 - 4.0 * mod_b * mod_b
    # the square root magnifies last-bit error in |b| near 1/2 to ~1e-8
    if z2 < 8 * np.finfo(float).eps:
        return 0.0
    return math.sqrt(z2)


def qubit_mu(mod_b: float) -> np.ndarray:
    """Sorted coherence vector of a qubit pure state with off-diagonal modulus ``mod_b``."""
    z = qubit_z(mod_b)
    return np.array([(1 + z) / 2, (1 - z) / 2])


def qubit_optimal_decomposition(sigma: DensityMatrix):
    """Two pure states sharing the off-diagonal ``b`` of ``sigma`` and mixing to it.

    Returns ``(lam, plus, minus)`` with ``sigma = lam |plus><plus| + (1-lam) |minus><minus|``.
    """
    b, mod_b, z = _qubit_parts(sigma)
    phase = b / abs(b) if abs(b) > 0 else 1.0
    s00 = float(sigma.data[0, 0].real)
    if z > 0:
        lam = (2.0 * s00 - 1.0 + z) / (2.0 * z)
    else:
        lam = 0.5
    if not -1e-9 <= lam <= 1 + 1e-9:
        raise AssertionError(f"weight {lam} outside [0, 1]; input was not a valid state")
    lam = min(max(lam, 0.0), 1.0)
    hi, lo = math.sqrt((1 + z) / 2), math.sqrt((1 - z) / 2)
    plus = PureState(_frozen(np.array([hi, lo * np.conj(phase)])))
    minus = PureState(_frozen(np.array([lo, hi * np.conj(phase)])))
    return lam, plus, minus


def qubit_cm(sigma: DensityMatrix, f: PureCoherenceFunctional, certify_convexity: bool = False) -> float:
    """Closed-form monotone for a qubit: ``f`` at ``((1+z)/2, (1-z)/2)``, ``z = sqrt(1-4|b|^2)``."""
    _, mod_b, _ = _qubit_parts(sigma)
    if certify_convexity:
        worst = qubit_convexity_probe(f)
        if worst < -1e-12:
            warnings.warn(
                f"{f.name} is not convex in |b| (second difference {worst:.3e}); "
                "the qubit value is a monotone but not a convex measure",
                RuntimeWarning,
                stacklevel=2,
            )
    return f(qubit_mu(mod_b))


def qubit_profile(f: PureCoherenceFunctional, n: int = 2001) -> tuple[np.ndarray, np.ndarray]:
    b = np.linspace(0.0, 0.5, n)
    z = np.sqrt(np.clip(1.0 - 4.0 * b * b, 0.0, None))
    mu = np.stack([(1 + z) / 2, (1 - z) / 2], axis=-1)
    return b, f.rows(mu)


def qubit_convexity_probe(f: PureCoherenceFunctional, n: int = 2001) -> float:
    """Smallest second difference of ``|b| -> F`` on a uniform grid over [0, 1/2]."""
    _, vals = qubit_profile(f, n)
    return float(np.min(vals[:-2] - 2 * vals[1:-1] + vals[2:]))


def _analytic_qubit_report(sigma: DensityMatrix, f: PureCoherenceFunctional) -> SolveReport:
    lam, plus, minus = qubit_optimal_decomposition(sigma)
    entries = tuple((w, s) for w, s in ((lam, plus), (1 - lam, minus)) if w > 0)
    ens = Ensemble(entries)
    mu = CoherenceVector(qubit_mu(_qubit_parts(sigma)[1]), sorted=True)
    return SolveReport(qubit_cm(sigma, f), ens, mu, 0, True, "analytic", upper_bound=False)


def cm_analytic(sigma: DensityMatrix, f: PureCoherenceFunctional) -> SolveReport:
    return _analytic_qubit_report(sigma, f)


def cm_geometric(rho: DensityMatrix, opts: SolveOptions | None = None) -> SolveReport:
    """Geometric monotone: closed form for qubits, convex-roof search otherwise.

    For the geometric functional the monotone and the roof agree on every
    single decomposition, so the roof search minimises the same quantity.
    """
    if rho.dim == 2:
        return _analytic_qubit_report(rho, GEOMETRIC)
    return cf_estimate(rho, GEOMETRIC, opts)


# --- brute-force oracle -----------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Search grid for :func:`brute_force_cm`.

    For a full-rank qubit every two-member decomposition is
    ``R(theta) diag(1, e^{i chi})`` up to irrelevant row phases; both angles
    are gridded with ``n_angles`` points. Larger ensembles, and all of dim 3,
    use ``n_samples`` random isometries per size.
    """

    n_angles: int = 720
    sizes: tuple = (2, 3, 4)
    n_samples: int = 2000
    seed: int = 0


def _qubit_grid_min(base: np.ndarray, f: PureCoherenceFunctional, n_angles: int) -> float:
    theta = np.linspace(0.0, math.pi / 2, n_angles)
    chi = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    # members of V @ base for V = [[c, -s e], [s, c e]], e = exp(i chi), expanded
    # into real arithmetic: |c b0 - s e b1|^2 = c^2|b0|^2 + s^2|b1|^2 - 2cs Re(e b1 b0*)
    c2 = (np.cos(theta) ** 2)[:, None]
    s2 = (np.sin(theta) ** 2)[:, None]
    cs2 = (2 * np.cos(theta) * np.sin(theta))[:, None]
    a = np.abs(base[0]) ** 2
    b = np.abs(base[1]) ** 2
    cross = [cs2 * np.real(np.exp(1j * chi) * base[1, j] * np.conj(base[0, j]))[None, :] for j in range(2)]
    first = [np.maximum(c2 * a[j] + s2 * b[j] - cross[j], 0.0) for j in range(2)]
    second = [np.maximum(s2 * a[j] + c2 * b[j] + cross[j], 0.0) for j in range(2)]
    # p_i mu_desc(phi_i) summed over the two members
    hi = np.maximum(*first) + np.maximum(*second)
    lo = np.minimum(*first) + np.minimum(*second)
    return float(np.min(f.rows(np.stack([hi, lo], axis=-1))))


def brute_force_cm(rho: DensityMatrix, f: PureCoherenceFunctional, grid: GridSpec | None = None) -> float:
    """Grid/sampling minimum of the monotone objective; the test oracle."""
    grid = grid or GridSpec()
    if rho.dim > 3:
        raise DimensionTooLarge(f"brute force supports dim <= 3, got {rho.dim}")
    base = eigen_factor(rho)
    r = base.shape[0]
    if r == 1:
        return float(cm_objective_batch(base[None], f)[0])
    rng = np.random.default_rng(grid.seed)
    best = float(cm_objective_batch(base[None], f)[0])
    if rho.dim == 2 and r == 2:
        best = min(best, _qubit_grid_min(base, f, grid.n_angles))
    for k in grid.sizes:
        if k < r or (rho.dim == 2 and k == r):
            continue
        vs = haar_unitaries(grid.n_samples, k, rng)[:, :, :r]
        best = min(best, float(np.min(cm_objective_batch(vs @ base, f))))
    return best


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0

"""
Kraus channels, incoherent-class membership tests and the constructive
channels used to move between pure states and mixed states.

Strictly incoherent channels built here keep a *normal form*: every Kraus
operator is stored as ``(perm, amp)`` with ``K = sum_g amp[g] |perm[g]><g|``.
The composite constructions (:func:`build_T_channel`, :func:`build_N_channel`)
read amplitudes and permutations straight from that form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CoherenceError,
    DimensionMismatch,
    DivisionByZeroAmplitude,
    FactorizationFailure,
    NotCPTP,
    NotNormalForm,
    NotProbabilityVector,
    SingularDiagonal,
)
from .states import DensityMatrix, PureState, _frozen, tol_chan, validate_density

CLASS_ORDER = ("CPTP", "IO", "SIO", "MIO", "DIO")
EIG_DROP = 1e-12


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: tuple
    classes: frozenset = field(default_factory=frozenset)
    normal_form: tuple | None = None

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def tags(self) -> list[str]:
        return [c for c in CLASS_ORDER if c in self.classes]

    def __len__(self) -> int:
        return len(self.kraus)

    def __repr__(self) -> str:
        return f"QuantumChannel({self.dim_in}->{self.dim_out}, {len(self)} Kraus, {self.tags})"


@dataclass(frozen=True, eq=False)
class InstrumentOutcome:
    probability: float
    state: DensityMatrix
    index: int


def _as_kraus(kraus) -> tuple:
    ops = tuple(_frozen(np.atleast_2d(np.asarray(k, dtype=np.complex128))) for k in kraus)
    if not ops:
        raise CoherenceError("a channel needs at least one Kraus operator")
    shapes = {k.shape for k in ops}
    if len(shapes) != 1:
        raise DimensionMismatch(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
    for k in ops:
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus operator contains NaN or Inf")
    return ops


def _apply_raw(kraus, m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ k.conj().T for k in kraus)


def _offdiag_max(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0))


def _structural_counts(k: np.ndarray, tol: float) -> tuple[int, int]:
    nz = np.abs(k) > tol
    return int(nz.sum(axis=0).max()), int(nz.sum(axis=1).max())


def _is_io(kraus, tol: float) -> bool:
    return all(_structural_counts(k, tol)[0] <= 1 for k in kraus)


def _is_sio(kraus, tol: float) -> bool:
    return all(max(_structural_counts(k, tol)) <= 1 for k in kraus)


def _is_mio(kraus, tol: float) -> bool:
    d = kraus[0].shape[1]
    for i in range(d):
        unit = np.zeros((d, d), dtype=np.complex128)
        unit[i, i] = 1.0
        if _offdiag_max(_apply_raw(kraus, unit)) > tol:
            return False
    return True


def _is_dio(kraus, tol: float) -> bool:
    d = kraus[0].shape[1]
    for m in range(d):
        for n in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[m, n] = 1.0
            out = _apply_raw(kraus, unit)
            lhs = np.diag(np.diag(out))
            rhs = out if m == n else np.zeros_like(out)
            if np.max(np.abs(lhs - rhs)) > tol:
                return False
    return True


def extract_normal_form(kraus, tol: float | None = None) -> tuple:
    """Read ``(perm, amp)`` pairs off square Kraus operators.

    Columns without a nonzero entry are routed to the unused rows in
    increasing order, so every ``perm`` is a genuine permutation.
    """
    tol = tol_chan() if tol is None else tol
    form = []
    for k in kraus:
        d_out, d_in = k.shape
        if d_out != d_in:
            raise NotNormalForm("normal form needs square Kraus operators")
        nz = np.abs(k) > tol
        if nz.sum(axis=0).max(initial=0) > 1 or nz.sum(axis=1).max(initial=0) > 1:
            raise NotNormalForm("a Kraus operator has more than one nonzero entry in a row or column")
        perm = np.full(d_in, -1, dtype=int)
        amp = np.zeros(d_in, dtype=np.complex128)
        for g in range(d_in):
            rows = np.flatnonzero(nz[:, g])
            if rows.size:
                perm[g] = rows[0]
                amp[g] = k[rows[0], g]
        free_rows = iter(sorted(set(range(d_out)) - set(perm[perm >= 0].tolist())))
        for g in range(d_in):
            if perm[g] < 0:
                perm[g] = next(free_rows)
        form.append((perm, amp))
    return tuple(form)


def kraus_from_normal_form(form) -> tuple:
    ops = []
    for perm, amp in form:
        d = len(perm)
        k = np.zeros((d, d), dtype=np.complex128)
        k[perm, np.arange(d)] = amp
        ops.append(k)
    return tuple(ops)


def classify(kraus, tol: float | None = None) -> QuantumChannel:
    """Certify the class tags of a Kraus set.

    Raises
    ------
    NotCPTP
        If ``sum K^dagger K`` differs from the identity by more than ``tol``.
    """
    tol = tol_chan() if tol is None else tol
    ops = _as_kraus(kraus)
    d_in = ops[0].shape[1]
    deficit = float(np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(d_in))))
    if deficit > tol:
        raise NotCPTP(f"max |sum K^dagger K - I| = {deficit:.3e} exceeds {tol:.1e}")
    classes = {"CPTP"}
    if _is_io(ops, tol):
        classes.add("IO")
    if "IO" in classes and _is_sio(ops, tol):
        classes.add("SIO")
    if _is_mio(ops, tol):
        classes.add("MIO")
    if _is_dio(ops, tol):
        classes.add("DIO")
    form = None
    if "SIO" in classes and ops[0].shape[0] == d_in:
        form = extract_normal_form(ops, tol)
    return QuantumChannel(ops, frozenset(classes), form)


def _check_dims(ch: QuantumChannel, rho: DensityMatrix) -> None:
    if ch.dim_in != rho.dim:
        raise DimensionMismatch(f"channel input dim {ch.dim_in} != state dim {rho.dim}")


def apply(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    _check_dims(ch, rho)
    out = _apply_raw(ch.kraus, rho.data)
    return validate_density(0.5 * (out + out.conj().T), tol=max(tol_chan(), 1e-9))


def instrument(ch: QuantumChannel, rho: DensityMatrix) -> list[InstrumentOutcome]:
    """Selective outcomes ``(p_n, K_n rho K_n^dagger / p_n)``; negligible branches dropped."""
    _check_dims(ch, rho)
    outcomes = []
    for n, k in enumerate(ch.kraus):
        branch = k @ rho.data @ k.conj().T
        p = float(np.trace(branch).real)
        if p <= tol_chan():
            continue
        branch = branch / p
        state = validate_density(0.5 * (branch + branch.conj().T), tol=max(tol_chan(), 1e-9))
        outcomes.append(InstrumentOutcome(p, state, n))
    return outcomes


def identity_channel(d: int) -> QuantumChannel:
    return classify([np.eye(d)])


def full_dephasing_channel(d: int) -> QuantumChannel:
    ops = []
    for i in range(d):
        p = np.zeros((d, d))
        p[i, i] = 1.0
        ops.append(p)
    return classify(ops)


def _normal_form_channel(form) -> QuantumChannel:
    ch = classify(kraus_from_normal_form(form))
    return QuantumChannel(ch.kraus, ch.classes, tuple((np.asarray(p), np.asarray(a)) for p, a in form))


def build_preparation_channel(sigma_diag: Sequence[float], tol: float | None = None) -> QuantumChannel:
    """Channel taking the first basis state to ``diag(sigma_diag)``.

    Kraus operator j is ``sqrt(sigma_j)`` times the cyclic shift by j, so
    ``|0> -> sqrt(sigma_j)|j>``. Zero-weight operators are omitted.
    """
    tol = tol_chan() if tol is None else tol
    s = np.asarray(sigma_diag, dtype=float)
    if s.ndim != 1 or s.size == 0 or not np.all(np.isfinite(s)):
        raise NotProbabilityVector("target must be a finite non-empty vector")
    if np.any(s < -tol) or abs(s.sum() - 1.0) > tol:
        raise NotProbabilityVector(f"entries {s} are not a probability vector")
    s = np.clip(s, 0.0, None)
    d = s.size
    form = []
    for j in range(d):
        if s[j] == 0.0:
            continue
        perm = (np.arange(d) + j) % d
        form.append((perm, np.full(d, np.sqrt(s[j]), dtype=np.complex128)))
    return _normal_form_channel(form)


def canonical_pure_state(rho: DensityMatrix) -> PureState:
    """Pure state with amplitudes sqrt(rho_ii) and zero phases."""
    diag = np.clip(rho.diagonal, 0.0, None)
    return PureState(_frozen(np.sqrt(diag / diag.sum())))


def correlation_matrix(rho: DensityMatrix, support: np.ndarray) -> np.ndarray:
    diag = rho.diagonal[support]
    sub = rho.data[np.ix_(support, support)]
    scale = np.sqrt(np.outer(diag, diag))
    gamma = sub / scale
    np.fill_diagonal(gamma, 1.0)
    return gamma


def build_dephasing_channel(
    rho: DensityMatrix, restrict_support: bool = True, tol: float | None = None
) -> QuantumChannel:
    """Diagonal-Kraus channel taking ``canonical_pure_state(rho)`` to ``rho``.

    The correlation matrix ``G_mn = rho_mn / sqrt(rho_mm rho_nn)`` is factored
    as ``A^dagger A`` through its eigendecomposition; row j of ``A`` gives the
    diagonal of Kraus operator j.
    """
    tol = tol_chan() if tol is None else tol
    d = rho.dim
    diag = rho.diagonal
    support = np.flatnonzero(diag > tol)
    if support.size < d and not restrict_support:
        raise SingularDiagonal(f"diagonal entries {np.flatnonzero(diag <= tol).tolist()} vanish")
    gamma = correlation_matrix(rho, support)
    lam, u = np.linalg.eigh(0.5 * (gamma + gamma.conj().T))
    if lam[0] < -tol:
        raise FactorizationFailure(f"correlation matrix has eigenvalue {lam[0]:.3e}")
    keep = lam > EIG_DROP
    a = np.sqrt(lam[keep])[:, None] * u[:, keep].conj().T
    a = a / np.linalg.norm(a, axis=0)

    ops = []
    for row in a:
        diag_k = np.zeros(d, dtype=np.complex128)
        diag_k[support] = row.conj()
        ops.append(np.diag(diag_k))
    if support.size < d:
        off = np.setdiff1d(np.arange(d), support)
        pad = np.zeros(d)
        pad[off] = 1.0
        ops[0] = ops[0] + np.diag(pad)
    return classify(ops)


def _normal_form(ch: QuantumChannel) -> tuple:
    if ch.normal_form is not None:
        return ch.normal_form
    return extract_normal_form(ch.kraus)


def _composite_amplitudes(M: QuantumChannel, K: QuantumChannel) -> np.ndarray:
    """``w[i, l, g] = a_g^(l) * tau^(i)_{pi_l(g)}``."""
    m_form, k_form = _normal_form(M), _normal_form(K)
    if M.dim_in != K.dim_in:
        raise DimensionMismatch(f"M acts on dim {M.dim_in}, K on dim {K.dim_in}")
    w = np.empty((len(k_form), len(m_form), M.dim_in), dtype=np.complex128)
    for i, (_, tau) in enumerate(k_form):
        for l, (pi, a) in enumerate(m_form):
            w[i, l] = a * tau[pi]
    return w


def build_T_channel(M: QuantumChannel, K: QuantumChannel) -> QuantumChannel:
    """Diagonal SIO whose outcome i on a pure input has the same probability
    as outcome i of ``K`` applied after ``M``.

    ``|d_g^(i)|^2 = sum_l |a_g^(l)|^2 |tau^(i)_{pi_l(g)}|^2``; amplitudes are
    taken real and non-negative. The Kraus list is index-aligned with ``K``.
    """
    w = _composite_amplitudes(M, K)
    d_amp = np.sqrt(np.sum(np.abs(w) ** 2, axis=1))
    d = M.dim_in
    form = tuple((np.arange(d), d_amp[i].astype(np.complex128)) for i in range(d_amp.shape[0]))
    return _normal_form_channel(form)


def build_N_channel(M: QuantumChannel, K: QuantumChannel, T: QuantumChannel, i: int) -> QuantumChannel:
    """SIO mapping ``T_i psi psi^dagger T_i^dagger`` to ``K_i M(psi psi^dagger) K_i^dagger``.

    ``N_l = sum_g (a_g^(l) tau^(i)_{pi_l(g)} / d_g^(i)) |f_i(pi_l(g))><g|``.
    Columns where ``d_g^(i)`` vanishes carry no weight after ``T_i``; they are
    dropped from every ``N_l`` and sent through one extra diagonal projector so
    the result stays trace preserving.
    """
    tol = tol_chan()
    m_form, k_form, t_form = _normal_form(M), _normal_form(K), _normal_form(T)
    if not 0 <= i < len(k_form):
        raise IndexError(f"outcome index {i} out of range for {len(k_form)} Kraus operators")
    if len(t_form) != len(k_form):
        raise CoherenceError("T must be index-aligned with K")
    t_perm, d_amp = t_form[i]
    if np.any(t_perm != np.arange(len(t_perm))):
        raise NotNormalForm("T must have diagonal Kraus operators")
    f_i, tau = k_form[i]
    w = _composite_amplitudes(M, K)[i]
    expected = np.sum(np.abs(w) ** 2, axis=0)
    if np.max(np.abs(np.abs(d_amp) ** 2 - expected)) > tol:
        raise CoherenceError("T does not match the amplitudes of M and K")

    dim = M.dim_in
    live = np.abs(d_amp) > tol
    if np.any(~live & (expected > tol)):
        raise DivisionByZeroAmplitude("a column with weight has zero T amplitude")
    form = []
    for l, (pi, _) in enumerate(m_form):
        amp = np.zeros(dim, dtype=np.complex128)
        amp[live] = w[l, live] / d_amp[live]
        form.append((f_i[pi], amp))
    if np.any(~live):
        pad = np.zeros(dim, dtype=np.complex128)
        pad[~live] = 1.0
        form.append((np.arange(dim), pad))
    return _normal_form_channel(form)


def random_sio(dim: int, n_kraus: int, seed: int) -> QuantumChannel:
    """Random SIO in normal form; deterministic in ``seed``."""
    if n_kraus < 1:
        raise ValueError("n_kraus must be >= 1")
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=(n_kraus, dim)) + 1j * rng.normal(size=(n_kraus, dim))
    amps /= np.linalg.norm(amps, axis=0)
    form = tuple((rng.permutation(dim), amps[j]) for j in range(n_kraus))
    return _normal_form_channel(form)


def random_io(dim: int, seed: int, n_sio: int = 2, n_merge: int = 2) -> QuantumChannel:
    """Random incoherent channel that is generally not strictly incoherent.

    Composes a random SIO with a rank-one incoherent stage
    ``R_k = |r_k><w_k|`` where the ``w_k`` are the rows of a random isometry.
    """
    rng = np.random.default_rng(seed)
    sio = random_sio(dim, n_sio, int(rng.integers(2**32)))
    g = rng.normal(size=(n_merge * dim, dim)) + 1j * rng.normal(size=(n_merge * dim, dim))
    iso, _ = np.linalg.qr(g)
    merge = []
    for row in iso:
        r = np.zeros((dim, dim), dtype=np.complex128)
        r[rng.integers(dim)] = row.conj()
        merge.append(r)
    ops = [r @ s for r in merge for s in sio.kraus]
    if rng.uniform() < 0.5:
        ops = [s @ r for r in merge for s in sio.kraus]
    return classify(ops)

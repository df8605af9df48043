import math

import mpmath as mp
import numpy as np
import pytest

from coherence_monotone.errors import DimensionTooLarge, InvalidIsometry, RankMismatch
from coherence_monotone.majorization import Ensemble, aggregate_vector, majorizes
from coherence_monotone.measures import GEOMETRIC, L1, RELATIVE_ENTROPY, custom_functional
from coherence_monotone.solver import (
    DecompositionParam,
    GridSpec,
    SolveOptions,
    brute_force_cm,
    candidate_pool,
    cf_estimate,
    cm_analytic,
    cm_estimate,
    cm_geometric,
    decomposition_from_isometry,
    haar_unitary,
    qubit_cm,
    qubit_convexity_probe,
    qubit_optimal_decomposition,
)
from coherence_monotone.states import (
    basis_state,
    maximally_mixed,
    mcs_state,
    random_density,
    random_pure,
    random_qubit,
    validate_density,
)

from conftest import SIGMA

# closed forms evaluated independently of the library
GEO_SIGMA = (1 - math.sqrt(0.75)) / 2
FAST = SolveOptions(seed=3, restarts=6, max_iter=1500)


def relent_sigma_mp():
    with mp.workdps(40):
        p = (1 + mp.sqrt(mp.mpf(3) / 4)) / 2
        return float(-p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2))


class TestDecomposition:
    def test_identity_gives_eigendecomposition(self, sigma):
        ens = decomposition_from_isometry(sigma, DecompositionParam(np.eye(2)))
        lam, vecs = np.linalg.eigh(SIGMA)
        got = sorted(w for w, _ in ens.entries)
        np.testing.assert_allclose(got, sorted(lam), atol=1e-14)
        np.testing.assert_allclose(ens.mixture(), SIGMA, atol=1e-14)

    def test_hadamard_on_maximally_mixed(self):
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        ens = decomposition_from_isometry(maximally_mixed(2), DecompositionParam(h))
        assert [w for w, _ in ens.entries] == pytest.approx([0.5, 0.5])
        for _, s in ens.entries:
            np.testing.assert_allclose(np.abs(s.amplitudes) ** 2, [0.5, 0.5], atol=1e-15)
        overlap = np.vdot(ens.entries[0][1].amplitudes, ens.entries[1][1].amplitudes)
        assert abs(overlap) < 1e-15

    def test_pure_single_member(self, rng):
        rho = random_pure(3, rng).projector()
        v = haar_unitary(4, rng)[:, :1]
        ens = decomposition_from_isometry(rho, DecompositionParam(v))
        assert len(ens.entries) == 1

    def test_larger_ensembles_mix_to_rho(self, rng):
        rho = random_density(3, rng)
        for k in (3, 5, 9):
            ens = decomposition_from_isometry(rho, DecompositionParam(haar_unitary(k, rng)[:, :3]))
            np.testing.assert_allclose(ens.mixture(), rho.data, atol=1e-12)

    def test_errors(self, sigma):
        with pytest.raises(InvalidIsometry):
            DecompositionParam(np.ones((2, 2)))
        with pytest.raises(InvalidIsometry):
            DecompositionParam(np.eye(3)[:2])
        with pytest.raises(RankMismatch):
            decomposition_from_isometry(sigma, DecompositionParam(np.eye(3)))


class TestQubitClosedForm:
    def test_optimal_decomposition_sigma(self, sigma):
        lam, plus, minus = qubit_optimal_decomposition(sigma)
        assert lam == pytest.approx((0.5 + math.sqrt(0.75)) / (2 * math.sqrt(0.75)), abs=1e-15)
        assert lam == pytest.approx(0.788675, abs=1e-6)
        mix = lam * plus.projector().data + (1 - lam) * minus.projector().data
        np.testing.assert_allclose(mix, SIGMA, atol=1e-15)

    def test_phase_carried_entrywise(self, rng):
        for _ in range(20):
            s = random_qubit(rng)
            lam, plus, minus = qubit_optimal_decomposition(s)
            b = s.data[0, 1]
            assert plus.projector().data[0, 1] == pytest.approx(b, abs=1e-14)
            assert minus.projector().data[0, 1] == pytest.approx(b, abs=1e-14)
            mix = lam * plus.projector().data + (1 - lam) * minus.projector().data
            np.testing.assert_allclose(mix, s.data, atol=1e-12)

    def test_incoherent_qubit(self):
        lam, plus, minus = qubit_optimal_decomposition(maximally_mixed(2))
        assert lam == 0.5
        np.testing.assert_array_equal(plus.amplitudes, [1, 0])
        np.testing.assert_array_equal(minus.amplitudes, [0, 1])

    def test_mcs_degenerate(self):
        lam, plus, minus = qubit_optimal_decomposition(mcs_state(2).projector())
        assert lam == 0.5
        np.testing.assert_allclose(np.abs(plus.amplitudes) ** 2, [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(plus.amplitudes, minus.amplitudes, atol=1e-15)

    def test_values(self, sigma):
        assert qubit_cm(sigma, GEOMETRIC) == pytest.approx(GEO_SIGMA, abs=1e-15)
        assert qubit_cm(sigma, L1) == pytest.approx(0.5, abs=1e-14)
        assert qubit_cm(sigma, RELATIVE_ENTROPY) == pytest.approx(relent_sigma_mp(), abs=1e-14)

    def test_convexity_probe(self):
        for f in (GEOMETRIC, L1, RELATIVE_ENTROPY):
            assert qubit_convexity_probe(f) >= -1e-12

    def test_certify_warns_for_nonconvex_profile(self, sigma):
        # sqrt(2|b|) is concave in |b|
        f = custom_functional(lambda p: math.sqrt(L1(p)), "sqrtl1")
        with pytest.warns(RuntimeWarning):
            qubit_cm(sigma, f, certify_convexity=True)

    def test_optimal_dominates_random_decompositions(self, rng):
        for _ in range(30):
            s = random_qubit(rng)
            lam, plus, minus = qubit_optimal_decomposition(s)
            best = aggregate_vector(Ensemble(((lam, plus), (1 - lam, minus))))
            for k in (2, 3, 4):
                ens = decomposition_from_isometry(s, DecompositionParam(haar_unitary(k, rng)[:, :2]))
                assert majorizes(best, aggregate_vector(ens), tol=1e-9)

    def test_analytic_report(self, sigma):
        rep = cm_analytic(sigma, GEOMETRIC)
        assert rep.method == "analytic" and rep.upper_bound is False
        assert rep.value == pytest.approx(GEO_SIGMA, abs=1e-15)
        np.testing.assert_allclose(rep.best_ensemble.mixture(), SIGMA, atol=1e-14)


class TestBruteForce:
    def test_sigma(self, sigma):
        assert brute_force_cm(sigma, GEOMETRIC) == pytest.approx(0.066987, abs=1e-4)
        assert brute_force_cm(sigma, GEOMETRIC) == pytest.approx(qubit_cm(sigma, GEOMETRIC), abs=1e-4)

    def test_incoherent(self):
        assert brute_force_cm(validate_density(np.diag([0.2, 0.3, 0.5])), RELATIVE_ENTROPY, GridSpec(n_samples=50)) == 0

    def test_pure(self, rng):
        psi = random_pure(3, rng)
        mu = np.sort(np.abs(psi.amplitudes) ** 2)[::-1]
        assert brute_force_cm(psi.projector(), L1) == pytest.approx(L1(mu), abs=1e-12)

    def test_upper_bounds_closed_form(self, rng):
        for _ in range(5):
            s = random_qubit(rng)
            for f in (GEOMETRIC, RELATIVE_ENTROPY, L1):
                assert brute_force_cm(s, f, GridSpec(n_angles=90, n_samples=100)) >= qubit_cm(s, f) - 1e-12

    def test_dim_limit(self):
        with pytest.raises(DimensionTooLarge):
            brute_force_cm(maximally_mixed(4), GEOMETRIC)


class TestEstimates:
    def test_incoherent(self):
        rho = validate_density(np.diag([0.2, 0.3, 0.5]))
        for est in (cm_estimate, cf_estimate):
            rep = est(rho, RELATIVE_ENTROPY)
            assert rep.value == 0
            np.testing.assert_allclose(rep.best_ensemble.mixture(), rho.data)
            # realised by preparing sqrt of the diagonal, which is incoherent here
            assert rep.optimal_pure_state().amplitudes.tolist().count(0) == 2

    def test_sigma_geometric(self, sigma):
        assert cm_estimate(sigma, GEOMETRIC, FAST).value == pytest.approx(0.066987, abs=1e-6)
        assert cf_estimate(sigma, GEOMETRIC, FAST).value == pytest.approx(0.066987, abs=1e-6)
        assert cm_geometric(sigma).value == pytest.approx(GEO_SIGMA, abs=1e-15)

    def test_sigma_relent_matches_closed_form(self, sigma):
        assert cm_estimate(sigma, RELATIVE_ENTROPY, FAST).value == pytest.approx(relent_sigma_mp(), abs=1e-6)

    def test_pure(self, rng):
        psi = random_pure(3, rng)
        mu = np.abs(psi.amplitudes) ** 2
        for est in (cm_estimate, cf_estimate):
            rep = est(psi.projector(), RELATIVE_ENTROPY)
            assert rep.method == "pure"
            assert rep.value == pytest.approx(RELATIVE_ENTROPY(mu), abs=1e-12)
        assert cm_estimate(mcs_state(2).projector(), RELATIVE_ENTROPY).value == pytest.approx(1.0, abs=1e-12)

    def test_geometric_any_dim(self):
        assert cm_geometric(validate_density(np.diag([0.2, 0.3, 0.5]))).value == 0
        assert cm_geometric(mcs_state(3).projector()).value == pytest.approx(2 / 3, abs=1e-12)

    def test_deterministic(self, rng):
        rho = random_density(3, rng)
        opts = SolveOptions(seed=5, restarts=3, max_iter=400)
        a, b = cm_estimate(rho, L1, opts), cm_estimate(rho, L1, opts)
        assert a.value == b.value
        assert a.best_mu.probs.tolist() == b.best_mu.probs.tolist()

    def test_ordering_on_shared_pool(self, rng):
        for _ in range(5):
            rho = random_density(3, rng)
            pool = candidate_pool(rho, 50, seed=1)
            cm = cm_estimate(rho, RELATIVE_ENTROPY, pool=pool)
            cf = cf_estimate(rho, RELATIVE_ENTROPY, pool=pool)
            assert cm.method == cf.method == "pool"
            assert cm.value >= cf.value - 1e-7

    def test_report_is_upper_bound(self, rng):
        rho = random_density(3, rng)
        rep = cm_estimate(rho, RELATIVE_ENTROPY, SolveOptions(restarts=2, max_iter=200))
        assert rep.upper_bound
        np.testing.assert_allclose(rep.best_ensemble.mixture(), rho.data, atol=1e-10)
        assert rep.value == pytest.approx(RELATIVE_ENTROPY(aggregate_vector(rep.best_ensemble)), abs=1e-12)

    def test_dim_max(self):
        with pytest.raises(DimensionTooLarge):
            cm_estimate(maximally_mixed(9), GEOMETRIC)

    def test_custom_functional_warns(self, sigma):
        f = custom_functional(lambda p: float(p[0]), "mu1")
        with pytest.warns(RuntimeWarning):
            cm_estimate(sigma, f, SolveOptions(restarts=1, max_iter=50))

    def test_basis_state_zero(self):
        assert cm_estimate(basis_state(3, 1).projector(), L1).value == 0

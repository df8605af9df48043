import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coherence_monotone.errors import DimensionMismatch, NotProbabilityVector
from coherence_monotone.majorization import (
    CoherenceVector,
    Ensemble,
    aggregate_vector,
    coherence_vector,
    convertible_pure_to_ensemble,
    majorizes,
    make_ensemble,
    pure_from_vector,
    sort_desc,
)
from coherence_monotone.states import basis_state, mcs_state, validate_pure

probs = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3)
).map(lambda v: CoherenceVector(np.array(v) / sum(v)))


def cv(*p):
    return CoherenceVector(np.array(p, dtype=float))


@pytest.mark.parametrize(
    "amps, expected",
    [
        ((2**-0.5, 2**-0.5), (0.5, 0.5)),
        ((math.sqrt(0.9), math.sqrt(0.1)), (0.9, 0.1)),
        ((math.sqrt(0.75) * np.exp(1.3j), 0.5), (0.75, 0.25)),
    ],
)
def test_coherence_vector(amps, expected):
    np.testing.assert_allclose(coherence_vector(validate_pure(amps)).probs, expected, atol=1e-15)


@pytest.mark.parametrize(
    "p, expected",
    [((0.1, 0.9), (0.9, 0.1)), ((0.2, 0.3, 0.5), (0.5, 0.3, 0.2)), ((0.5, 0.5), (0.5, 0.5))],
)
def test_sort_desc(p, expected):
    out = sort_desc(cv(*p))
    assert out.sorted
    np.testing.assert_array_equal(out.probs, expected)


@pytest.mark.parametrize(
    "q, p, expected",
    [
        ((0.9, 0.1), (0.5, 0.5), True),
        ((0.6, 0.3, 0.1), (0.5, 0.3, 0.2), True),
        ((0.5, 0.5), (0.9, 0.1), False),
    ],
)
def test_majorizes(q, p, expected):
    assert majorizes(cv(*q), cv(*p)) is expected


def test_majorizes_pads_shorter_vector():
    assert majorizes(cv(1.0), cv(0.5, 0.5))
    assert not majorizes(cv(0.5, 0.5), cv(1.0))


def test_rejects_bad_vector():
    with pytest.raises(NotProbabilityVector):
        cv(0.5, 0.6)
    with pytest.raises(NotProbabilityVector):
        cv(1.2, -0.2)


def test_aggregate_examples():
    mcs, e0, e1 = mcs_state(2), basis_state(2, 0), basis_state(2, 1)
    agg = aggregate_vector(Ensemble(((0.5, mcs), (0.5, e0))))
    np.testing.assert_allclose(agg.probs, (0.75, 0.25))
    psi = validate_pure((0.6, 0.8j))
    np.testing.assert_allclose(aggregate_vector(Ensemble(((1.0, psi),))).probs, (0.64, 0.36))
    np.testing.assert_allclose(aggregate_vector(Ensemble(((0.5, e0), (0.5, e1)))).probs, (1.0, 0.0))


def test_pure_from_vector():
    np.testing.assert_allclose(pure_from_vector(cv(0.75, 0.25)).amplitudes, (math.sqrt(0.75), 0.5))
    np.testing.assert_allclose(pure_from_vector(cv(1.0, 0.0)).amplitudes, (1, 0))
    np.testing.assert_allclose(pure_from_vector(cv(0.5, 0.5)).amplitudes, (2**-0.5, 2**-0.5))


def test_convertible_examples():
    mcs = mcs_state(2)
    assert convertible_pure_to_ensemble(mcs, Ensemble(((1.0, basis_state(2, 0)),)))
    assert not convertible_pure_to_ensemble(validate_pure((math.sqrt(0.9), math.sqrt(0.1))), Ensemble(((1.0, mcs),)))
    src = pure_from_vector(cv(0.75, 0.25))
    assert convertible_pure_to_ensemble(src, Ensemble(((0.5, mcs), (0.5, basis_state(2, 0)))))


def test_convertible_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        convertible_pure_to_ensemble(mcs_state(3), Ensemble(((1.0, mcs_state(2)),)))


def test_ensemble_weights_and_mixture():
    ens = make_ensemble([0.25, 0.75], [(1, 0), (0, 1)])
    np.testing.assert_allclose(ens.mixture(), np.diag([0.25, 0.75]))
    with pytest.raises(NotProbabilityVector):
        make_ensemble([0.5, 0.6], [(1, 0), (0, 1)])


@given(probs)
def test_majorization_reflexive(p):
    assert majorizes(p, p)


@given(probs)
def test_extremes(p):
    n = len(p.probs)
    corner = np.zeros(n)
    corner[0] = 1
    assert majorizes(CoherenceVector(corner), p)
    assert majorizes(p, CoherenceVector(np.full(n, 1.0 / n)))


@settings(max_examples=200)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(*[st.lists(st.floats(0.01, 1), min_size=n, max_size=n)] * 3)))
def test_majorization_transitive(triple):
    a, b, c = (CoherenceVector(np.array(v) / sum(v)) for v in triple)
    if majorizes(a, b) and majorizes(b, c):
        assert majorizes(a, c)


@given(probs, st.randoms())
def test_sort_is_permutation_invariant(p, r):
    perm = list(range(len(p.probs)))
    r.shuffle(perm)
    np.testing.assert_array_equal(sort_desc(p).probs, sort_desc(CoherenceVector(p.probs[perm])).probs)

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coherence_monotone import channels as ch
from coherence_monotone import fileio
from coherence_monotone.errors import NotPSD
from coherence_monotone.majorization import make_ensemble
from coherence_monotone.solver import cm_analytic
from coherence_monotone.measures import GEOMETRIC
from coherence_monotone.states import PureState, random_density, validate_pure

from conftest import SIGMA


def test_density_round_trip(tmp_path, rng):
    rho = random_density(3, rng)
    path = tmp_path / "rho.json"
    fileio.write_json(path, fileio.density_to_dict(rho))
    back = fileio.load_density(path)
    np.testing.assert_array_equal(back.data, rho.data)


def test_pure_file_becomes_projector(tmp_path):
    path = tmp_path / "psi.json"
    fileio.write_json(path, fileio.pure_to_dict(validate_pure([0.6, 0.8j])))
    assert isinstance(fileio.load_state(path), PureState)
    np.testing.assert_allclose(fileio.load_density(path).data, [[0.36, -0.48j], [0.48j, 0.64]])


def test_ensemble_round_trip():
    ens = make_ensemble([0.25, 0.75], [(1, 0), (0.6, 0.8)])
    back = fileio.parse_ensemble(fileio.loads(fileio.dumps(fileio.ensemble_to_dict(ens))))
    assert back.weights.tolist() == ens.weights.tolist()


def test_channel_round_trip():
    chan = ch.build_preparation_channel([0.2, 0.3, 0.5])
    back = fileio.parse_channel(fileio.loads(fileio.dumps(fileio.channel_to_dict(chan))))
    assert back.classes == chan.classes
    for a, b in zip(back.kraus, chan.kraus):
        np.testing.assert_array_equal(a, b)


def test_rejects_nan_and_bad_state():
    with pytest.raises(ValueError):
        fileio.loads('{"diagonal": [NaN, 1.0]}')
    with pytest.raises(NotPSD):
        fileio.parse_state({"matrix": [[[1.1, 0], [0, 0]], [[0, 0], [-0.1, 0]]]})
    with pytest.raises(ValueError):
        fileio.parse_state({"dim": 3, "matrix": fileio.encode_complex(SIGMA)})
    with pytest.raises(ValueError):
        fileio.parse_state({"rho": 1})


def test_raw_diagonal():
    assert fileio.raw_diagonal({"diagonal": [0.2, 0.3, 0.6]}).tolist() == [0.2, 0.3, 0.6]
    np.testing.assert_allclose(fileio.raw_diagonal({"matrix": fileio.encode_complex(SIGMA)}), [0.75, 0.25])


def test_dumps_format():
    assert fileio.dumps({"a": 1.0, "b": [0.1, -0.0], "c": True}) == '{"a": 1.0, "b": [0.10000000000000001, 0.0], "c": true}'
    with pytest.raises(ValueError):
        fileio.dumps({"x": float("inf")})


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert json.loads(fileio.dumps([x]))[0] == x


def test_report_dict(sigma):
    doc = fileio.report_to_dict(cm_analytic(sigma, GEOMETRIC))
    assert doc["method"] == "analytic"
    assert fileio.parse_ensemble(doc["best_ensemble"]).dim == 2

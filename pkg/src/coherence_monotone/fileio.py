"""
JSON readers and writers for states, ensembles, channels and reports.

Complex numbers are ``[re, im]`` pairs. Output is deterministic: keys keep
insertion order and floats are written with 17 significant digits, which
round-trips every double exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .channels import QuantumChannel, classify
from .majorization import Ensemble
from .states import DensityMatrix, PureState, validate_density, validate_pure


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} in input")


def loads(text: str):
    return json.loads(text, parse_constant=_reject_constant)


def load(path) -> dict:
    return loads(Path(path).read_text())


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite float {x}")
    s = format(x + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0
    return s if ("e" in s or "." in s) else s + ".0"


def dumps(obj, indent: int | None = None, _level: int = 0) -> str:
    """Minimal deterministic JSON encoder with fixed float formatting."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        # keep numeric leaves on one line
        if indent is not None and all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in seq]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def encode_complex(arr) -> list:
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(a) for a in arr]


def decode_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError("complex entries must be [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite number in input")
    return arr[..., 0] + 1j * arr[..., 1]


def _check_dim(doc: dict, n: int, key: str = "dim") -> None:
    if key in doc and int(doc[key]) != n:
        raise ValueError(f"declared {key}={doc[key]} but data has size {n}")


def density_to_dict(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "matrix": encode_complex(rho.data)}


def pure_to_dict(psi: PureState) -> dict:
    return {"dim": psi.dim, "vector": encode_complex(psi.amplitudes)}


def parse_state(doc: dict) -> DensityMatrix | PureState:
    if "matrix" in doc:
        m = decode_complex(doc["matrix"])
        _check_dim(doc, m.shape[0])
        return validate_density(m)
    if "vector" in doc:
        v = decode_complex(doc["vector"])
        _check_dim(doc, v.shape[0])
        return validate_pure(v)
    raise ValueError("state file needs a 'matrix' or 'vector' field")


def load_state(path) -> DensityMatrix | PureState:
    return parse_state(load(path))


def load_density(path) -> DensityMatrix:
    st = load_state(path)
    return st.projector() if isinstance(st, PureState) else st


def raw_diagonal(doc: dict) -> np.ndarray:
    """Diagonal of a state file without validating it as a state."""
    if "diagonal" in doc:
        d = np.asarray(doc["diagonal"], dtype=float)
    elif "matrix" in doc:
        d = np.real(np.diag(decode_complex(doc["matrix"])))
    elif "vector" in doc:
        d = np.abs(decode_complex(doc["vector"])) ** 2
    else:
        raise ValueError("state file needs a 'diagonal', 'matrix' or 'vector' field")
    if not np.all(np.isfinite(d)):
        raise ValueError("non-finite number in input")
    _check_dim(doc, d.shape[0])
    return d


def ensemble_to_dict(ens: Ensemble) -> dict:
    return {
        "dim": ens.dim,
        "entries": [{"weight": w, "vector": encode_complex(s.amplitudes)} for w, s in ens.entries],
    }


def parse_ensemble(doc: dict) -> Ensemble:
    entries = []
    for e in doc["entries"]:
        w = float(e["weight"])
        if not math.isfinite(w):
            raise ValueError("non-finite weight")
        v = decode_complex(e["vector"])
        _check_dim(doc, v.shape[0])
        entries.append((w, validate_pure(v)))
    return Ensemble(tuple(entries))


def load_ensemble(path) -> Ensemble:
    return parse_ensemble(load(path))


def channel_to_dict(ch: QuantumChannel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [encode_complex(k) for k in ch.kraus]}


def parse_channel(doc: dict) -> QuantumChannel:
    ops = [decode_complex(k) for k in doc["kraus"]]
    ch = classify(ops)
    _check_dim(doc, ch.dim_in, "dim_in")
    _check_dim(doc, ch.dim_out, "dim_out")
    return ch


def load_channel(path) -> QuantumChannel:
    return parse_channel(load(path))


def report_to_dict(rep) -> dict:
    return {
        "value": rep.value,
        "method": rep.method,
        "upper_bound": rep.upper_bound,
        "restarts_used": rep.restarts_used,
        "converged": rep.converged,
        "best_mu": [float(x) for x in rep.best_mu.probs],
        "best_ensemble": ensemble_to_dict(rep.best_ensemble),
    }


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc, indent=2) + "\n")

"""JSON documents for systems and signals (schema ``roadcollab/1``).

Complex numbers are written as ``[re, im]`` pairs.
"""
from typing import Any, Dict, List

import numpy as np

from utils.errors import SchemaError
from .signal import Signal
from .statespace import StateSpace
from .transfer import RationalEntry, TransferMatrix

SCHEMA = "roadcollab/1"


def _complex_list(values) -> List[List[float]]:
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def _from_complex_list(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def _check(doc: Dict[str, Any], kind: str):
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}")
    if doc.get("kind") != kind:
        raise SchemaError(f"expected a {kind} document, got {doc.get('kind')!r}")


def statespace_to_dict(sys: StateSpace) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "kind": "StateSpace",
        "n": sys.n, "m": sys.m, "p": sys.p,
        "A": sys.A.tolist(), "B": sys.B.tolist(),
        "C": sys.C.tolist(), "D": sys.D.tolist(),
    }


def statespace_from_dict(doc: Dict[str, Any]) -> StateSpace:
    _check(doc, "StateSpace")
    n, m, p = doc["n"], doc["m"], doc["p"]
    return StateSpace(np.array(doc["A"], dtype=float).reshape(n, n),
                      np.array(doc["B"], dtype=float).reshape(n, m),
                      np.array(doc["C"], dtype=float).reshape(p, n),
                      np.array(doc["D"], dtype=float).reshape(p, m))


def entry_to_dict(entry: RationalEntry) -> Dict[str, Any]:
    return {
        "zeros": _complex_list(entry.zeros),
        "poles": _complex_list(entry.poles),
        "gain": float(entry.gain),
    }


def entry_from_dict(doc: Dict[str, Any]) -> RationalEntry:
    return RationalEntry(_from_complex_list(doc["zeros"]),
                         _from_complex_list(doc["poles"]),
                         float(doc["gain"]))


def transfer_to_dict(G: TransferMatrix) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "kind": "TransferMatrix",
        "p": G.p, "m": G.m,
        "entries": [[entry_to_dict(e) for e in row] for row in G.entries],
    }


def transfer_from_dict(doc: Dict[str, Any]) -> TransferMatrix:
    _check(doc, "TransferMatrix")
    G = TransferMatrix(tuple(tuple(entry_from_dict(e) for e in row) for row in doc["entries"]))
    if G.shape != (doc["p"], doc["m"]):
        raise SchemaError("declared dimensions do not match entries")
    return G


def signal_to_dict(sig: Signal) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "kind": "Signal",
        "channels": sig.channels,
        "n_samples": sig.n_samples,
        "dt": sig.dt,
        "t0": sig.t0,
        "data": sig.data.tolist(),
    }


def signal_from_dict(doc: Dict[str, Any]) -> Signal:
    _check(doc, "Signal")
    data = np.array(doc["data"], dtype=float).reshape(doc["channels"], doc["n_samples"])
    return Signal(data, doc["dt"], doc.get("t0", 0.0))

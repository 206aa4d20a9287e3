"""On-disk cache of period data, keyed by curve coefficients and quadrature tolerance."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .curves import CurveSpec, cpair, curve_to_json, from_cpair
from .periods import HomologyBasis, PeriodData, compute_periods


def _carray(a) -> list:
    a = np.asarray(a)
    if a.ndim == 0:
        return cpair(a)
    return [_carray(x) for x in a]


def _from_carray(obj) -> np.ndarray:
    def conv(o):
        if len(o) == 2 and all(isinstance(v, (int, float)) for v in o):
            return from_cpair(o)
        return [conv(v) for v in o]
    return np.array(conv(obj), dtype=complex)


def periods_to_json(p: PeriodData) -> dict:
    b = p.basis
    return {
        "omega1": _carray(p.omega1), "omega2": _carray(p.omega2),
        "eta1": _carray(p.eta1), "eta2": _carray(p.eta2), "tau": _carray(p.tau),
        "characteristic": [list(map(float, p.char_delta1)), list(map(float, p.char_delta2))],
        "basis": {"branch_points": _carray(b.branch_points), "anchors": _carray(b.anchors),
                  "cycles": [[[int(k), int(s)] for k, s in cyc] for cyc in b.cycles]},
        "segment_periods": _carray(p.segment_periods),
        "branch_abel": _carray(p.branch_abel),
        "quad_tol": p.quad_tol,
    }


def periods_from_json(obj: dict) -> PeriodData:
    b = obj["basis"]
    basis = HomologyBasis(_from_carray(b["branch_points"]), _from_carray(b["anchors"]),
                          tuple(tuple((k, s) for k, s in cyc) for cyc in b["cycles"]))
    d1, d2 = obj["characteristic"]
    return PeriodData(_from_carray(obj["omega1"]), _from_carray(obj["omega2"]),
                      _from_carray(obj["eta1"]), _from_carray(obj["eta2"]), _from_carray(obj["tau"]),
                      np.array(d1), np.array(d2), basis,
                      _from_carray(obj["segment_periods"]), _from_carray(obj["branch_abel"]),
                      float(obj["quad_tol"]))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cache_key(curve: CurveSpec, quad_tol: float) -> str:
    payload = canonical_json({"curve": curve_to_json(curve), "quad_tol": float(quad_tol)})
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


class PeriodCache:
    """Directory of ``<key>.json`` files; with ``directory=None`` nothing touches the disk."""

    def __init__(self, directory: str | os.PathLike | None):
        self.directory = Path(directory) if directory else None

    def get(self, curve: CurveSpec, quad_tol: float) -> tuple[PeriodData, str]:
        """Period data and the sha256 of its serialized form."""
        key = cache_key(curve, quad_tol)
        path = self.directory / f"{key}.json" if self.directory else None
        if path is not None and path.exists():
            obj = json.loads(path.read_text())
            return periods_from_json(obj), content_hash(obj)
        p = compute_periods(curve, quad_tol=quad_tol)
        obj = periods_to_json(p)
        if path is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(canonical_json(obj))
            tmp.replace(path)
        # round-trip so cached and fresh runs use bit-identical data
        return periods_from_json(obj), content_hash(obj)

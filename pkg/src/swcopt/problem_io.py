"""Problem files: JSON serialization of a multistage robust LP.

Schema (all matrices as sparse [row, col, value] triplets; vectors use
col 0):

    {
      "dims": {"H": int, "n": [..], "m": [..]},
      "first_stage": {"A": [[r,c,v],..], "h1": [..], "c1": [..],
                      "senses": ["<=","=",..]},
      "stages": [            # one entry per stage t = 2..H, in order
        {"T": AFFINE, "W": AFFINE, "h": AFFINE, "c": AFFINE,
         "senses": [..]},
      ],
      "uncertainty": [       # one entry per stage t = 1..H-1
        {"type": "box", "nominal": [..], "radius": rho}
        | {"type": "integer_box", "lower": [..], "upper": [..]}
        | {"type": "discrete", "values": [[..], ..]}
      ],
      "nonneg": [[true, ..], ..],     # optional, per stage; false = free
      "names": [["x_o1", ..], ..]     # optional, per stage
    }

with AFFINE = {"shape": [rows, cols], "base": [[r,c,v],..],
"terms": [{"component": k, "entries": [[r,c,v],..]}, ..]}; vectors carry
shape [rows].
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import (
    AffineMap,
    BoxSupport,
    DiscreteSupport,
    IntegerBoxSupport,
    MultistageRobustLP,
    StageBlock,
    StageDims,
    UncertaintySet,
)


def _triplets(arr: np.ndarray) -> list[list[float]]:
    a = np.atleast_2d(arr) if arr.ndim == 1 else arr
    out = []
    rows, cols = np.nonzero(a if arr.ndim > 1 else arr.reshape(-1, 1))
    for r, c in zip(rows, cols):
        out.append([int(r), int(c), float(a[r, c] if arr.ndim > 1 else arr[r])])
    return out


def _from_triplets(entries, shape) -> np.ndarray:
    if len(shape) == 1:
        out = np.zeros(shape)
        for r, _, v in entries:
            out[int(r)] = float(v)
        return out
    out = np.zeros(shape)
    for r, c, v in entries:
        out[int(r), int(c)] = float(v)
    return out


def _affine_to_json(amap: AffineMap) -> dict:
    return {
        "shape": list(amap.base.shape),
        "base": _triplets(amap.base),
        "terms": [
            {"component": idx, "entries": _triplets(arr)} for idx, arr in amap.terms
        ],
    }


def _affine_from_json(obj: dict) -> AffineMap:
    shape = tuple(obj["shape"])
    base = _from_triplets(obj.get("base", []), shape)
    terms = tuple(
        (int(t["component"]), _from_triplets(t.get("entries", []), shape))
        for t in obj.get("terms", [])
    )
    return AffineMap(base, terms)


def _support_to_json(sup) -> dict:
    if isinstance(sup, BoxSupport):
        return {"type": "box", "nominal": sup.nominal.tolist(), "radius": sup.radius}
    if isinstance(sup, IntegerBoxSupport):
        return {"type": "integer_box", "lower": sup.lower.tolist(), "upper": sup.upper.tolist()}
    if isinstance(sup, DiscreteSupport):
        return {"type": "discrete", "values": [v.tolist() for v in sup.values]}
    raise TypeError(f"unknown support {type(sup).__name__}")


def _support_from_json(obj: dict):
    kind = obj["type"]
    if kind == "box":
        return BoxSupport(np.array(obj["nominal"], dtype=float), float(obj["radius"]))
    if kind == "integer_box":
        return IntegerBoxSupport(np.array(obj["lower"]), np.array(obj["upper"]))
    if kind == "discrete":
        return DiscreteSupport(tuple(np.array(v, dtype=float) for v in obj["values"]))
    raise ValueError(f"unknown support type {kind!r}")


def problem_to_json(problem: MultistageRobustLP) -> dict:
    doc = {
        "dims": {"H": problem.dims.H, "n": list(problem.dims.n), "m": list(problem.dims.m)},
        "first_stage": {
            "A": _triplets(problem.A),
            "h1": problem.h1.tolist(),
            "c1": problem.c1.tolist(),
            "senses": list(problem.senses1),
        },
        "stages": [
            {
                "T": _affine_to_json(blk.T),
                "W": _affine_to_json(blk.W),
                "h": _affine_to_json(blk.h),
                "c": _affine_to_json(blk.c),
                "senses": list(blk.senses),
            }
            for blk in problem.stages
        ],
        "uncertainty": [_support_to_json(s) for s in problem.uncertainty.stages],
        "nonneg": [list(flags) for flags in problem.nonneg],
    }
    if problem.var_names is not None:
        doc["names"] = [list(group) for group in problem.var_names]
    return doc


def problem_from_json(doc: dict) -> MultistageRobustLP:
    dims = StageDims(int(doc["dims"]["H"]), tuple(doc["dims"]["n"]), tuple(doc["dims"]["m"]))
    fs = doc["first_stage"]
    blocks = tuple(
        StageBlock(
            T=_affine_from_json(s["T"]),
            W=_affine_from_json(s["W"]),
            h=_affine_from_json(s["h"]),
            c=_affine_from_json(s["c"]),
            senses=tuple(s["senses"]),
        )
        for s in doc["stages"]
    )
    names = doc.get("names")
    return MultistageRobustLP(
        dims=dims,
        A=_from_triplets(fs["A"], (dims.m[0], dims.n[0])),
        h1=np.array(fs["h1"], dtype=float),
        c1=np.array(fs["c1"], dtype=float),
        senses1=tuple(fs["senses"]),
        stages=blocks,
        uncertainty=UncertaintySet(tuple(_support_from_json(s) for s in doc["uncertainty"])),
        nonneg=tuple(tuple(bool(f) for f in flags) for flags in doc.get("nonneg", [])),
        var_names=tuple(tuple(g) for g in names) if names else None,
    )


def save_problem(problem: MultistageRobustLP, path) -> None:
    Path(path).write_text(json.dumps(problem_to_json(problem), indent=1) + "\n")


def load_problem(path) -> MultistageRobustLP:
    return problem_from_json(json.loads(Path(path).read_text()))

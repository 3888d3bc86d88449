"""JSON and CSV exchange formats, with atomic file writes."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from .envelope import TradeoffCurve
from .errors import DimensionMismatch, IncompatibleAlphabets, ValidationError
from .prob import (FULL, PUBLIC, Channel, JointPmf, Mechanism, joint_from, validate_channel,
                   validate_joint, validate_pmf)

CSV_HEADER = ("epsilon_bits", "utility_bits", "kind")
CSV_KINDS = ("point", "envelope", "band_upper", "band_lower")

PathLike = Union[str, os.PathLike]


def atomic_write(path: PathLike, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


# ---------------------------------------------------------------------------
# joint pmf documents
# ---------------------------------------------------------------------------

def joint_from_dict(doc: dict) -> JointPmf:
    """Accept ``{"p_xy": ...}`` or ``{"p_x": ..., "p_y_given_x": ...}``."""
    xl = doc.get("x_labels")
    yl = doc.get("y_labels")
    if "p_xy" in doc:
        return validate_joint(doc["p_xy"], xl, yl)
    if "p_x" in doc and "p_y_given_x" in doc:
        px = validate_pmf(doc["p_x"])
        ch = validate_channel(doc["p_y_given_x"])
        j = joint_from(px, ch)
        return JointPmf(j.table, xl, yl)
    raise ValidationError("joint document needs 'p_xy' or both 'p_x' and 'p_y_given_x'")


def joint_to_dict(j: JointPmf) -> dict:
    return {"x_labels": list(j.x_labels), "y_labels": list(j.y_labels),
            "p_xy": j.table.tolist()}


def load_joint(path: PathLike) -> JointPmf:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return joint_from_dict(doc)


def save_joint(path: PathLike, j: JointPmf) -> None:
    atomic_write(path, dumps(joint_to_dict(j)))


# ---------------------------------------------------------------------------
# mechanisms
# ---------------------------------------------------------------------------

def _pair_key(j, x, y):
    return f"({j.x_labels[x]},{j.y_labels[y]})"


def mechanism_to_dict(m: Mechanism, j: JointPmf) -> dict:
    """Kernel rows keyed by ``"(x,y)"`` on supp(X,Y) (full) or by ``"y"`` (public)."""
    doc = {"model": m.model, "u_labels": list(m.u_labels),
           "x_labels": list(j.x_labels), "y_labels": list(j.y_labels)}
    if m.model == FULL:
        k = m.kernel_xyu()
        doc["kernel"] = {_pair_key(j, x, y): k[x, y].tolist()
                         for x in range(j.nx) for y in range(j.ny) if j.table[x, y] > 0}
    else:
        doc["kernel"] = {j.y_labels[y]: m.kernel.matrix[y].tolist() for y in range(j.ny)}
    return doc


def mechanism_from_dict(doc: dict, j: JointPmf) -> Mechanism:
    """Rebuild a mechanism for ``j``; unlisted full-model rows map to u index 0."""
    model = doc.get("model")
    u_labels = doc.get("u_labels")
    kern = doc.get("kernel")
    if model not in (FULL, PUBLIC) or not isinstance(kern, dict) or not u_labels:
        raise ValidationError("mechanism document needs 'model', 'u_labels' and 'kernel'")
    n_u = len(u_labels)
    if model == FULL:
        k = np.zeros((j.nx, j.ny, n_u))
        k[:, :, 0] = 1.0
        index = {_pair_key(j, x, y): (x, y) for x in range(j.nx) for y in range(j.ny)}
        for key, row in kern.items():
            if key not in index:
                raise IncompatibleAlphabets(f"unknown (x,y) key {key!r}")
            k[index[key]] = _row(row, n_u, key)
        missing = [_pair_key(j, x, y) for x in range(j.nx) for y in range(j.ny)
                   if j.table[x, y] > 0 and _pair_key(j, x, y) not in kern]
        if missing:
            raise IncompatibleAlphabets(f"kernel lacks support pairs {missing[:3]}")
        ch = Channel(k.reshape(j.nx * j.ny, n_u), tuple(index), u_labels)
        return Mechanism(FULL, ch, j.nx, j.ny)
    k = np.zeros((j.ny, n_u))
    for y, lab in enumerate(j.y_labels):
        if lab not in kern:
            raise IncompatibleAlphabets(f"kernel lacks output {lab!r}")
        k[y] = _row(kern[lab], n_u, lab)
    return Mechanism(PUBLIC, Channel(k, j.y_labels, u_labels), None, j.ny)


def _row(row, n_u, key):
    r = np.asarray(row, dtype=float)
    if r.shape != (n_u,):
        raise DimensionMismatch(f"kernel row {key!r} has {r.size} entries, expected {n_u}")
    return validate_pmf(r).probs


def oracle_report(result, j: JointPmf) -> dict:
    return {
        "model": result.model,
        "value_bits": result.value_bits,
        "vertex_count": result.vertex_count,
        "active_vertices": list(result.active_vertices),
        "weights": result.weights.tolist(),
        "mechanism": mechanism_to_dict(result.mechanism, j),
    }


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def curve_csv(curve: TradeoffCurve) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for eps, util, kind in curve.rows():
        w.writerow((repr(float(eps)), repr(float(util)), kind))
    return buf.getvalue()


def write_curve_csv(path: PathLike, curve: TradeoffCurve) -> None:
    atomic_write(path, curve_csv(curve))


def read_curve_csv(path_or_text: Union[PathLike, str], text: bool = False) -> dict:
    """Parse a curve CSV into ``{kind: [(eps, util), ...]}``."""
    if text:
        src = _io.StringIO(path_or_text)
    else:
        src = open(path_or_text, encoding="utf-8", newline="")
    with src:
        rows = list(csv.reader(src))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValidationError("curve CSV header must be " + ",".join(CSV_HEADER))
    out: dict = {k: [] for k in CSV_KINDS}
    for r in rows[1:]:
        if r[2] not in out:
            raise ValidationError(f"unknown row kind {r[2]!r}")
        out[r[2]].append((float(r[0]), float(r[1])))
    return out

import csv
import io
import json
import os
import os.path as osp
import sys

import numpy as np

from gpbogo.potential import KINDS, TABULATED, RadialPotential
from gpbogo.utils.errors import PreconditionError


def potential_from_dict(data):
    """
    Builds a potential from its JSON description.

    Args:
        data (dict): {"kind": "square_well" | "smooth_bump", "V0": float, "R": float}
            or {"kind": "tabulated", "samples": [[r, V(r)], ...], "R": float (optional)}.

    Returns:
        RadialPotential
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise PreconditionError("Potential description needs a 'kind' field.")
    kind = data["kind"]
    if kind not in KINDS:
        raise PreconditionError(f"Unknown potential kind {kind!r}; expected one of {KINDS}.")
    if kind == TABULATED:
        if "samples" not in data:
            raise PreconditionError("Tabulated potential needs 'samples'.")
        samples = np.asarray(data["samples"], dtype=float)
        R = data.get("R", samples[-1, 0] if samples.ndim == 2 and len(samples) else 1.0)
        return RadialPotential(TABULATED, R=float(R), samples=samples)
    missing = [key for key in ("V0", "R") if key not in data]
    if missing:
        raise PreconditionError(f"Potential description misses {missing}.")
    return RadialPotential(kind, R=float(data["R"]), V0=float(data["V0"]))


def potential_to_dict(pot):
    data = {"kind": pot.kind, "R": pot.R}
    if pot.kind == TABULATED:
        data["samples"] = pot.samples.tolist()
    else:
        data["V0"] = pot.V0
    return data


def load_potential(path):
    """Loads a potential from a JSON file (see potential_from_dict)."""
    if not osp.exists(path):
        raise PreconditionError(f"Potential file {path} does not exist.")
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise PreconditionError(f"Potential file {path} is not valid JSON: {e}")
    return potential_from_dict(data)


def save_potential(pot, path):
    _makedirs(path)
    with open(path, "w") as f:
        json.dump(potential_to_dict(pot), f, sort_keys=True, indent=2)


def _to_builtin(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(obj):
    """Deterministic JSON text: sorted keys, fixed indentation."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_to_builtin)


def csv_text(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buffer.getvalue()


def _makedirs(path):
    directory = osp.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def _write(text, path=None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    _makedirs(path)
    with open(path, "w") as f:
        f.write(text)


def write_json(obj, path=None):
    """Writes obj as JSON to path, or to stdout when path is None."""
    text = dumps(obj) + "\n"
    _write(text, path)
    return text


def write_csv(columns, rows, path=None):
    """Writes a header and rows as CSV to path, or to stdout when path is None."""
    text = csv_text(columns, rows)
    _write(text, path)
    return text

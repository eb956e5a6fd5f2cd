"""JSON file formats.

Tuple file::

    {"schema_version": "1.0", "k": 2, "n": 2,
     "matrices": [[[[1.0, 0.0], [0.0, 0.0]], ...], ...],
     "tolerances": {"rank_rel": 1e-10, "residual_atol": 1e-9, "margin_factor": 10}}

Each matrix entry is a ``[re, im]`` pair.  Frame files carry ``k``,
``n`` and ``vectors`` (n arrays of k pairs).  Floats are written with
Python's shortest round-trip representation, so reading a written file
reproduces every double bit for bit.
"""

import hashlib
import json

import numpy as np

from .errors import InputError

SCHEMA_VERSION = "1.0"
TOLERANCE_KEYS = ("rank_rel", "residual_atol", "margin_factor")

__all__ = [
    "SCHEMA_VERSION",
    "encode_matrix",
    "decode_matrix",
    "tuple_to_dict",
    "parse_tuple",
    "parse_frame",
    "read_source",
    "dumps",
    "digest",
]


def _reject_constant(name):
    raise InputError(f"non-finite number {name} is not allowed")


def read_source(path, stdin=None):
    """Return the raw bytes of ``path`` (``-`` reads standard input)."""
    if path == "-":
        import sys

        stream = stdin or sys.stdin.buffer
        return stream.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def digest(raw):
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def _loads(raw):
    try:
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        return json.loads(text, parse_constant=_reject_constant)
    except UnicodeDecodeError as exc:
        raise InputError(f"input is not UTF-8: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise InputError(f"{where}: non-finite number")
    return x


def _pair(z, where):
    if not isinstance(z, list) or len(z) != 2:
        raise InputError(f"{where}: expected an [re, im] pair, got {z!r}")
    return complex(_number(z[0], where), _number(z[1], where))


def decode_matrix(rows, k, where="matrix"):
    if not isinstance(rows, list) or len(rows) != k:
        raise InputError(f"{where}: expected {k} rows")
    out = np.empty((k, k), dtype=np.complex128)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != k:
            raise InputError(f"{where}, row {r}: expected {k} entries")
        for c, z in enumerate(row):
            out[r, c] = _pair(z, f"{where}, entry ({r}, {c})")
    return out


def _positive_int(doc, key):
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise InputError(f"field '{key}' must be a positive integer, got {v!r}")
    return v


def _tolerances(doc):
    tol = doc.get("tolerances") or {}
    if not isinstance(tol, dict):
        raise InputError("field 'tolerances' must be an object")
    unknown = set(tol) - set(TOLERANCE_KEYS)
    if unknown:
        raise InputError(f"unknown tolerance keys {sorted(unknown)}")
    return {key: _number(v, f"tolerances.{key}") for key, v in tol.items()}


def parse_tuple(raw):
    """Parse a tuple file; returns ``(matrices, tolerance_overrides)``."""
    doc = _loads(raw)
    if not isinstance(doc, dict):
        raise InputError("top level must be a JSON object")
    version = doc.get("schema_version")
    if not isinstance(version, str):
        raise InputError("field 'schema_version' must be a string")
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise InputError(f"unsupported schema_version {version!r}")
    k = _positive_int(doc, "k")
    n = _positive_int(doc, "n")
    mats = doc.get("matrices")
    if not isinstance(mats, list) or len(mats) != n:
        raise InputError(f"field 'matrices' must hold {n} matrices")
    out = [decode_matrix(m, k, f"matrix {i}") for i, m in enumerate(mats)]
    return out, _tolerances(doc)


def parse_frame(raw):
    """Parse a frame file; returns ``(vectors, tolerance_overrides)`` with
    vectors as an (n, k) complex array."""
    doc = _loads(raw)
    if not isinstance(doc, dict):
        raise InputError("top level must be a JSON object")
    k = _positive_int(doc, "k")
    n = _positive_int(doc, "n")
    vecs = doc.get("vectors")
    if not isinstance(vecs, list) or len(vecs) != n:
        raise InputError(f"field 'vectors' must hold {n} vectors")
    out = np.empty((n, k), dtype=np.complex128)
    for i, v in enumerate(vecs):
        if not isinstance(v, list) or len(v) != k:
            raise InputError(f"vector {i}: expected {k} entries")
        for j, z in enumerate(v):
            out[i, j] = _pair(z, f"vector {i}, entry {j}")
    return out, _tolerances(doc)


def tuple_to_dict(mats, tol=None):
    mats = [np.asarray(m) for m in mats]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "k": int(mats[0].shape[0]),
        "n": len(mats),
        "matrices": [encode_matrix(m) for m in mats],
    }
    if tol is not None:
        doc["tolerances"] = {key: getattr(tol, key) for key in TOLERANCE_KEYS}
    return doc


def frame_to_dict(vectors):
    vectors = np.asarray(vectors, dtype=np.complex128)
    return {
        "k": int(vectors.shape[1]),
        "n": int(vectors.shape[0]),
        "vectors": [[[float(z.real), float(z.imag)] for z in v] for v in vectors],
    }


def _default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj) if obj.ndim == 2 else [[float(z.real), float(z.imag)] for z in obj]
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    # NaN/inf have no JSON spelling; they become null
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.ndarray, np.generic, complex)):
        return _clean(_default(obj))
    return obj


def dumps(doc):
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"

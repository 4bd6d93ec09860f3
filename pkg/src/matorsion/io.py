"""Body files and run configuration in JSON.

Body file, schema ``matorsion.body/1``::

    {"schema": "matorsion.body/1", "kind": "radial-modes", "n": 2,
     "radius": 1.0, "modes": [{"k": 2, "m": 2, "a": 0.05}], "resolution": 256}

    {"kind": "radial-grid", "n": 2, "r": [1.0, 1.01, ...]}
    {"kind": "radial-grid", "n": 3, "r": [[...], ...]}    # nlat rows, Gauss-Legendre latitudes
    {"kind": "ellipsoid", "axes": [1.2, 0.8]}

``resolution`` is optional.  For ``radial-grid`` the grid shape is read from
``r``.  Errors raise :class:`BodyFileError` carrying a location: a JSON path
such as ``$.modes[1].k`` or ``line 3 column 5`` for syntax errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import body as bodymod
from . import sphere

__all__ = ["BodyFile", "BodyFileError", "load_body", "parse_body", "load_config"]

SCHEMA = "matorsion.body/1"
KINDS = ("radial-modes", "radial-grid", "ellipsoid")


class BodyFileError(ValueError):
    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True, eq=False)
class BodyFile:
    kind: str
    body: bodymod.StarBody
    axes: tuple | None = None
    modes: sphere.ModeVector | None = None
    source: dict | None = None


def _get(obj, key, loc, types, required=True, default=None):
    if key not in obj:
        if required:
            raise BodyFileError(f"missing field {key!r}", loc)
        return default
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise BodyFileError(f"expected {getattr(types, '__name__', types)}, got {type(val).__name__}", f"{loc}.{key}")
    return val


def _number_list(seq, loc):
    if not isinstance(seq, list) or not seq:
        raise BodyFileError("expected a non-empty list of numbers", loc)
    for i, v in enumerate(seq):
        if isinstance(v, list):
            _number_list(v, f"{loc}[{i}]")
        elif not isinstance(v, (int, float)) or isinstance(v, bool):
            raise BodyFileError(f"expected a number, got {type(v).__name__}", f"{loc}[{i}]")
    try:
        return np.asarray(seq, dtype=float)
    except ValueError as exc:
        raise BodyFileError(f"ragged array ({exc})", loc) from None


def parse_body(obj) -> BodyFile:
    """Build a body from an already-decoded JSON object."""
    if not isinstance(obj, dict):
        raise BodyFileError("top level must be an object")
    schema = obj.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise BodyFileError(f"unsupported schema {schema!r}", "$.schema")
    kind = _get(obj, "kind", "$", str)
    if kind not in KINDS:
        raise BodyFileError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "$.kind")

    if kind == "ellipsoid":
        axes = _number_list(obj.get("axes"), "$.axes")
        if axes.ndim != 1 or len(axes) not in (2, 3):
            raise BodyFileError("need 2 or 3 semi-axes", "$.axes")
        if np.any(axes <= 0):
            raise BodyFileError("semi-axes must be positive", "$.axes")
        n = len(axes)
        grid = _grid(obj, n)
        return BodyFile(kind, bodymod.ellipsoid_body(grid, axes), axes=tuple(axes), source=obj)

    n = _get(obj, "n", "$", int)
    if n not in (2, 3):
        raise BodyFileError("n must be 2 or 3", "$.n")

    if kind == "radial-grid":
        r = _number_list(obj.get("r"), "$.r")
        shape = r.shape
        if (n == 2 and r.ndim != 1) or (n == 3 and r.ndim != 2):
            raise BodyFileError(f"r has {r.ndim} dimensions, n={n} needs {n - 1}", "$.r")
        try:
            grid = sphere.make_grid(n, shape[0] if n == 2 else shape)
            b = bodymod.from_radial(grid, r)
        except sphere.InvalidInput as exc:
            raise BodyFileError(str(exc), "$.r") from None
        return BodyFile(kind, b, source=obj)

    radius = float(_get(obj, "radius", "$", (int, float), required=False, default=1.0))
    if radius <= 0:
        raise BodyFileError("radius must be positive", "$.radius")
    entries = _get(obj, "modes", "$", list, required=False, default=[])
    modes = {}
    for i, ent in enumerate(entries):
        loc = f"$.modes[{i}]"
        if not isinstance(ent, dict):
            raise BodyFileError("expected an object", loc)
        k = _get(ent, "k", loc, int)
        m = _get(ent, "m", loc, int, required=False, default=0)
        a = float(_get(ent, "a", loc, (int, float)))
        if k < 0 or abs(m) > k or (n == 2 and k > 0 and abs(m) != k) or (n == 2 and k == 0 and m != 0):
            raise BodyFileError(f"invalid harmonic label (k={k}, m={m}) for n={n}", loc)
        modes[(k, m)] = modes.get((k, m), 0.0) + a
    mv = sphere.ModeVector.from_modes(n, modes) if modes else sphere.ModeVector.zeros(n, 2)
    grid = _grid(obj, n)
    try:
        b = bodymod.from_modes(grid, mv, radius)
    except sphere.InvalidInput as exc:
        raise BodyFileError(str(exc), "$.modes") from None
    return BodyFile(kind, b, modes=mv, source=obj)


def _grid(obj, n):
    res = obj.get("resolution")
    try:
        if res is None:
            return sphere.make_grid(n, 256 if n == 2 else (48, 96))
        return sphere.make_grid(n, res if n == 2 else tuple(res))
    except (sphere.InvalidInput, TypeError) as exc:
        raise BodyFileError(str(exc), "$.resolution") from None


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise BodyFileError(str(exc), str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodyFileError(exc.msg, f"{path}: line {exc.lineno} column {exc.colno}") from None


def load_body(path) -> BodyFile:
    return parse_body(_load_json(path))


def load_config(path) -> dict:
    """Run configuration: a flat JSON object whose keys mirror the long CLI flags."""
    cfg = _load_json(path)
    if not isinstance(cfg, dict):
        raise BodyFileError("configuration must be a JSON object", str(path))
    return cfg

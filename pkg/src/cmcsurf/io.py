"""Dataset files (canonical JSON) and OBJ mesh export.

A dataset is one JSON document::

    {"chart": {...}, "fields": {"psi1": {"role": "psi1", "real": [[...]],
     "imag": [[...]], "mask": [[0, 1, ...]]}, ...},
     "format": "cmcsurf-dataset", "provenance": {...}, "version": 1}

Serialization is canonical: keys sorted, no whitespace, floats printed with
17 significant digits and ``-0.0`` folded to ``0``.  Reading a file and
writing it again reproduces the same bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .cgrid import Field, GridChart, Vec3Field
from .errors import EmptyGeometry, GridMismatch, InputError, MissingField, UnknownVersion
from .weierstrass import SpinorData

FORMAT = "cmcsurf-dataset"
VERSION = 1
ROLES = ("psi1", "psi2", "p", "rho", "H", "n", "r", "Q", "R", "eta")
VECTOR_ROLES = ("n", "r")
CONVENTIONS = {
    "area_form": "dz^dzbar = -2i dx^dy",
    "wirtinger": "d = (d_x - i d_y)/2, dbar = (d_x + i d_y)/2",
    "array_layout": "values[i][j] at x = x_min + i*hx, y = y_min + j*hy",
}


@dataclass
class FieldRecord:
    role: str
    values: np.ndarray  # complex, shape chart.shape or (3,) + chart.shape
    mask: np.ndarray

    def to_field(self, chart: GridChart) -> Union[Field, Vec3Field]:
        if self.role in VECTOR_ROLES:
            return Vec3Field(chart, self.values, self.mask)
        return Field(chart, self.values, self.mask)

    @classmethod
    def from_field(cls, role: str, f: Union[Field, Vec3Field]) -> "FieldRecord":
        return cls(role, np.asarray(f.values, dtype=complex), np.asarray(f.mask, dtype=bool))


@dataclass
class DatasetFile:
    chart: GridChart
    fields: dict[str, FieldRecord] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    version: int = VERSION

    def add(self, role: str, f: Union[Field, Vec3Field]) -> None:
        if role not in ROLES:
            raise InputError(f"unknown role tag {role!r}")
        if f.chart != self.chart:
            raise GridMismatch(f"field {role!r} lives on a different chart")
        self.fields[role] = FieldRecord.from_field(role, f)

    def get(self, role: str) -> Union[Field, Vec3Field]:
        if role not in self.fields:
            raise MissingField(f"dataset has no {role!r} field")
        return self.fields[role].to_field(self.chart)

    def has(self, role: str) -> bool:
        return role in self.fields

    # -- JSON ---------------------------------------------------------------
    def to_json_obj(self) -> dict:
        out = {}
        for role, rec in self.fields.items():
            out[role] = {
                "role": rec.role,
                "real": rec.values.real.tolist(),
                "imag": rec.values.imag.tolist(),
                "mask": rec.mask.astype(int).tolist(),
            }
        return {
            "format": FORMAT,
            "version": self.version,
            "chart": self.chart.to_dict(),
            "fields": out,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DatasetFile":
        if not isinstance(obj, dict) or obj.get("format") != FORMAT:
            raise InputError(f"not a {FORMAT} document")
        version = obj.get("version")
        if version != VERSION:
            raise UnknownVersion(f"unsupported dataset version {version!r}")
        for key in ("chart", "fields"):
            if key not in obj:
                raise MissingField(f"dataset lacks the {key!r} block")
        c = obj["chart"]
        try:
            chart = GridChart(float(c["x_min"]), float(c["x_max"]), float(c["y_min"]), float(c["y_max"]),
                              int(c["nx"]), int(c["ny"]))
        except (KeyError, TypeError) as exc:
            raise MissingField(f"chart block incomplete: {exc}") from None
        ds = cls(chart, provenance=obj.get("provenance", {}), version=version)
        for name, rec in obj["fields"].items():
            role = rec.get("role", name)
            if role not in ROLES or role != name:
                raise InputError(f"bad role tag {role!r} for field {name!r}")
            try:
                re = np.asarray(rec["real"], dtype=float)
                im = np.asarray(rec["imag"], dtype=float)
                mask = np.asarray(rec["mask"], dtype=int).astype(bool)
            except KeyError as exc:
                raise MissingField(f"field {name!r} lacks {exc}") from None
            except (TypeError, ValueError) as exc:
                raise InputError(f"field {name!r} is malformed: {exc}") from None
            shape = ((3,) if role in VECTOR_ROLES else ()) + chart.shape
            if re.shape != shape or im.shape != shape or mask.shape != shape[-2:]:
                raise GridMismatch(f"field {name!r} has shape {re.shape}, expected {shape}")
            ds.fields[name] = FieldRecord(role, re + 1j * im, mask)
        return ds


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise InputError("non-finite number in dataset")
    if x == 0:
        return "0"
    text = "%.17g" % x
    return text


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, compact separators, 17-digit floats."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + canonical_dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_dumps(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return canonical_dumps(obj.tolist())
    if isinstance(obj, complex):
        return canonical_dumps([obj.real, obj.imag])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(ds: DatasetFile) -> str:
    return canonical_dumps(ds.to_json_obj()) + "\n"


def loads(text: str) -> DatasetFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"dataset is not valid JSON: {exc}") from None
    return DatasetFile.from_json_obj(obj)


def write_dataset(ds: DatasetFile, path) -> None:
    Path(path).write_text(dumps(ds), encoding="utf-8")


def read_dataset(path) -> DatasetFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return loads(text)


# -- spinor data <-> dataset ------------------------------------------------

def dataset_from_spinors(s: SpinorData, provenance: Optional[dict] = None) -> DatasetFile:
    """Dataset holding ``psi1, psi2, p`` and, when known in closed form, ``Q``."""
    prov = {"conventions": dict(CONVENTIONS)}
    prov.update(_jsonable(s.meta))
    if provenance:
        prov.update(_jsonable(provenance))
    ds = DatasetFile(s.chart, provenance=prov)
    ds.add("psi1", s.psi1)
    ds.add("psi2", s.psi2)
    ds.add("p", s.p)
    if s.hopf is not None:
        ds.add("Q", s.hopf)
        prov["hopf_source"] = "closed_form"
    return ds


def spinors_from_dataset(ds: DatasetFile) -> SpinorData:
    for role in ("psi1", "psi2", "p"):
        if not ds.has(role):
            raise MissingField(f"dataset has no {role!r} field; spinor data required")
    hopf = ds.get("Q") if ds.provenance.get("hopf_source") == "closed_form" and ds.has("Q") else None
    p = ds.get("p")
    p = Field(ds.chart, p.values.real, p.mask)
    meta = {k: v for k, v in ds.provenance.items() if k != "conventions"}
    return SpinorData(ds.get("psi1"), ds.get("psi2"), p, hopf=hopf, meta=meta)


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out[k] = _jsonable(v)
        elif isinstance(v, (np.integer,)):
            out[k] = int(v)
        elif isinstance(v, (np.floating,)):
            out[k] = float(v)
        elif isinstance(v, (tuple, np.ndarray)):
            out[k] = list(np.asarray(v).tolist())
        else:
            out[k] = v
    return out


# -- mesh export ------------------------------------------------------------

def mesh_arrays(r: Vec3Field, n: Optional[Vec3Field] = None):
    """Vertices, normals and triangles of the grid surface.

    Each grid cell whose four corners are unmasked contributes two triangles,
    wound counter-clockwise in the parameter plane.
    """
    mask = r.mask if n is None else r.mask & n.mask
    if not mask.any():
        raise EmptyGeometry("no unmasked surface samples to export")
    index = -np.ones(mask.shape, dtype=int)
    index[mask] = np.arange(int(mask.sum()))
    verts = np.stack([r.values[k][mask] for k in range(3)], axis=1).real
    norms = None if n is None else np.stack([n.values[k][mask] for k in range(3)], axis=1).real
    a, b = index[:-1, :-1], index[1:, :-1]
    c, d = index[1:, 1:], index[:-1, 1:]
    full = (a >= 0) & (b >= 0) & (c >= 0) & (d >= 0)
    tris = np.concatenate([np.stack([a[full], b[full], c[full]], axis=1),
                           np.stack([a[full], c[full], d[full]], axis=1)])
    return verts, norms, tris


def write_obj(path, r: Vec3Field, n: Optional[Vec3Field] = None) -> tuple[int, int]:
    """Write an OBJ file with ``v``/``vn``/``f`` records; returns (vertex count, face count)."""
    verts, norms, tris = mesh_arrays(r, n)
    lines = ["# cmcsurf grid surface"]
    lines += ["v %.10g %.10g %.10g" % tuple(v) for v in verts]
    if norms is not None:
        lines += ["vn %.10g %.10g %.10g" % tuple(v) for v in norms]
        lines += ["f %d//%d %d//%d %d//%d" % (a + 1, a + 1, b + 1, b + 1, c + 1, c + 1) for a, b, c in tris]
    else:
        lines += ["f %d %d %d" % (a + 1, b + 1, c + 1) for a, b, c in tris]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
    return len(verts), len(tris)


def read_obj_vertices(path) -> np.ndarray:
    rows = [line.split()[1:4] for line in Path(path).read_text().splitlines() if line.startswith("v ")]
    return np.asarray(rows, dtype=float)

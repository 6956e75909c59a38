"""Run configuration, sweep tables and their CSV / JSON serialisation.

Floats are written with ``repr`` so that reading a file back gives the
in-memory value exactly (JSON) or to full double precision (CSV).
"""

import configparser
import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import DomainError
from .model import ModelSpec
from .propagator import IntegratorSettings

OUT_ENV = "DIABATIC_OUT"


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs besides the subcommand arguments."""

    eps0: float = -1.0
    eps1: float = 1.0
    coupling_strength: float = 1.0
    f_exponent: int = 4
    g_exponent: int = 4
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    v_min: float = 0.01
    v_max: float = 0.5
    b_min: float = 0.0
    b_max: float = 0.95
    nv: int = 500
    nb: int = 1
    out_dir: str = "."
    format: str = "csv"
    threshold: float = 1e-4
    workers: int = 0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not (0.0 < self.v_min < self.v_max):
            raise DomainError(f"empty v range [{self.v_min}, {self.v_max}]")
        if not (0.0 <= self.b_min <= self.b_max < 1.0):
            raise DomainError(f"b range [{self.b_min}, {self.b_max}] must lie in [0, 1)")
        if self.nv < 1 or self.nb < 1:
            raise DomainError("grid densities must be at least 1")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if not self.threshold > 0:
            raise DomainError("threshold must be positive")
        # catches bad exponents and levels early
        self.model()

    def model(self) -> ModelSpec:
        return ModelSpec(
            eps0=self.eps0,
            eps1=self.eps1,
            coupling_strength=self.coupling_strength,
            f_exponent=self.f_exponent,
            g_exponent=self.g_exponent,
        )

    def settings(self) -> IntegratorSettings:
        return IntegratorSettings(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def v_grid(self):
        return np.linspace(self.v_min, self.v_max, self.nv)

    def b_grid(self):
        return np.linspace(self.b_min, self.b_max, self.nb) if self.nb > 1 else np.array([self.b_min])

    def replace(self, **kw) -> "RunConfig":
        data = asdict(self)
        data.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig(**data)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    kind = _FIELD_TYPES[key]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError:
        raise DomainError(f"config key {key!r}: cannot parse {raw!r}") from None
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) into a RunConfig.

    Unknown keys are an error.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise DomainError(f"malformed config: {exc}") from None
    values = dict(parser["run"])
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**{k: _coerce(k, v) for k, v in values.items()})


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v!r}\n" if not isinstance(v, str) else f"{k} = {v}\n" for k, v in asdict(cfg).items())


def resolve_out_dir(cfg: RunConfig, flag=None) -> str:
    """--out wins, then the environment override, then the config."""
    if flag:
        return flag
    return os.environ.get(OUT_ENV) or cfg.out_dir


SWEEP_COLUMNS = (
    "v",
    "b",
    "transition_probability",
    "half_passage_p",
    "eta",
    "zn_p",
    "alpha00",
    "alpha01",
    "d_max_iX",
    "d_max_iZ",
    "d_max_T_sym",
    "d_max_iH",
    "status",
)


@dataclass
class SweepTable:
    """One row per (v, b) point, v-major, both axes ascending.

    ``annotations`` holds extra labelled rows (e.g. gate working points)
    kept apart from the grid so the row count equals the grid size.
    """

    v_axis: np.ndarray
    b_axis: np.ndarray
    rows: list
    annotations: list = field(default_factory=list)

    def __post_init__(self):
        self.v_axis = np.asarray(self.v_axis, dtype=float)
        self.b_axis = np.asarray(self.b_axis, dtype=float)
        if len(self.rows) != len(self.v_axis) * len(self.b_axis):
            raise DomainError("row count does not match the grid size")
        for ax in (self.v_axis, self.b_axis):
            if np.any(np.diff(ax) <= 0):
                raise DomainError("sweep axes must be strictly increasing")

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float if name != "status" else object)


def _cell(value):
    if isinstance(value, str):
        return value
    return repr(float(value))


def _parse_cell(name, text):
    if name in ("status", "label"):
        return text
    return float(text)


def write_rows_csv(path, rows, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])


def read_rows_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [{k: _parse_cell(k, x) for k, x in zip(header, line)} for line in reader]


def annotations_path(path) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_annotations{ext}"


def write_sweep_csv(table: SweepTable, path):
    """Grid rows to ``path``; annotated rows, if any, to a sibling file."""
    write_rows_csv(path, table.rows, SWEEP_COLUMNS)
    if table.annotations:
        write_rows_csv(annotations_path(path), table.annotations, ("label",) + SWEEP_COLUMNS)


def read_sweep_csv(path) -> SweepTable:
    rows = read_rows_csv(path)
    ann_path = annotations_path(path)
    annotations = read_rows_csv(ann_path) if os.path.exists(ann_path) else []
    v = sorted({r["v"] for r in rows})
    b = sorted({r["b"] for r in rows})
    return SweepTable(np.array(v), np.array(b), rows, annotations)


def to_jsonable(obj):
    """Recursively turn arrays, complex numbers and dataclasses into JSON types.

    Complex values become ``[re, im]`` pairs; non-finite floats become the
    strings "inf", "-inf" or "nan".
    """
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def complex_matrix(data) -> np.ndarray:
    """Inverse of :func:`to_jsonable` for a matrix of ``[re, im]`` pairs."""
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sweep_payload(table: SweepTable, cfg: RunConfig) -> dict:
    return {
        "config": cfg,
        "columns": list(SWEEP_COLUMNS),
        "v_axis": table.v_axis,
        "b_axis": table.b_axis,
        "rows": table.rows,
        "annotations": table.annotations,
    }


_NONFINITE = {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}


def _restore_row(row):
    return {k: (_NONFINITE[x] if k not in ("status", "label") and isinstance(x, str) else x) for k, x in row.items()}


def sweep_from_payload(data) -> SweepTable:
    return SweepTable(
        np.array(data["v_axis"], dtype=float),
        np.array(data["b_axis"], dtype=float),
        [_restore_row(r) for r in data["rows"]],
        [_restore_row(r) for r in data.get("annotations", [])],
    )

import os
import json
from dataclasses import asdict, dataclass, field
from datetime import date, datetime

import numpy as np
import pandas as pd
from rich.console import Console

import config
import scan_config as sc
from lib import quaternions as qt
from lib import slicefn as sf
from lib.errors import NotApplicable, SliceRegError, SpecError

console = Console()


def get_config(*modules):
    """Upper-case settings of config and scan_config (or of the given modules) as one dict."""
    settings = {}
    for module in modules or (config, sc):
        settings.update((name, value) for name, value in vars(module).items() if name.isupper())
    return settings


def generate_folders():
    os.makedirs(config.FUNCTION_ROOT, exist_ok=True)
    os.makedirs(config.OUTPUT_ROOT, exist_ok=True)
    os.makedirs(config.LOG_WRITE_ROOT, exist_ok=True)


def _make_parent(path):
    # Make the parent directory if the path has one
    parent = os.path.dirname(path)
    if parent != "":
        os.makedirs(parent, exist_ok=True)


####
### Function specs
####

def _quaternion(value, field):
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise SpecError(field, f"expected a [w, x, y, z] array, got {value!r}")
    try:
        return np.array([float(v) for v in value])
    except (TypeError, ValueError):
        raise SpecError(field, f"non-numeric component in {value!r}")


def _unit(value, field):
    u = _quaternion(value, field)
    try:
        return qt.imaginary_unit(u)
    except SliceRegError:
        raise SpecError(field, f"{u.tolist()} is not an imaginary unit (Re = 0, norm = 1)")


def _coefficient(value, field):
    """A quaternion [w, x, y, z] or an H_C value {"real": [..], "imag": [..]}."""
    if isinstance(value, dict):
        if set(value) - {"real", "imag"} or "real" not in value:
            raise SpecError(field, "H_C coefficients need a 'real' and an optional 'imag' part")
        return qt.hc(_quaternion(value["real"], f"{field}.real"),
                     _quaternion(value.get("imag", [0, 0, 0, 0]), f"{field}.imag"))
    return qt.hc(_quaternion(value, field))


def _domain(spec, default):
    if "domain" not in spec:
        return default
    d = spec["domain"]
    try:
        return sf.CircularDomain(tuple(d["alpha"]), tuple(d["beta"]))
    except (KeyError, TypeError):
        raise SpecError("domain", "expected {'alpha': [a0, a1], 'beta': [b0, b1]}")
    except SliceRegError as e:
        raise SpecError("domain", str(e))


def _semislice_map(value, field):
    """Coefficients of a semislice map: a constant quaternion, a list of them, or {"coeffs": [...]}."""
    if isinstance(value, dict):
        value = value.get("coeffs")
    if isinstance(value, (list, tuple)) and value and not isinstance(value[0], (list, tuple)):
        return _quaternion(value, field)[None, :]
    if not isinstance(value, (list, tuple)) or not value:
        raise SpecError(field, "expected a quaternion or a list of quaternion coefficients")
    return np.array([_quaternion(v, f"{field}[{n}]") for n, v in enumerate(value)])


def function_from_dict(spec, domain=None):
    if not isinstance(spec, dict):
        raise SpecError("spec", "a function spec must be a JSON object")
    domain = _domain(spec, domain or sf.CircularDomain())
    kind = spec.get("type")
    name = spec.get("name")

    if kind == "polynomial":
        coeffs = spec.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise SpecError("coeffs", "expected a non-empty list of coefficients")
        c = np.array([_coefficient(v, f"coeffs[{n}]") for n, v in enumerate(coeffs)])
        return sf.polynomial(c, domain, name=name)
    if kind == "twoslice":
        for key in ("J", "K", "gJ", "gK"):
            if key not in spec:
                raise SpecError(key, "missing")
        J, K = _unit(spec["J"], "J"), _unit(spec["K"], "K")
        gJ, gK = _semislice_map(spec["gJ"], "gJ"), _semislice_map(spec["gK"], "gK")
        try:
            return sf.twoslice(J, K, gJ, gK, domain, name=name)
        except SliceRegError as e:
            raise SpecError("K", str(e))
    if kind == "constant":
        f = sf.constant(_quaternion(spec.get("value"), "value"), domain)
        f.name = name or f.name
        return f
    if kind == "product":
        factors = spec.get("factors")
        if not isinstance(factors, list) or not factors:
            raise SpecError("factors", "expected a non-empty list of function specs")
        f = function_from_dict(factors[0], domain)
        for g in factors[1:]:
            f = sf.slice_product(f, function_from_dict(g, domain))
        f.name = name or f.name
        return f
    raise SpecError("type", f"unknown function type {kind!r}")


def parse_function_spec(text):
    """Build a SliceFunction from JSON text."""
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError("json", f"malformed JSON ({e.msg} at line {e.lineno} column {e.colno})")
    return function_from_dict(spec)


def load_function_spec(path):
    with open(path, "r") as f:
        return parse_function_spec(f.read())


def function_to_spec(f):
    """Inverse of function_from_dict for polynomial and two-slice stems."""
    stem = f.stem
    spec = {"name": f.name, "domain": f.domain.to_dict()}
    if isinstance(stem, sf.TwoSliceStem):
        spec.update(type="twoslice", J=stem.J.tolist(), K=stem.K.tolist(),
                    gJ={"coeffs": stem.gJ.tolist()}, gK={"coeffs": stem.gK.tolist()})
    elif isinstance(stem, sf.PolynomialStem):
        if stem.is_quaternionic:
            coeffs = stem.p.tolist()
        else:
            coeffs = [{"real": p.tolist(), "imag": q.tolist()} for p, q in zip(stem.p, stem.q)]
        spec.update(type="polynomial", coeffs=coeffs)
    else:
        raise NotApplicable(f"{f.name} has no JSON form")
    return spec


####
### Exports
####

def export_cloud(cloud, path, fmt="csv"):
    """Write a SurfaceCloud as CSV (with a .meta.json sidecar) or as one JSON document."""
    _make_parent(path)
    if fmt == "csv":
        cloud.frame.to_csv(
            path,
            index=False,
            float_format=sc.CSV_FLOAT_FORMAT,
            na_rep="nan",
            lineterminator="\n",
            )
        write_json(
            {"provenance": cloud.provenance, "metadata": cloud.metadata, "warnings": cloud.warnings},
            path + ".meta.json",
        )
    elif fmt == "json":
        write_json(cloud.to_dict(), path)
    else:
        raise SliceRegError(f"unknown export format {fmt!r}")
    return path


def read_cloud(path):
    from lib.scanners import CLOUD_COLUMNS, SurfaceCloud

    if path.endswith(".json"):
        with open(path, "r") as f:
            doc = json.load(f)
        frame = pd.DataFrame(doc["rows"], columns=CLOUD_COLUMNS)
        return SurfaceCloud(frame, doc["provenance"], doc["metadata"], doc["warnings"])

    frame = pd.read_csv(path, na_values=["nan"])
    meta = {}
    if os.path.exists(path + ".meta.json"):
        with open(path + ".meta.json", "r") as f:
            meta = json.load(f)
    return SurfaceCloud(frame, meta.get("provenance", ""), meta.get("metadata"), meta.get("warnings"))


def write_json(obj, path):
    _make_parent(path)
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_to_builtin)
        f.write("\n")
    return path


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialize {type(value).__name__}")


####
### Run logs
####

@dataclass
class RunRecord:
    """One CLI run: what ran, on which input, how it ended and the headline figures of its result."""
    command: str
    source: str
    exit_code: int
    time_taken: float
    timestamp: str
    outcome: dict = field(default_factory=dict)


def log_path(day=None, root=None):
    """Daily log file, e.g. warehouse/logs/slicereg_log_2024-06-11.json."""
    day = day or date.today()
    stem, ext = os.path.splitext(config.LOG_FILE_NAME)
    return os.path.join(root or config.LOG_WRITE_ROOT, f"{stem}_{day.isoformat()}{ext}")


def _log_day(name):
    stem, ext = os.path.splitext(config.LOG_FILE_NAME)
    if not (name.startswith(stem + "_") and name.endswith(ext)):
        return None
    try:
        return date.fromisoformat(name[len(stem) + 1:len(name) - len(ext)])
    except ValueError:
        return None


def prune_logs(root=None, today=None, keep_days=config.LOG_KEEP_DAYS):
    """Delete daily logs older than keep_days; returns the removed paths."""
    root = root or config.LOG_WRITE_ROOT
    today = today or date.today()
    removed = []
    if not os.path.isdir(root):
        return removed
    for name in sorted(os.listdir(root)):
        day = _log_day(name)
        if day is not None and (today - day).days >= keep_days:
            os.remove(os.path.join(root, name))
            removed.append(os.path.join(root, name))
    return removed


def write_log(record, root=None, day=None):
    """Append a RunRecord to the day's log (a JSON list) and prune old days."""
    day = day or date.today()
    path = log_path(day, root)
    _make_parent(path)

    records = []
    if os.path.exists(path):
        with open(path, 'r') as f:
            try:
                records = json.load(f)
            except json.JSONDecodeError:
                console.log(f"[yellow]warning[/yellow] unreadable log {path}, starting a new one")
        if not isinstance(records, list):
            records = []
    records.append(asdict(record))

    with open(path, 'w') as f:
        json.dump(records, f, indent=1, default=_to_builtin)
    prune_logs(root, day)
    return path


def timestamp():
    return datetime.now().isoformat(timespec="seconds")

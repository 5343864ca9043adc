"""CSV/JSON/TOML serialization and run manifests.

CSV dialect everywhere: comma separated, ``.`` decimal point, one header
row, UTF-8, LF line endings. Floats are written with repr, the shortest
round-trip form, so identical data gives identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .domain import Band, Domain, Field, IndexSet
from .errors import ValidationError
from .regression import DesignMatrix

__all__ = [
    "write_field_csv",
    "read_field_csv",
    "write_indexset_csv",
    "write_band_csv",
    "read_band_csv",
    "write_samples_csv",
    "read_samples_csv",
    "write_design_csv",
    "read_design_csv",
    "write_maxstat_csv",
    "read_maxstat_csv",
    "write_json",
    "read_json",
    "load_config",
    "sha256_file",
    "write_manifest",
]


def _fmt(v) -> str:
    return repr(float(v))


def _open_write(path):
    return open(path, "w", encoding="utf-8", newline="")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err}") from err
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def _parse_float(cell: str, path, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ValidationError(f"{path}: bad {what} value {cell!r}") from None


def _domain_header(domain: Domain) -> list[str]:
    cols = list(domain.axis_names)
    if domain.labels is not None:
        cols.append("label")
    return cols


def _domain_row(domain: Domain, i: int) -> list[str]:
    row = [_fmt(v) for v in domain.coords[i]]
    if domain.labels is not None:
        row.append(domain.labels[i])
    return row


def _split_domain_columns(header: list[str], value_cols: list[str], path):
    """Header layout: coordinate columns, optional label, value columns."""
    if len(header) < len(value_cols) + 1:
        raise ValidationError(f"{path}: expected coordinates plus {value_cols}")
    if header[-len(value_cols):] != value_cols:
        raise ValidationError(
            f"{path}: trailing columns must be {value_cols}, got {header}")
    lead = header[: len(header) - len(value_cols)]
    has_label = bool(lead) and lead[-1] == "label"
    coord_names = lead[:-1] if has_label else lead
    if not coord_names:
        raise ValidationError(f"{path}: no coordinate columns")
    return coord_names, has_label


def _domain_from_rows(coord_names, has_label, rows, path) -> Domain:
    ncoord = len(coord_names)
    width = ncoord + int(has_label)
    if any(len(row) < width for row in rows):
        raise ValidationError(f"{path}: ragged rows")
    coords = np.array(
        [[_parse_float(c, path, "coordinate") for c in row[:ncoord]] for row in rows])
    labels = tuple(row[ncoord] for row in rows) if has_label else None
    return Domain(coords, labels=labels, axis_names=tuple(coord_names))


def write_field_csv(path, field: Field, value_col: str = "value") -> None:
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(_domain_header(field.domain) + [value_col])
        for i in range(field.domain.size):
            w.writerow(_domain_row(field.domain, i) + [_fmt(field.values[i])])


def read_field_csv(path, value_col: str = "value") -> Field:
    header, rows = _read_rows(path)
    coord_names, has_label = _split_domain_columns(header, [value_col], path)
    domain = _domain_from_rows(coord_names, has_label, rows, path)
    values = [_parse_float(row[-1], path, value_col) for row in rows]
    return Field(domain, np.array(values))


def write_indexset_csv(path, sets: dict[str, IndexSet], domain: Domain) -> None:
    """One 0/1 membership column per named set, shared domain."""
    names = list(sets)
    for s in sets.values():
        if not s.domain.equals(domain):
            raise ValidationError("all index sets must share the output domain")
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(_domain_header(domain) + names)
        for i in range(domain.size):
            w.writerow(_domain_row(domain, i)
                       + [str(int(sets[name].member[i])) for name in names])


_BAND_COLS = ["estimate", "sd", "lower", "upper"]


def write_band_csv(path, band: Band, estimate: np.ndarray, sd: np.ndarray) -> None:
    dom = band.domain
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(_domain_header(dom) + _BAND_COLS)
        for i in range(dom.size):
            w.writerow(_domain_row(dom, i) + [
                _fmt(estimate[i]), _fmt(sd[i]),
                _fmt(band.lower[i]), _fmt(band.upper[i]),
            ])


def read_band_csv(path, alpha: float = 0.05):
    """Returns (band, estimate, sd). alpha is metadata for the Band object
    only; the file does not store it."""
    header, rows = _read_rows(path)
    coord_names, has_label = _split_domain_columns(header, _BAND_COLS, path)
    domain = _domain_from_rows(coord_names, has_label, rows, path)
    block = np.array(
        [[_parse_float(c, path, "band") for c in row[-4:]] for row in rows])
    band = Band(domain, block[:, 2], block[:, 3], alpha)
    return band, block[:, 0], block[:, 1]


def write_samples_csv(path, samples: np.ndarray, domain: Domain) -> None:
    """Sample paths as rows, one column per domain point."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != domain.size:
        raise ValidationError("sample matrix must be (paths x domain size)")
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(domain.point_names())
        for row in samples:
            w.writerow([_fmt(v) for v in row])


def read_samples_csv(path) -> np.ndarray:
    header, rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: no sample rows")
    if any(len(row) != len(header) for row in rows):
        raise ValidationError(f"{path}: ragged rows")
    return np.array([[_parse_float(c, path, "sample") for c in row] for row in rows])


def write_design_csv(path, design: DesignMatrix, y: np.ndarray | None = None,
                     response: str = "y") -> None:
    cols = list(design.labels)
    if y is not None:
        cols.append(response)
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(cols)
        for i in range(design.X.shape[0]):
            row = [_fmt(v) for v in design.X[i]]
            if y is not None:
                row.append(_fmt(y[i]))
            w.writerow(row)


def read_design_csv(path, response: str | None = None):
    """Returns (DesignMatrix, y or None); y is split off by column name."""
    header, rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    if any(len(row) != len(header) for row in rows):
        raise ValidationError(f"{path}: ragged rows")
    mat = np.array([[_parse_float(c, path, "design") for c in row] for row in rows])
    if response is None:
        return DesignMatrix(mat, tuple(header)), None
    if response not in header:
        raise ValidationError(f"{path}: no response column {response!r}")
    j = header.index(response)
    y = mat[:, j]
    keep = [i for i in range(mat.shape[1]) if i != j]
    labels = tuple(header[i] for i in keep)
    return DesignMatrix(mat[:, keep], labels), y


def write_maxstat_csv(path, values: np.ndarray) -> None:
    with _open_write(path) as fh:
        w = _writer(fh)
        w.writerow(["max_stat"])
        for v in values:
            w.writerow([_fmt(v)])


def read_maxstat_csv(path) -> np.ndarray:
    header, rows = _read_rows(path)
    if header != ["max_stat"]:
        raise ValidationError(f"{path}: expected single max_stat column")
    return np.array([_parse_float(row[0], path, "max_stat") for row in rows])


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: invalid JSON: {err}") from err


def load_config(path) -> dict:
    """TOML (primary) or JSON config file, chosen by extension."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        obj = read_json(p)
    else:
        try:
            with open(p, "rb") as fh:
                obj = tomllib.load(fh)
        except OSError as err:
            raise ValidationError(f"cannot read {p}: {err}") from err
        except tomllib.TOMLDecodeError as err:
            raise ValidationError(f"{p}: invalid TOML: {err}") from err
    if not isinstance(obj, dict):
        raise ValidationError(f"{p}: config must be a table/object")
    return obj


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, params: dict, inputs: list,
                   outputs: list, started_at: str, finished_at: str,
                   runtime_seconds: float) -> Path:
    """Single manifest per output directory; digests all inputs/outputs.

    Timestamps and runtime live here and only here, so every other
    output file stays byte-identical across reruns.
    """
    from . import __version__

    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "package": "invsets",
        "version": __version__,
        "params": params,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
        "started_at": started_at,
        "finished_at": finished_at,
        "runtime_seconds": runtime_seconds,
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path

"""File formats: series ingestion, distance matrices, embeddings, curves and reports.

Every data file has a JSON sidecar next to it named ``<file>.meta.json``.
Numbers are written with 17 significant digits so round trips are exact.
Binary files are little-endian float64, row-major.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from dig.core_data import MultivariateSeries
from dig.diffusion import DiffusionModel
from dig.distances import DistanceMatrix
from dig.mds import Embedding
from dig.metrics import MetricReport

FMT = "%.17g"
LE_F64 = np.dtype("<f8")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_sidecar(path, meta: dict, one_line: bool = False) -> Path:
    side = sidecar_path(path)
    text = json.dumps(meta, sort_keys=True) if one_line else json.dumps(meta, indent=2, sort_keys=True)
    side.write_text(text + "\n")
    return side


def read_sidecar(path) -> dict:
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"missing metadata sidecar {side}")
    return json.loads(side.read_text())


def _fmt(x) -> str:
    return FMT % x


def _write_matrix_csv(path, header: Optional[Sequence[str]], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in rows:
            w.writerow(row)


# -- series ------------------------------------------------------------------


def write_series(series: MultivariateSeries, path, fmt: str = "csv", label_column: str = "label") -> Path:
    path = Path(path)
    meta = {"sample_rate_hz": series.sample_rate_hz, "name": series.name}
    has_labels = series.labels is not None and len(series.labels) == series.n_samples
    if fmt == "csv":
        header = list(series.channel_names) + ([label_column] if has_labels else [])
        rows = ([_fmt(v) for v in row] + ([str(series.labels[i])] if has_labels else [])
                for i, row in enumerate(series.values))
        _write_matrix_csv(path, header, rows)
        if has_labels:
            meta["label_column"] = label_column
    elif fmt == "binary":
        series.values.astype(LE_F64).tofile(path)
        meta.update(n_channels=series.n_channels, channel_names=list(series.channel_names))
        if has_labels:
            labels_path = path.with_name(path.name + ".labels.csv")
            labels_path.write_text("".join(f"{v}\n" for v in series.labels))
            meta["labels_file"] = labels_path.name
    else:
        raise ValueError(f"unknown series format {fmt!r}")
    write_sidecar(path, meta)
    return path


def _parse_labels(values: list):
    try:
        return np.array([int(v) for v in values])
    except ValueError:
        return np.array(values)


def read_series(path, fmt: Optional[str] = None) -> MultivariateSeries:
    """Read a CSV or raw-binary series using its sidecar for rate and labels."""
    path = Path(path)
    meta = read_sidecar(path)
    if "sample_rate_hz" not in meta:
        raise ValueError(f"sidecar for {path} lacks sample_rate_hz")
    fmt = fmt or ("binary" if path.suffix in (".bin", ".f64", ".raw") else "csv")
    labels = None
    if fmt == "csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path} is empty")
        header, body = rows[0], rows[1:]
        label_col = meta.get("label_column")
        if label_col is not None and label_col not in header:
            raise ValueError(f"label column {label_col!r} not found in {path}")
        keep = [i for i, h in enumerate(header) if h != label_col]
        values = np.array([[float(r[i]) for i in keep] for r in body])
        names = [header[i] for i in keep]
        if label_col is not None:
            li = header.index(label_col)
            labels = _parse_labels([r[li] for r in body])
    elif fmt == "binary":
        c = int(meta["n_channels"])
        flat = np.fromfile(path, dtype=LE_F64)
        if flat.size % c:
            raise ValueError(f"{path}: {flat.size} values do not split into {c} channels")
        values = flat.reshape(-1, c).astype(float)
        names = meta.get("channel_names")
        if meta.get("labels_file"):
            labels = _parse_labels((path.parent / meta["labels_file"]).read_text().split())
    else:
        raise ValueError(f"unknown series format {fmt!r}")
    return MultivariateSeries(values, float(meta["sample_rate_hz"]), labels=labels,
                              name=meta.get("name", path.stem), channel_names=names)


# -- distance matrices -------------------------------------------------------


def write_distance(dm: DistanceMatrix, path, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "csv":
        _write_matrix_csv(path, None, ([_fmt(v) for v in row] for row in dm.d))
    elif fmt == "binary":
        dm.d.astype(LE_F64).tofile(path)
    else:
        raise ValueError(f"unknown distance format {fmt!r}")
    write_sidecar(path, {"n": dm.n, "kind": dm.kind, "format": fmt}, one_line=True)
    return path


def read_distance(path) -> DistanceMatrix:
    path = Path(path)
    meta = read_sidecar(path)
    n = int(meta["n"])
    if meta.get("format", "csv") == "binary":
        d = np.fromfile(path, dtype=LE_F64)
        if d.size != n * n:
            raise ValueError(f"{path}: expected {n * n} values, found {d.size}")
        d = d.reshape(n, n).astype(float)
    else:
        d = np.loadtxt(path, delimiter=",", ndmin=2)
        if d.shape != (n, n):
            raise ValueError(f"{path}: expected {n}x{n}, found {d.shape}")
    return DistanceMatrix(d, meta["kind"])


# -- embeddings, curves, models, reports --------------------------------------


def write_embedding(emb: Embedding, path, labels=None, centers=None) -> Path:
    path = Path(path)
    header = [f"dim_{i + 1}" for i in range(emb.coords.shape[1])]
    if labels is not None:
        header.append("label")
    if centers is not None:
        header.append("center_time")
    rows = []
    for i, row in enumerate(emb.coords):
        out = [_fmt(v) for v in row]
        if labels is not None:
            out.append(str(labels[i]))
        if centers is not None:
            out.append(_fmt(centers[i]))
        rows.append(out)
    _write_matrix_csv(path, header, rows)
    write_sidecar(path, {"method": emb.method, "m": emb.m, "stress": emb.stress, "n_iter": emb.n_iter})
    return path


def read_embedding(path) -> tuple:
    """Returns ``(coords, labels or None, centers or None)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    dims = [i for i, h in enumerate(header) if h.startswith("dim_")]
    coords = np.array([[float(r[i]) for i in dims] for r in body])
    labels = _parse_labels([r[header.index("label")] for r in body]) if "label" in header else None
    centers = np.array([float(r[header.index("center_time")]) for r in body]) if "center_time" in header else None
    return coords, labels, centers


def write_entropy_curve(H: np.ndarray, path) -> Path:
    _write_matrix_csv(path, ["t", "H"], ([str(t), _fmt(h)] for t, h in enumerate(H, start=1)))
    return Path(path)


def read_entropy_curve(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)[:, 1]


def write_diffusion_model(model: DiffusionModel, path) -> Path:
    path = Path(path)
    model.kernel.astype(LE_F64).tofile(path)
    write_sidecar(path, {"n": model.n, "k": model.k, "alpha": model.alpha, "t_selected": model.t_selected})
    return path


def read_diffusion_model(path) -> DiffusionModel:
    from dig.diffusion import row_normalize, stationary_distribution

    meta = read_sidecar(path)
    n = int(meta["n"])
    K = np.fromfile(path, dtype=LE_F64).reshape(n, n).astype(float)
    return DiffusionModel(K, row_normalize(K), stationary_distribution(K), int(meta["k"]),
                          float(meta["alpha"]), meta.get("t_selected"))


def write_report(report: MetricReport, path) -> Path:
    Path(path).write_text(report.to_text())
    return Path(path)


def read_report(path) -> MetricReport:
    fields = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, value = line.split("=", 1)
            fields[key] = json.loads(value) if value not in ("nan",) else float("nan")
    return MetricReport(**fields)


def append_report_row(report: MetricReport, path, variant: str = "") -> Path:
    path = Path(path)
    fields = ["variant", "trustworthiness", "mantel_r", "mantel_p", "k_used", "permutations", "seed"]
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(fields)
        w.writerow([variant, _fmt(report.trustworthiness), _fmt(report.mantel_r), _fmt(report.mantel_p),
                    report.k_used, report.permutations, report.seed])
    return path


def write_grid(grid: np.ndarray, names: Sequence[str], path) -> Path:
    """Square heatmap grid with variant names as header row and first column."""
    rows = ([name] + [_fmt(v) for v in grid[i]] for i, name in enumerate(names))
    _write_matrix_csv(path, ["variant"] + list(names), rows)
    return Path(path)


def read_grid(path) -> tuple:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]]), names

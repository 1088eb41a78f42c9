"""Command line entry point: ``dig embed | sweep | synth | metrics``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from dig import core_data, diffusion, io, metrics, pipeline, svg, synth
from dig.config import PipelineConfig, load_structured, variant_name
from dig.distances import DistanceMatrix, pairwise_euclidean
from dig.mds import Embedding
from dig.pipeline import StageError

log = logging.getLogger("dig")


class _Outputs:
    """Tracks files written by a run so a failed run can be quarantined."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.before = {p.name for p in self.dir.iterdir()}

    def path(self, name: str) -> Path:
        return self.dir / name

    def quarantine(self) -> Path:
        q = self.dir / "quarantine"
        q.mkdir(exist_ok=True)
        for p in list(self.dir.iterdir()):
            if p.name not in self.before and p.name != "quarantine":
                shutil.move(str(p), str(q / p.name))
        return q


def _run_guarded(out: _Outputs, fn):
    try:
        return fn()
    except Exception:
        q = out.quarantine()
        log.error("partial outputs moved to %s", q)
        raise


# -- shared stages -----------------------------------------------------------


@dataclass
class Prepared:
    distance: DistanceMatrix
    labels: Optional[np.ndarray]
    centers: np.ndarray


def _write_windows(path, centers, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window", "center_time"] + (["label"] if labels is not None else []))
        for i, c in enumerate(centers):
            w.writerow([i, io._fmt(c)] + ([str(labels[i])] if labels is not None else []))


def _read_windows(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    centers = np.array([float(r["center_time"]) for r in rows])
    labels = io._parse_labels([r["label"] for r in rows]) if rows and "label" in rows[0] else None
    return centers, labels


def prepare_input(cfg: PipelineConfig, out: _Outputs) -> Prepared:
    """Ingest, preprocess and compute the input distance; persist it for resuming."""
    if cfg.resume_distance:
        with pipeline._stage("resume"):
            dist = io.read_distance(cfg.resume_distance)
            wpath = Path(cfg.resume_distance).with_name("windows.csv")
            centers, labels = _read_windows(wpath) if wpath.exists() else (np.arange(dist.n, dtype=float), None)
    else:
        with pipeline._stage("ingest"):
            if not cfg.input_path:
                raise ValueError("input_path is required unless resume_distance is given")
            series = io.read_series(cfg.input_path, cfg.input_format)
        if cfg.bandpass:
            with pipeline._stage("preprocess"):
                series = core_data.preprocess_bandpass_downsample(series, **cfg.bandpass)
        window = core_data.WindowSpec(int(cfg.window_length), int(cfg.window_stride))
        res = pipeline.input_distance(series, window, cfg.input_distance, int(cfg.n_bins), int(cfg.l2),
                                      cfg.rank_tol)
        dist, labels = res.distance, res.labels
        centers = res.centers / series.sample_rate_hz
    io.write_distance(dist, out.path("input_distance.bin"), "binary")
    _write_windows(out.path("windows.csv"), centers, labels)
    return Prepared(dist, labels, centers)


def _emit_embedding(emb: Embedding, out: _Outputs, stem: str, prep: Prepared, title: str):
    io.write_embedding(emb, out.path(f"{stem}.csv"), prep.labels, prep.centers)
    if prep.labels is not None:
        svg.scatter_svg(emb.coords, out.path(f"{stem}_labels.svg"), labels=prep.labels, title=title)
    svg.scatter_svg(emb.coords, out.path(f"{stem}_time.svg"), times=prep.centers, title=title)


# -- operations --------------------------------------------------------------


def run_embed(cfg: PipelineConfig):
    """Full pipeline for one information distance. Returns ``(embedding, report)``."""
    out = _Outputs(cfg.output_dir)

    def body():
        cfg.dump(out.path("config.json"))
        prep = prepare_input(cfg, out)
        model = pipeline.diffusion_from_distance(prep.distance, int(cfg.k), float(cfg.alpha), cfg.t, int(cfg.t_max))
        io.write_entropy_curve(model.entropy, out.path("vne.csv"))
        io.write_diffusion_model(model, out.path("kernel.bin"))
        Pt = diffusion.diffuse(model.operator, model.t_selected)
        emb, info = pipeline.embed_variant(model, cfg.info_distance, Pt, int(cfg.m), cfg.mds_tol,
                                           int(cfg.mds_max_iter))
        if info is None:
            info = pipeline.information_distance(model, -1.0, Pt)
        else:
            io.write_distance(info, out.path("info_distance.bin"), "binary")
        _emit_embedding(emb, out, "embedding", prep, f"DIG {variant_name(cfg.info_distance)}, t={model.t_selected}")
        with pipeline._stage("metrics"):
            report = metrics.evaluate(info, emb.distances(), int(cfg.metrics_k), int(cfg.permutations), int(cfg.seed))
        io.write_report(report, out.path("metrics.txt"))
        log.info("t=%d stress=%.6g trustworthiness=%.4f mantel_r=%.4f", model.t_selected, emb.stress,
                 report.trustworthiness, report.mantel_r)
        return emb, report

    return _run_guarded(out, body)


def _stem(v) -> str:
    return "embedding_" + variant_name(v).replace("=", "_")


def run_gamma_sweep(cfg: PipelineConfig, variants=None):
    """One embedding per variant on a shared operator, then pairwise metric grids.

    ``trust[a, b]`` treats embedding ``a`` as the reference and ``b`` as the
    embedded space, so the grid is not symmetric. ``mantel[a, b]`` is symmetric.
    Returns ``(names, trust, mantel_r, embeddings)``.
    """
    variants = list(cfg.sweep_variants if variants is None else variants)
    if len(variants) < 2:
        raise ValueError("a sweep needs at least 2 variants")
    out = _Outputs(cfg.output_dir)

    def body():
        cfg.dump(out.path("config.json"))
        prep = prepare_input(cfg, out)
        model = pipeline.diffusion_from_distance(prep.distance, int(cfg.k), float(cfg.alpha), cfg.t, int(cfg.t_max))
        io.write_entropy_curve(model.entropy, out.path("vne.csv"))
        Pt = diffusion.diffuse(model.operator, model.t_selected)
        names, dists, embs = [], [], []
        for v in variants:
            emb, _ = pipeline.embed_variant(model, v, Pt, int(cfg.m), cfg.mds_tol, int(cfg.mds_max_iter))
            names.append(variant_name(v))
            embs.append(emb)
            dists.append(emb.distances())
            _emit_embedding(emb, out, _stem(v), prep, f"{variant_name(v)}, t={model.t_selected}")
        trust, mantel_r, mantel_p = metric_grids(dists, int(cfg.metrics_k), int(cfg.permutations), int(cfg.seed))
        io.write_grid(trust, names, out.path("trustworthiness.csv"))
        io.write_grid(mantel_r, names, out.path("mantel_r.csv"))
        io.write_grid(mantel_p, names, out.path("mantel_p.csv"))
        return names, trust, mantel_r, embs

    return _run_guarded(out, body)


def metric_grids(dists, k: int, permutations: int, seed: int):
    n = len(dists)
    trust = np.ones((n, n))
    r = np.ones((n, n))
    p = np.zeros((n, n))
    for a in range(n):
        p[a, a] = 1.0 / (1 + permutations)
        for b in range(n):
            if a != b:
                trust[a, b] = metrics.trustworthiness(dists[a], dists[b], k)
            if a < b:
                r[a, b], p[a, b] = metrics.mantel_test(dists[a], dists[b], permutations, seed)
                r[b, a], p[b, a] = r[a, b], p[a, b]
    return trust, r, p


def run_synth(spec_file, output_dir, fmt: str = "csv") -> synth.SyntheticDataset:
    """Generate a dataset from a spec file: observed series, latent path and labels."""
    data = dict(load_structured(spec_file)) if spec_file else {"preset": "regime"}
    fmt = data.pop("format", fmt)
    preset = data.pop("preset", None)
    if preset == "regime":
        n_regimes = data.pop("n_regimes", 3)
        dwell = data.pop("dwell", 4000)
        spec = synth.regime_spec(n_regimes, dwell, **data)
    elif preset is None:
        spec = synth.SyntheticProcessSpec.from_dict(data)
    else:
        raise ValueError(f"unknown preset {preset!r}")
    return write_dataset(synth.generate(spec), spec, output_dir, fmt)


def write_dataset(ds: synth.SyntheticDataset, spec: synth.SyntheticProcessSpec, output_dir,
                  fmt: str = "csv") -> synth.SyntheticDataset:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    suffix = "bin" if fmt == "binary" else "csv"
    io.write_series(ds.observed, out / f"observed.{suffix}", fmt)
    io.write_series(core_data.MultivariateSeries(ds.latent, ds.observed.sample_rate_hz, name="latent",
                                                 channel_names=[f"theta{i}" for i in range(spec.latent_dim)]),
                    out / "latent.csv")
    if ds.regime_labels is not None:
        (out / "labels.csv").write_text("label\n" + "".join(f"{v}\n" for v in ds.regime_labels))
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    return ds


def _load_distance_like(path) -> DistanceMatrix:
    path = Path(path)
    if io.sidecar_path(path).exists() and "kind" in io.read_sidecar(path):
        return io.read_distance(path)
    coords, _, _ = io.read_embedding(path)
    return DistanceMatrix(pairwise_euclidean(coords), "embedded-euclidean")


def run_metrics(reference, embedded, k: int = 5, permutations: int = 999, seed: int = 0,
                out: Optional[str] = None) -> metrics.MetricReport:
    report = metrics.evaluate(_load_distance_like(reference), _load_distance_like(embedded), k, permutations, seed)
    if out:
        io.write_report(report, out)
    return report


# -- argument parsing --------------------------------------------------------


def _overrides(args) -> dict:
    o = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        o[key.strip()] = yaml.safe_load(value)
    for key in ("input_path", "input_format", "output_dir", "t", "info_distance", "seed", "resume_distance"):
        value = getattr(args, key, None)
        if value is not None:
            o[key] = value
    return o


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dig", description="Dynamical information geometry embeddings")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_args(sp):
        sp.add_argument("config", nargs="?", help="YAML/JSON config file")
        sp.add_argument("--input", dest="input_path")
        sp.add_argument("--format", dest="input_format", choices=["csv", "binary"])
        sp.add_argument("--out", dest="output_dir")
        sp.add_argument("--t", help="'auto' or an integer diffusion time")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--resume-distance", dest="resume_distance")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")

    e = sub.add_parser("embed", help="run the full pipeline for one information distance")
    pipeline_args(e)
    e.add_argument("--info-distance", dest="info_distance", help="gamma value, 'fisher-rao' or 'dm'")

    s = sub.add_parser("sweep", help="embed several variants on a shared operator and compare them")
    pipeline_args(s)
    s.add_argument("--variants", help="comma separated, e.g. -1,0,1,dm,fisher-rao")

    y = sub.add_parser("synth", help="generate a synthetic dataset")
    y.add_argument("spec", nargs="?", help="YAML/JSON spec file (default: three-regime preset)")
    y.add_argument("--out", required=True)
    y.add_argument("--format", choices=["csv", "binary"], default="csv")

    m = sub.add_parser("metrics", help="trustworthiness and Mantel test between two distance sources")
    m.add_argument("--reference", required=True, help="distance matrix file or embedding CSV")
    m.add_argument("--embedded", required=True, help="distance matrix file or embedding CSV")
    m.add_argument("--k", type=int, default=5)
    m.add_argument("--permutations", type=int, default=999)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command in ("embed", "sweep"):
            cfg = PipelineConfig.load(args.config, _overrides(args))
            if args.command == "embed":
                emb, report = run_embed(cfg)
                print(report.to_text(), end="")
            else:
                variants = args.variants.split(",") if args.variants else None
                if variants:
                    cfg.sweep_variants = variants
                    cfg.validate()
                names, trust, mantel_r, _ = run_gamma_sweep(cfg)
                print("variants:", ", ".join(names))
        elif args.command == "synth":
            ds = run_synth(args.spec, args.out, args.format)
            print(f"wrote {ds.observed.n_samples} samples to {args.out}")
        elif args.command == "metrics":
            report = run_metrics(args.reference, args.embedded, args.k, args.permutations, args.seed, args.out)
            print(report.to_text(), end="")
    except StageError as exc:
        log.error("stage %s failed: %s", exc.stage, exc.cause)
        return 1
    except (ValueError, FileNotFoundError, FloatingPointError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

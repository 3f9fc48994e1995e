"""Batch command-line front end for the denoising pipeline.

Every subcommand reads a JSON config (any key overridable with a
``--dotted.key value`` flag), writes versioned artifacts plus a run
manifest (inputs, resolved config, seed, stage timings) into its output
directory, and never mutates its inputs.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import autoencoder as ae
from . import baselines as bl
from . import clustering as cl
from . import core
from . import metrics as mt
from . import noisediag as nd
from . import preprocess as pp
from . import synthgen as sg
from . import trainer as tr

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


DEFAULT_CONFIG: dict = {
    "seed": 0,
    "deterministic": True,
    "threads": 1,
    "synth": {
        "rows": 10, "cols": 10, "phases": 4, "peaks_per_phase": 5,
        "blob_count": 8, "repetitions": 20, "integration_time_ms": 5.0,
        "channels": 736, "shot_scale": 0.0, "read_sigma": 1.0,
        "flicker_amp": 0.0, "background_amp": 0.0, "background_degree": 3,
    },
    "preprocess": {
        "crop_lo": 0, "crop_hi": 0, "target_len": 0,
        "despike": {"enabled": True, "window": 40, "amp_threshold": 5.0,
                    "max_width": 2, "max_iterations": 10},
        "baseline": {"enabled": True, "degree": 4, "clip_iterations": 20,
                     "clip_factor": 0.0},
        "timing_repeats": 1,
    },
    "train": {
        "learning_rate": 5e-4, "batch_size": 128, "epochs": 500, "folds": 5,
        "adam_beta1": 0.9, "adam_beta2": 0.999, "adam_eps": 1e-8,
        "pairing": "dynamic", "dtype": "float64",
    },
    "cluster": {"k": 4, "restarts": 10, "max_iter": 300, "tol": 1e-6,
                "elbow_min": 0, "elbow_max": 0},
    "baseline": {"methods": ["savgol", "fourier", "wavelet"],
                 "subset_frac": 0.25, "folds": 5},
    "noise_scan": {"block_sizes": []},
    "evaluate": {"ssim_window": 11, "kmeans_k": 0},
    "report": {
        "map_points": 64000, "short_ms": 5.0, "long_ms": 500.0,
        "train_seconds": 70.4, "validation_seconds": 60.0,
        "compute_seconds": 37.12,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _apply_dotted(config: dict, dotted: str, raw: str) -> None:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def load_config(path: str | None, overrides: list[str]) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        config = _merge(config, user)
    i = 0
    while i < len(overrides):
        flag = overrides[i]
        if not flag.startswith("--"):
            raise ConfigError(f"unexpected argument {flag!r}")
        if "=" in flag:
            dotted, raw = flag[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(overrides):
                raise ConfigError(f"flag {flag} is missing a value")
            dotted, raw = flag[2:], overrides[i + 1]
            i += 2
        _apply_dotted(config, dotted, raw)
    return config


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode()


def write_manifest(out_dir: Path, command: str, config: dict,
                   inputs: dict, outputs: list[str], timings: dict) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "timings": timings,
    }
    (out_dir / "run_manifest.json").write_bytes(_json_bytes(doc))


class StageTimer:
    def __init__(self):
        self.stages: dict[str, dict] = {}

    def record(self, name: str, samples: list[float]) -> None:
        arr = np.asarray(samples)
        self.stages[name] = {
            "mean_s": float(arr.mean()),
            "std_s": float(arr.std()),
            "runs": int(arr.size),
        }

    def time(self, name: str, fn, repeats: int = 1):
        samples = []
        result = None
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            result = fn()
            samples.append(time.perf_counter() - t0)
        self.record(name, samples)
        return result


def _despike_params(cfg: dict) -> pp.DespikeParams | None:
    if not cfg["enabled"]:
        return None
    return pp.DespikeParams(window=cfg["window"],
                            amp_threshold=cfg["amp_threshold"],
                            max_width=cfg["max_width"],
                            max_iterations=cfg["max_iterations"])


def _baseline_params(cfg: dict) -> pp.BaselineParams | None:
    if not cfg["enabled"]:
        return None
    return pp.BaselineParams(degree=cfg["degree"],
                             clip_iterations=cfg["clip_iterations"],
                             clip_factor=cfg["clip_factor"])


def _train_config(config: dict) -> tr.TrainConfig:
    t = config["train"]
    return tr.TrainConfig(
        learning_rate=t["learning_rate"], batch_size=t["batch_size"],
        epochs=t["epochs"], folds=t["folds"], seed=config["seed"],
        adam_beta1=t["adam_beta1"], adam_beta2=t["adam_beta2"],
        adam_eps=t["adam_eps"], pairing=t["pairing"], dtype=t["dtype"],
    )


def cmd_synth(config: dict, out_dir: Path) -> None:
    cfg = config["synth"]
    timer = StageTimer()
    seed = config["seed"]

    def run():
        axis = sg.default_axis(cfg["channels"])
        library = sg.gen_phase_library(cfg["phases"], cfg["peaks_per_phase"],
                                       seed, axis=axis)
        clean, labels = sg.gen_phase_map(
            library, (cfg["rows"], cfg["cols"]), cfg["blob_count"], seed)
        if cfg["background_amp"] > 0:
            clean = sg.add_polynomial_background(
                clean, cfg["background_amp"], cfg["background_degree"], seed)
        noise = sg.NoiseModel(shot_scale=cfg["shot_scale"],
                              read_sigma=cfg["read_sigma"],
                              flicker_amp=cfg["flicker_amp"], seed=seed)
        aset = sg.synthesize_acquisitions(clean, noise, cfg["repetitions"],
                                          cfg["integration_time_ms"])
        return library, clean, labels, aset

    library, clean, labels, aset = timer.time("synth", run)
    core.save_dataset(aset, out_dir / "dataset")
    scaled = core.HyperMap(clean.grid_shape, clean.shift_axis,
                           clean.data * cfg["integration_time_ms"])
    core.save_map(scaled, out_dir / "clean_reference")
    rows, cols = clean.grid_shape
    label_grid = labels.reshape(rows, cols)
    with (out_dir / "true_labels.csv").open("w") as fh:
        for r in range(rows):
            fh.write(",".join(str(int(v)) for v in label_grid[r]) + "\n")
    write_manifest(out_dir, "synth", config, {}, [
        "dataset", "clean_reference", "true_labels.csv"], timer.stages)


def cmd_preprocess(config: dict, out_dir: Path, dataset: str) -> None:
    cfg = config["preprocess"]
    timer = StageTimer()
    aset = core.load_dataset(dataset)
    if cfg["crop_lo"] or cfg["crop_hi"] or cfg["target_len"]:
        target = cfg["target_len"] or (aset.n_channels - cfg["crop_lo"]
                                       - cfg["crop_hi"])
        def run_standardize():
            out = np.empty((aset.n_points, aset.repetitions, target),
                           dtype=np.float32)
            axis = None
            for p in range(aset.n_points):
                for r in range(aset.repetitions):
                    spec = pp.standardize(aset.spectrum(p, r), cfg["crop_lo"],
                                          cfg["crop_hi"], target)
                    out[p, r] = spec.intensities
                    axis = spec.shift_axis
            return core.AcquisitionSet(aset.grid_shape,
                                       aset.integration_time_ms, axis, out)
        aset = timer.time("standardize", run_standardize)
    despike_params = _despike_params(cfg["despike"])
    baseline_params = _baseline_params(cfg["baseline"])
    repeats = cfg.get("timing_repeats", 1)
    if despike_params is not None:
        aset_despiked = timer.time(
            "despiking", lambda: pp.preprocess_set(aset, despike_params, None),
            repeats)
    else:
        aset_despiked = aset
    cleaned = timer.time(
        "preprocessing",
        lambda: pp.preprocess_set(aset_despiked, None, baseline_params),
        repeats)
    reference = pp.averaged_reference(cleaned)
    core.save_dataset(cleaned, out_dir / "dataset")
    core.save_map(reference, out_dir / "reference")
    write_manifest(out_dir, "preprocess", config, {"dataset": str(dataset)},
                   ["dataset", "reference"], timer.stages)


def cmd_train(config: dict, out_dir: Path, dataset: str) -> None:
    timer = StageTimer()
    aset = core.load_dataset(dataset)
    matrix = aset.data.reshape(-1, aset.n_channels).astype(np.float64)
    unit, _ = pp.l2_normalize_rows(matrix)
    normalized = core.AcquisitionSet(
        aset.grid_shape, aset.integration_time_ms, aset.shift_axis,
        unit.reshape(aset.data.shape).astype(np.float32))
    tcfg = _train_config(config)
    params, history = timer.time("training",
                                 lambda: tr.train(normalized, tcfg))
    ae.save_params(params, out_dir / "model.rsdn")
    (out_dir / "history.json").write_bytes(_json_bytes(history.to_json_dict()))
    write_manifest(out_dir, "train", config, {"dataset": str(dataset)},
                   ["model.rsdn", "history.json"], timer.stages)


def cmd_cross_validate(config: dict, out_dir: Path, dataset: str,
                       reference: str) -> None:
    timer = StageTimer()
    aset = core.load_dataset(dataset)
    ref = core.load_map(reference)
    k = config["evaluate"]["kmeans_k"] or None
    tcfg = _train_config(config)
    report = timer.time(
        "cross_validate",
        lambda: tr.cross_validate(aset, ref, tcfg, n_clusters=k))
    (out_dir / "cv_report.json").write_bytes(
        _json_bytes(report.to_json_dict()))
    denoised = core.HyperMap(ref.grid_shape, ref.shift_axis,
                             report.denoised_unit_mean)
    core.save_map(denoised, out_dir / "denoised_unit_mean")
    write_manifest(out_dir, "cross-validate", config,
                   {"dataset": str(dataset), "reference": str(reference)},
                   ["cv_report.json", "denoised_unit_mean"], timer.stages)


def cmd_denoise(config: dict, out_dir: Path, model: str, dataset: str,
                restore_norms: bool) -> None:
    timer = StageTimer()
    params = ae.load_params(model)
    aset = core.load_dataset(dataset)
    matrix = aset.data.reshape(-1, aset.n_channels).astype(np.float64)
    unit, norms = pp.l2_normalize_rows(matrix)

    def run():
        out = tr.denoise_matrix(params, unit, dtype=config["train"]["dtype"])
        if restore_norms:
            out = out * norms[:, None]
        return out

    out = timer.time("denoising", run, config["preprocess"]["timing_repeats"])
    denoised = core.AcquisitionSet(
        aset.grid_shape, aset.integration_time_ms, aset.shift_axis,
        out.reshape(aset.data.shape).astype(np.float32))
    core.save_dataset(denoised, out_dir / "dataset")
    write_manifest(out_dir, "denoise", config,
                   {"model": str(model), "dataset": str(dataset),
                    "restore_norms": restore_norms},
                   ["dataset"], timer.stages)


def cmd_cluster(config: dict, out_dir: Path, map_path: str) -> None:
    cfg = config["cluster"]
    timer = StageTimer()
    hmap = core.load_map(map_path)
    unit, _ = pp.l2_normalize_rows(hmap.data)
    result = timer.time(
        "clustering",
        lambda: cl.kmeans(unit, cfg["k"], seed=config["seed"],
                          restarts=cfg["restarts"], max_iter=cfg["max_iter"],
                          tol=cfg["tol"]))
    rows, cols = hmap.grid_shape
    grid = result.labels.reshape(rows, cols)
    with (out_dir / "labels.csv").open("w") as fh:
        for r in range(rows):
            fh.write(",".join(str(int(v)) for v in grid[r]) + "\n")
    means = np.stack([hmap.data[result.labels == j].mean(axis=0)
                      if np.any(result.labels == j) else
                      np.zeros(hmap.n_channels)
                      for j in range(cfg["k"])])
    cluster_map = core.HyperMap((cfg["k"], 1), hmap.shift_axis, means)
    core.save_map_csv(cluster_map, out_dir / "cluster_means.csv")
    outputs = ["labels.csv", "cluster_means.csv"]
    doc = {"k": cfg["k"], "inertia": result.inertia,
           "iterations_run": result.iterations_run}
    if cfg["elbow_max"] >= max(cfg["elbow_min"], 1) and cfg["elbow_min"] >= 1:
        curve = cl.elbow_scan(unit, cfg["elbow_min"], cfg["elbow_max"],
                              seed=config["seed"], restarts=cfg["restarts"])
        with (out_dir / "elbow.csv").open("w") as fh:
            fh.write("k,inertia\n")
            for kk, inertia in curve:
                fh.write(f"{kk},{repr(inertia)}\n")
        doc["elbow_knee"] = cl.knee_index(curve)
        outputs.append("elbow.csv")
    (out_dir / "clustering.json").write_bytes(_json_bytes(doc))
    outputs.append("clustering.json")
    write_manifest(out_dir, "cluster", config, {"map": str(map_path)},
                   outputs, timer.stages)


def _load_rows(path: str) -> tuple[np.ndarray, int, int]:
    """Load a dataset (flattened over reps) or a map as spectra rows."""
    try:
        aset = core.load_dataset(path)
        return (aset.data.reshape(-1, aset.n_channels).astype(np.float64),
                aset.n_points, aset.repetitions)
    except core.DatasetError:
        hmap = core.load_map(path)
        return hmap.data, hmap.n_points, 1


def cmd_evaluate(config: dict, out_dir: Path, reference: str,
                 test: str) -> None:
    cfg = config["evaluate"]
    timer = StageTimer()
    ref = core.load_map(reference)
    test_rows, test_points, reps = _load_rows(test)
    if test_points != ref.n_points:
        raise core.DatasetError(
            f"grid mismatch: test holds {test_points} points, "
            f"reference {ref.n_points}")
    if test_rows.shape[1] != ref.n_channels:
        raise core.DatasetError("grid mismatch: channel counts differ")
    ref_rows = np.repeat(ref.data, reps, axis=0)

    def run():
        report = mt.map_metrics(ref_rows, test_rows,
                                window=cfg["ssim_window"], label="evaluate")
        if cfg["kmeans_k"]:
            k = cfg["kmeans_k"]
            ref_unit, _ = pp.l2_normalize_rows(ref.data)
            test_unit, _ = pp.l2_normalize_rows(
                test_rows.reshape(ref.n_points, reps, -1).mean(axis=1))
            ref_labels = cl.kmeans(ref_unit, k, seed=config["seed"]).labels
            test_labels = cl.kmeans(test_unit, k, seed=config["seed"]).labels
            report.kmeans_accuracy = mt.clustering_accuracy(
                ref_labels, test_labels, k)
        return report

    report = timer.time("evaluate", run)
    (out_dir / "metrics.json").write_bytes(_json_bytes(report.to_json_dict()))
    write_manifest(out_dir, "evaluate", config,
                   {"reference": str(reference), "test": str(test)},
                   ["metrics.json"], timer.stages)


def cmd_baseline(config: dict, out_dir: Path, dataset: str,
                 reference: str) -> None:
    cfg = config["baseline"]
    timer = StageTimer()
    aset = core.load_dataset(dataset)
    ref = core.load_map(reference)
    if ref.n_points != aset.n_points:
        raise core.DatasetError("grid mismatch between dataset and reference")
    seed = config["seed"]
    folds = tr.grouped_kfold(np.arange(aset.n_points), cfg["folds"], seed)
    results = {}

    def run():
        raw = aset.data.astype(np.float64)
        for method in cfg["methods"]:
            fold_reports = []
            for fold_idx, val_points in enumerate(folds):
                train_points = np.setdiff1d(np.arange(aset.n_points),
                                            val_points)
                spec = bl.tune_baseline(
                    method, aset.subset_points(train_points),
                    core.HyperMap((1, train_points.size), ref.shift_axis,
                                  ref.data[train_points]),
                    seed=seed, subset_frac=cfg["subset_frac"])
                val_rows = raw[val_points].reshape(-1, aset.n_channels)
                filtered = bl.apply_baseline(spec, val_rows)
                ref_rows = np.repeat(ref.data[val_points], aset.repetitions,
                                     axis=0)
                report = mt.map_metrics(ref_rows, filtered, label=method)
                fold_reports.append({"fold": fold_idx,
                                     "spec": spec.to_json_dict(),
                                     "metrics": report.to_json_dict()})
            mean = mt.mean_reports(
                [mt.MetricsReport(**{k: v for k, v in fr["metrics"].items()
                                     if k in ("rmse", "snr", "ssim")})
                 for fr in fold_reports], label=method)
            results[method] = {"folds": fold_reports,
                               "mean": mean.to_json_dict()}

    timer.time("baseline", run)
    (out_dir / "baseline_report.json").write_bytes(_json_bytes(results))
    write_manifest(out_dir, "baseline", config,
                   {"dataset": str(dataset), "reference": str(reference)},
                   ["baseline_report.json"], timer.stages)


def cmd_noise_scan(config: dict, out_dir: Path, dataset: str) -> None:
    timer = StageTimer()
    aset = core.load_dataset(dataset)
    sizes = config["noise_scan"]["block_sizes"]
    if not sizes:
        sizes = []
        m = 1
        while m <= aset.repetitions // 2:
            sizes.append(m)
            m *= 2
    curve = timer.time("noise_scan",
                       lambda: nd.block_average_curve(aset, sizes))
    with (out_dir / "noise_curve.csv").open("w") as fh:
        fh.write("total_time_s,noise\n")
        for t, n in curve.points:
            fh.write(f"{repr(t)},{repr(n)}\n")
    doc = {"integration_time_ms": aset.integration_time_ms}
    if len(curve.points) >= 3:
        slope, intercept, resid = nd.fit_loglog_slope(curve)
        doc.update(slope=slope, intercept=intercept, residual_std=resid)
    if len(curve.points) >= 5:
        excess, rstd = nd.flicker_departure(curve)
        doc["departure_excess"] = excess
        doc["departure_residual_std"] = rstd
    (out_dir / "noise_fit.json").write_bytes(_json_bytes(doc))
    write_manifest(out_dir, "noise-scan", config, {"dataset": str(dataset)},
                   ["noise_curve.csv", "noise_fit.json"], timer.stages)


def cmd_report(config: dict, out_dir: Path, metrics_paths: list[str]) -> None:
    cfg = config["report"]
    timer = StageTimer()
    rows = []
    for path in metrics_paths:
        doc = json.loads(Path(path).read_text())
        if "mean_noisy" in doc:  # cross-validation report
            rows.append(doc["mean_noisy"])
            rows.append(doc["mean_denoised"])
        elif "label" in doc:  # single evaluate report
            rows.append(doc)
        else:  # baseline report
            for method, entry in sorted(doc.items()):
                row = dict(entry["mean"])
                row["label"] = method
                rows.append(row)
    speedup = mt.workflow_speedup(
        cfg["map_points"], cfg["short_ms"], cfg["long_ms"],
        cfg["train_seconds"], cfg["validation_seconds"],
        cfg["compute_seconds"])
    table = {"rows": rows, "workflow_speedup": speedup}
    (out_dir / "report.json").write_bytes(_json_bytes(table))
    with (out_dir / "report.csv").open("w") as fh:
        fh.write("label,rmse,ssim,snr,kmeans_accuracy\n")
        for row in rows:
            acc = row.get("kmeans_accuracy")
            fh.write(",".join([
                str(row.get("label", "")), repr(row["rmse"]),
                repr(row["ssim"]), repr(row["snr"]),
                "" if acc is None else repr(acc)]) + "\n")
    timer.record("report", [0.0])
    write_manifest(out_dir, "report", config,
                   {"metrics": [str(p) for p in metrics_paths]},
                   ["report.json", "report.csv"], timer.stages)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsdenoise",
        description="Noise2Noise denoising pipeline for 1D hyperspectral maps",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)
    p = sub.add_parser("preprocess", help="despike/baseline a dataset")
    common(p)
    p.add_argument("--dataset", required=True)
    p = sub.add_parser("train", help="train the denoiser")
    common(p)
    p.add_argument("--dataset", required=True)
    p = sub.add_parser("cross-validate", help="grouped k-fold evaluation")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--reference", required=True)
    p = sub.add_parser("denoise", help="apply a trained model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--no-restore-norms", action="store_true")
    p = sub.add_parser("cluster", help="k-means phase map")
    common(p)
    p.add_argument("--map", required=True)
    p = sub.add_parser("evaluate", help="metrics against a reference map")
    common(p)
    p.add_argument("--reference", required=True)
    p.add_argument("--test", required=True)
    p = sub.add_parser("baseline", help="classical-filter benchmark")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--reference", required=True)
    p = sub.add_parser("noise-scan", help="block-averaging noise curve")
    common(p)
    p.add_argument("--dataset", required=True)
    p = sub.add_parser("report", help="aggregate metrics JSONs")
    common(p)
    p.add_argument("--metrics", nargs="+", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        config = load_config(args.config, extra)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "synth":
            cmd_synth(config, out_dir)
        elif args.command == "preprocess":
            cmd_preprocess(config, out_dir, args.dataset)
        elif args.command == "train":
            cmd_train(config, out_dir, args.dataset)
        elif args.command == "cross-validate":
            cmd_cross_validate(config, out_dir, args.dataset, args.reference)
        elif args.command == "denoise":
            cmd_denoise(config, out_dir, args.model, args.dataset,
                        not args.no_restore_norms)
        elif args.command == "cluster":
            cmd_cluster(config, out_dir, args.map)
        elif args.command == "evaluate":
            cmd_evaluate(config, out_dir, args.reference, args.test)
        elif args.command == "baseline":
            cmd_baseline(config, out_dir, args.dataset, args.reference)
        elif args.command == "noise-scan":
            cmd_noise_scan(config, out_dir, args.dataset)
        elif args.command == "report":
            cmd_report(config, out_dir, args.metrics)
        return 0
    except ConfigError as exc:
        _fail(args.command, exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except (core.DatasetError, FileNotFoundError, ValueError) as exc:
        _fail(args.command, exc, EXIT_DATA)
        return EXIT_DATA
    except (tr.TrainingDiverged, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(args.command, exc, EXIT_NUMERIC)
        return EXIT_NUMERIC


def _fail(command: str, exc: Exception, code: int) -> None:
    doc = {"command": command, "error": str(exc),
           "error_type": type(exc).__name__, "exit_code": code}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

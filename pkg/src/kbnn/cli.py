"""Command-line surface: train/eval/predict models, emit prediction grids,
generate synthetic data, and run benchmark sweeps.

All randomness flows from one ``--seed`` through named substreams (data /
split / init / shuffle), so outputs are reproducible; repeats and sweep cells
run in a worker pool capped by the ``KBNN_THREADS`` environment variable and
are merged deterministically by index.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .activations import activation_from_name
from .datasets import (
    CirclesSpec,
    CubicSpec,
    MoonsSpec,
    cubic_points,
    gen_circles,
    gen_moons,
    make_split,
    read_csv_columns,
    rotate_moons,
)
from .exceptions import KBNNError
from .forward import predict_batch
from .metrics import evaluate_predictions
from .network import PriorSpec, init_network, load_model, save_model
from .trainer import TrainConfig, evaluate_on_split, train, update_one

REPORT_FORMAT = "kbnn-report-v1"

# substream tags for SeedSequence entropy lists
_DATA, _SPLIT, _INIT, _SHUFFLE = 0xDA7A, 0x59171, 0x1217, 0x5FF1E


def _entropy(*parts) -> list[int]:
    return [int(p) for p in parts]


def max_workers(n_tasks: int) -> int:
    cap = os.environ.get("KBNN_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def run_tasks(fn, payloads):
    """Run payloads through ``fn``, in a process pool when allowed more than
    one worker; results keep payload order."""
    workers = max_workers(len(payloads))
    if workers == 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


# ---------------------------------------------------------------------------
# dataset resolution


def parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def parse_arch(text: str) -> list[int]:
    arch = parse_int_list(text)
    if len(arch) < 2:
        raise ValueError(f"arch needs at least input and output widths: {text!r}")
    return arch


def parse_acts(text: str):
    return [activation_from_name(tok) for tok in text.split(",") if tok.strip()]


def synth_points(kind: str, n: int, noise_std: float, radius_factor: float, seed):
    if kind == "cubic":
        x, y = cubic_points(CubicSpec(n=n, noise_std=noise_std), seed)
        return x, y, False
    if kind == "moons":
        spec = MoonsSpec(n=n, noise_std=noise_std)
        x, y = gen_moons(spec.n, spec.noise_std, seed)
        return x, y, True
    if kind == "circles":
        spec = CirclesSpec(n=n, noise_std=noise_std, radius_factor=radius_factor)
        x, y = gen_circles(spec.n, spec.noise_std, spec.radius_factor, seed)
        return x, y, True
    raise ValueError(f"unknown synthetic dataset {kind!r}")


def resolve_points(args):
    """Return (x, y, classification) from --synth or --csv options."""
    if args.synth:
        data_seed = np.random.SeedSequence(_entropy(args.seed, _DATA))
        return synth_points(args.synth, args.n, args.noise_std,
                            args.radius_factor, data_seed)
    if args.csv:
        if args.target is None:
            raise ValueError("--csv requires --target")
        header, data = read_csv_columns(args.csv)
        if isinstance(args.target, str) and args.target.lstrip("-").isdigit():
            idx = int(args.target)
        elif args.target in header:
            idx = header.index(args.target)
        else:
            raise ValueError(f"target column {args.target!r} not in header {header}")
        y = data[:, idx]
        x = np.delete(data, idx, axis=1)
        return x, y, False
    raise ValueError("provide a data source: --synth KIND or --csv PATH")


# ---------------------------------------------------------------------------
# train / bench worker


@dataclass
class RepeatTask:
    """Everything one repeat needs; picklable for the worker pool."""

    x: np.ndarray
    y: np.ndarray
    arch: list[int]
    act_tokens: list[str]
    classification: bool
    test_fraction: float = 0.1
    standardize: bool = True
    epochs: int = 1
    shuffle: bool = True
    prior_var: float = 1.0
    obs_noise: float = 0.0
    eval_every: int | None = None
    eval_at: list[int] = field(default_factory=list)
    eval_at_epochs: list[int] = field(default_factory=list)
    seed: int = 0
    repeat: int = 0
    return_model: bool = False
    verbose: bool = False


def run_repeat(task: RepeatTask) -> dict:
    acts = [activation_from_name(t) for t in task.act_tokens]
    classification = task.classification or acts[-1].bounded_output
    split = make_split(
        task.x, task.y, task.test_fraction,
        seed=np.random.SeedSequence(_entropy(task.seed, task.repeat, _SPLIT)),
        standardize_features=task.standardize,
        standardize_targets=task.standardize and not classification,
    )
    if task.arch[0] != split.n_features or task.arch[-1] != split.n_targets:
        raise ValueError(
            f"arch {task.arch} does not match dataset dims "
            f"d={split.n_features}, e={split.n_targets}"
        )
    net = init_network(
        task.arch, acts, PriorSpec(task.prior_var),
        seed=np.random.SeedSequence(_entropy(task.seed, task.repeat, _INIT)),
    )
    n_train = split.train_x.shape[0]
    eval_at = list(task.eval_at)
    eval_at += [e * n_train for e in task.eval_at_epochs]
    cfg = TrainConfig(
        epochs=task.epochs, shuffle_each_epoch=task.shuffle,
        sigma0_sq=task.prior_var, observation_noise=task.obs_noise,
        eval_every=task.eval_every, eval_at=sorted(set(eval_at)) or None,
        seed=np.random.SeedSequence(_entropy(task.seed, task.repeat, _SHUFFLE)),
    )
    progress = None
    if task.verbose:
        progress = lambda line: print(f'{{"repeat": {task.repeat}, '
                                      f'"checkpoint": {line}}}', file=sys.stderr)
    net, report = train(net, split, cfg, progress=progress)
    final = evaluate_on_split(net, split)
    out = {
        "repeat": task.repeat,
        "rmse": final.rmse,
        "nll": final.nll,
        "accuracy": final.accuracy,
        "n_test": final.n,
        "n_train": n_train,
        "skipped": report.skipped,
        "instances_processed": report.instances_processed,
        "train_seconds": report.train_seconds,
        "mean_update_ms": report.mean_update_ms,
        "checkpoints": [c.to_dict() for c in report.checkpoints],
    }
    if task.return_model:
        out["_net"] = net
    return out


def summarize(values) -> dict | None:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    arr = np.asarray(vals, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "std": std}


def summary_block(repeats: list[dict]) -> dict:
    return {key: summarize([r[key] for r in repeats])
            for key in ("rmse", "nll", "accuracy", "train_seconds", "mean_update_ms")}


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    if args.noise_std is None:
        args.noise_std = 3.0 if args.kind == "cubic" else 0.1
    seed = np.random.SeedSequence(_entropy(args.seed, _DATA))
    x, y, classification = synth_points(args.kind, args.n, args.noise_std,
                                        args.radius_factor, seed)
    if classification:
        header = ["x1", "x2", "label"]
        rows = [[repr(float(a)), repr(float(b)), int(l)] for (a, b), l in zip(x, y)]
    else:
        header = ["x", "y"]
        rows = [[repr(float(a[0])), repr(float(b))] for a, b in zip(x, y)]
    write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _dataset_args(parser):
    parser.add_argument("--synth", choices=["cubic", "moons", "circles"],
                        help="synthetic dataset kind")
    parser.add_argument("--csv", help="CSV file (header row, numeric cells)")
    parser.add_argument("--target", default=None,
                        help="target column name or index for --csv")
    parser.add_argument("--n", type=int, default=None,
                        help="synthetic sample count (defaults per kind)")
    parser.add_argument("--noise-std", type=float, default=None,
                        help="synthetic noise level (defaults per kind)")
    parser.add_argument("--radius-factor", type=float, default=0.8)


def _fill_synth_defaults(args):
    if args.synth == "cubic":
        args.n = args.n or 800
        args.noise_std = 3.0 if args.noise_std is None else args.noise_std
    elif args.synth in ("moons", "circles"):
        args.n = args.n or 1500
        args.noise_std = 0.1 if args.noise_std is None else args.noise_std


def cmd_train(args) -> int:
    _fill_synth_defaults(args)
    x, y, classification = resolve_points(args)
    arch = parse_arch(args.arch)
    act_tokens = [t.strip() for t in args.act.split(",") if t.strip()]
    eval_at = parse_int_list(args.eval_at) if args.eval_at else []
    tasks = [
        RepeatTask(
            x=x, y=y, arch=arch, act_tokens=act_tokens,
            classification=classification, test_fraction=args.test_fraction,
            standardize=args.standardize, epochs=args.epochs,
            shuffle=args.shuffle, prior_var=args.prior_var,
            obs_noise=args.obs_noise, eval_every=args.eval_every,
            eval_at=eval_at, seed=args.seed, repeat=r,
            return_model=(r == 0), verbose=args.verbose,
        )
        for r in range(args.repeats)
    ]
    results = run_tasks(run_repeat, tasks)
    net = results[0].pop("_net")
    if args.out_model:
        save_model(net, args.out_model)
    report = {
        "format": REPORT_FORMAT,
        "command": "train",
        "seed": args.seed,
        "dataset": {
            "source": f"synth:{args.synth}" if args.synth else f"csv:{args.csv}",
            "n": int(x.shape[0]),
            "d": int(x.shape[1]),
            "classification": bool(classification),
        },
        "arch": arch,
        "activations": act_tokens,
        "config": {
            "epochs": args.epochs,
            "shuffle_each_epoch": args.shuffle,
            "prior_variance": args.prior_var,
            "observation_noise": args.obs_noise,
            "test_fraction": args.test_fraction,
            "standardize": args.standardize,
            "repeats": args.repeats,
        },
        "repeats": results,
        "summary": summary_block(results),
    }
    if args.out_report:
        write_json(args.out_report, report)
    s = report["summary"]
    line = {k: (None if s[k] is None else round(s[k]["mean"], 4))
            for k in ("rmse", "nll", "accuracy")}
    print(json.dumps({"summary": line, "model": args.out_model,
                      "report": args.out_report}))
    return 0


def cmd_eval(args) -> int:
    net = load_model(args.model)
    _fill_synth_defaults(args)
    x, y, classification = resolve_points(args)
    means, variances, _, _ = predict_batch(net, x)
    targets = y if y.ndim == 2 else y[:, None]
    classification = classification or net.layers[-1].activation.bounded_output
    result = evaluate_predictions(means, variances, targets,
                                  classification=classification)
    doc = {"format": REPORT_FORMAT, "command": "eval", "model": args.model,
           "metrics": result.to_dict()}
    if args.out:
        write_json(args.out, doc)
    print(json.dumps(doc["metrics"]))
    return 0


def cmd_predict(args) -> int:
    net = load_model(args.model)
    header, data = read_csv_columns(args.csv)
    if args.target is not None:
        if args.target in header:
            idx = header.index(args.target)
        else:
            idx = int(args.target)
        data = np.delete(data, idx, axis=1)
        header = [h for i, h in enumerate(header) if i != idx]
    if data.shape[1] != net.input_dim:
        raise ValueError(
            f"model expects {net.input_dim} features, CSV provides {data.shape[1]}"
        )
    means, variances, _, pvars = predict_batch(net, data)
    out_header = header + [
        f"mean_{i}" for i in range(net.output_dim)
    ] + [f"variance_{i}" for i in range(net.output_dim)] + [
        f"pre_activation_variance_{i}" for i in range(net.output_dim)
    ]
    rows = []
    for i in range(data.shape[0]):
        row = [repr(float(v)) for v in data[i]]
        row += [repr(float(v)) for v in means[i]]
        row += [repr(float(v)) for v in variances[i]]
        row += [repr(float(v)) for v in pvars[i]]
        rows.append(row)
    write_csv(args.out, out_header, rows)
    print(f"wrote {len(rows)} predictions to {args.out}")
    return 0


def cmd_grid(args) -> int:
    net = load_model(args.model)
    if net.input_dim != 2:
        raise ValueError(f"grid needs a 2-input model, got input_dim={net.input_dim}")
    if args.resolution < 1:
        raise ValueError("resolution must be >= 1")
    xs = np.linspace(args.xmin, args.xmax, args.resolution)
    ys = np.linspace(args.ymin, args.ymax, args.resolution)
    rows = []
    for x1 in xs:
        batch = np.column_stack([np.full_like(ys, x1), ys])
        means, variances, _, pvars = predict_batch(net, batch)
        for j, x2 in enumerate(ys):
            rows.append([repr(float(x1)), repr(float(x2)),
                         repr(float(means[j, 0])), repr(float(variances[j, 0])),
                         repr(float(pvars[j, 0]))])
    write_csv(args.out, ["x1", "x2", "mean", "variance",
                         "pre_activation_variance"], rows)
    print(f"wrote {len(rows)} grid rows to {args.out}")
    return 0


_BENCH_HEADER = ["sweep", "value", "rmse_mean", "rmse_std", "nll_mean",
                 "nll_std", "accuracy_mean", "accuracy_std",
                 "train_seconds_mean", "train_seconds_std"]


def _bench_base(args, d, e):
    hidden_act, output_act = args.act.split(",")[0], args.act.split(",")[-1]
    arch = parse_arch(args.arch) if args.arch else [d, args.neurons, e]
    acts = [hidden_act] * (len(arch) - 2) + [output_act]
    return hidden_act, output_act, arch, acts


def _emit_bench(args, cell_docs) -> int:
    rows = []
    for cell in cell_docs:
        row = [cell["sweep"], cell["value"]]
        for key in ("rmse", "nll", "accuracy", "train_seconds"):
            s = cell["summary"][key]
            row += ["" if s is None else repr(s["mean"]),
                    "" if s is None else repr(s["std"])]
        rows.append(row)
    if args.out_csv:
        write_csv(args.out_csv, _BENCH_HEADER, rows)
    doc = {"format": REPORT_FORMAT, "command": "bench", "seed": args.seed,
           "sweep": args.sweep, "repeats": args.repeats, "cells": cell_docs}
    if args.out_report:
        write_json(args.out_report, doc)
    print(json.dumps({"cells": len(cell_docs), "csv": args.out_csv,
                      "report": args.out_report}))
    return 0


def _bench_epochs(args, x, y, classification, d, e, values) -> int:
    """Learning curve over epochs: one training run per repeat, checkpointed
    at each requested epoch boundary."""
    _, _, arch, acts = _bench_base(args, d, e)
    values = sorted(set(values))
    tasks = [RepeatTask(
        x=x, y=y, arch=arch, act_tokens=acts, classification=classification,
        test_fraction=args.test_fraction, standardize=args.standardize,
        epochs=max(values), shuffle=args.shuffle, prior_var=args.prior_var,
        obs_noise=args.obs_noise, eval_at_epochs=values, seed=args.seed,
        repeat=r,
    ) for r in range(args.repeats)]
    results = run_tasks(run_repeat, tasks)
    cell_docs = []
    for v in values:
        reps = []
        for res in results:
            mark = v * res["n_train"]
            cp = next(c for c in res["checkpoints"]
                      if c["instances_seen"] == mark)
            reps.append({"repeat": res["repeat"], "rmse": cp["rmse"],
                         "nll": cp["nll"], "accuracy": cp["accuracy"],
                         "train_seconds": cp["wall_seconds"],
                         "mean_update_ms": res["mean_update_ms"],
                         "skipped": res["skipped"]})
        cell_docs.append({"sweep": "epochs", "value": v, "arch": arch,
                          "activations": acts, "epochs": v, "repeats": reps,
                          "summary": summary_block(reps)})
    return _emit_bench(args, cell_docs)


def cmd_bench(args) -> int:
    _fill_synth_defaults(args)
    x, y, classification = resolve_points(args)
    d, e = x.shape[1], (y.shape[1] if y.ndim == 2 else 1)
    name, _, values_text = args.sweep.partition("=")
    name = name.strip()
    values = parse_int_list(values_text)
    if name == "epochs":
        return _bench_epochs(args, x, y, classification, d, e, values)
    hidden_act, output_act, _, _ = _bench_base(args, d, e)
    cells = []
    if name == "layers":
        for v in values:
            cells.append((v, [d] + [args.neurons] * v + [e],
                          [hidden_act] * v + [output_act]))
    elif name == "neurons":
        for v in values:
            cells.append((v, [d, v, e], [hidden_act, output_act]))
    else:
        raise ValueError(f"unknown sweep parameter {name!r} "
                         "(expected layers=, neurons=, or epochs=)")
    tasks, index = [], []
    for c, (value, arch, acts) in enumerate(cells):
        for r in range(args.repeats):
            tasks.append(RepeatTask(
                x=x, y=y, arch=arch, act_tokens=acts,
                classification=classification, test_fraction=args.test_fraction,
                standardize=args.standardize, epochs=args.epochs,
                shuffle=args.shuffle, prior_var=args.prior_var,
                obs_noise=args.obs_noise, seed=args.seed + 1000 * c, repeat=r,
            ))
            index.append(c)
    results = run_tasks(run_repeat, tasks)
    grouped = [[] for _ in cells]
    for pos, res in zip(index, results):
        grouped[pos].append(res)
    cell_docs = []
    for (value, arch, acts), reps in zip(cells, grouped):
        cell_docs.append({"sweep": name, "value": value, "arch": arch,
                          "activations": acts, "epochs": args.epochs,
                          "repeats": reps, "summary": summary_block(reps)})
    return _emit_bench(args, cell_docs)


def cmd_rotating_moons(args) -> int:
    arch = parse_arch(args.arch)
    acts = [activation_from_name(t) for t in args.act.split(",")]
    os.makedirs(args.out_dir, exist_ok=True)
    base_seed = np.random.SeedSequence(_entropy(args.seed, _DATA))
    x, y = gen_moons(args.initial_n, args.noise_std, base_seed)
    split = make_split(x, y, 0.1,
                       seed=np.random.SeedSequence(_entropy(args.seed, 0, _SPLIT)),
                       standardize_targets=False)
    center = split.standardizer.inverse_features(split.train_x).mean(axis=0)
    net = init_network(arch, acts, PriorSpec(args.prior_var),
                       seed=np.random.SeedSequence(_entropy(args.seed, 0, _INIT)))
    cfg = TrainConfig(epochs=args.epochs, shuffle_each_epoch=False,
                      observation_noise=args.obs_noise, seed=0)
    net, _ = train(net, split, cfg)
    raw_test_x = split.standardizer.inverse_features(split.test_x)
    test_labels = split.test_y[:, 0]

    def eval_rotated(angle):
        test_pts = rotate_moons(raw_test_x, angle, center=center) if angle else raw_test_x
        means, variances, _, _ = predict_batch(net, test_pts)
        return evaluate_predictions(means, variances, test_labels[:, None],
                                    classification=True)

    rows = []
    res = eval_rotated(0.0)
    rows.append([0, repr(0.0), repr(res.accuracy), repr(res.nll)])
    t0 = time.perf_counter()
    for step in range(1, args.steps + 1):
        angle = step * args.step_degrees
        step_seed = np.random.SeedSequence(_entropy(args.seed, step, _DATA))
        bx, by = gen_moons(args.per_step_n, args.noise_std, step_seed)
        bx = rotate_moons(bx, angle, center=center)
        for _ in range(args.step_epochs):
            for i in range(bx.shape[0]):
                net = update_one(net, bx[i], np.atleast_1d(by[i]),
                                 args.obs_noise)
        res = eval_rotated(angle)
        rows.append([step, repr(float(angle)), repr(res.accuracy), repr(res.nll)])
        if args.grid_resolution:
            _write_step_grid(net, args, step)
    write_csv(os.path.join(args.out_dir, "accuracy.csv"),
              ["step", "degrees", "accuracy", "nll"], rows)
    print(json.dumps({"steps": args.steps,
                      "final_accuracy": float(rows[-1][2]),
                      "seconds": round(time.perf_counter() - t0, 3),
                      "out_dir": args.out_dir}))
    return 0


def _write_step_grid(net, args, step):
    lo, hi = args.grid_range
    xs = np.linspace(lo, hi, args.grid_resolution)
    rows = []
    for x1 in xs:
        batch = np.column_stack([np.full_like(xs, x1), xs])
        means, variances, _, pvars = predict_batch(net, batch)
        for j, x2 in enumerate(xs):
            rows.append([repr(float(x1)), repr(float(x2)),
                         repr(float(means[j, 0])), repr(float(variances[j, 0])),
                         repr(float(pvars[j, 0]))])
    path = os.path.join(args.out_dir, f"grid_step_{step:02d}.csv")
    write_csv(path, ["x1", "x2", "mean", "variance", "pre_activation_variance"],
              rows)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbnn",
        description="Gradient-free Bayesian MLP training via Kalman "
                    "filtering/smoothing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=["cubic", "moons", "circles"], required=True)
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--noise-std", type=float, default=None)
    p.add_argument("--radius-factor", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="train a model, write model + report")
    _dataset_args(p)
    p.add_argument("--arch", required=True, help="layer widths, e.g. 13,50,1")
    p.add_argument("--act", required=True, help="activations, e.g. relu,linear")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--no-shuffle", dest="shuffle", action="store_false")
    p.add_argument("--prior-var", type=float, default=1.0)
    p.add_argument("--obs-noise", type=float, default=0.0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--eval-every", type=int, default=None)
    p.add_argument("--eval-at", default=None,
                   help="comma list of instance checkpoints, e.g. 5,50,500")
    p.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true",
                   help="stream checkpoint JSON lines to stderr")
    p.add_argument("--out-model", default=None)
    p.add_argument("--out-report", default=None)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    p.add_argument("--model", required=True)
    _dataset_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("predict", help="predict on feature rows from a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--csv", required=True)
    p.add_argument("--target", default=None,
                   help="drop this column before predicting")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("grid", help="emit a 2-D prediction grid CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("bench", help="benchmark sweeps over layers/neurons/epochs")
    _dataset_args(p)
    p.add_argument("--sweep", required=True,
                   help="layers=1,2,3,4 | neurons=10,50,100,200 | epochs=1..20")
    p.add_argument("--arch", default=None, help="base arch for epochs sweeps")
    p.add_argument("--act", default="relu,linear",
                   help="hidden and output activation, e.g. relu,linear")
    p.add_argument("--neurons", type=int, default=10,
                   help="per-layer width for layers= sweeps")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--no-shuffle", dest="shuffle", action="store_false")
    p.add_argument("--prior-var", type=float, default=1.0)
    p.add_argument("--obs-noise", type=float, default=0.0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-report", default=None)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("rotating-moons",
                       help="online adaptation on a rotating moons stream")
    p.add_argument("--initial-n", type=int, default=1500)
    p.add_argument("--per-step-n", type=int, default=100)
    p.add_argument("--steps", type=int, default=18)
    p.add_argument("--step-degrees", type=float, default=20.0)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--arch", default="2,10,10,1")
    p.add_argument("--act", default="relu,relu,sigmoid")
    p.add_argument("--epochs", type=int, default=1,
                   help="passes over the initial dataset")
    p.add_argument("--step-epochs", type=int, default=2,
                   help="passes over each adaptation batch; >1 counteracts "
                        "the weight the accumulated old evidence carries "
                        "against a small batch from the shifted distribution")
    p.add_argument("--prior-var", type=float, default=1.0)
    p.add_argument("--obs-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-resolution", type=int, default=0)
    p.add_argument("--grid-range", type=float, nargs=2, default=(-3.0, 3.5))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_rotating_moons)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (KBNNError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``qxg <command> [options]``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from .actions import (
    DEFAULT_THRESHOLDS,
    ActionLabel,
    ActionThresholds,
    label_scene,
    labels_csv,
    make_windows,
)
from .calculi import DEFAULT_CONFIG, CalculiConfig
from .explain import ExplanationQuery, explain
from .features import Dataset, concat, encode_windows, read_dataset, write_dataset
from .graph import Qxg, build, iter_steps, load_graph
from .learn import (
    ModelFileError,
    OneClassBundle,
    SoftmaxModel,
    evaluate,
    load_model,
    model_id,
    save_model,
    train_multiclass,
    train_one_class,
)
from .scenarios import KINDS, ScenarioSpec, generate
from .scene import SceneError, load_scene, serialize_scene

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("qxg")


class CliError(Exception):
    pass


# --- configuration -----------------------------------------------------------

def load_config(path) -> tuple[CalculiConfig, ActionThresholds]:
    """Read calculi and threshold overrides from a TOML file.

    Keys may be top level or grouped under ``[calculi]`` / ``[actions]``.
    """
    if path is None:
        return DEFAULT_CONFIG, DEFAULT_THRESHOLDS
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    calc_fields = {f.name for f in dataclasses.fields(CalculiConfig)}
    th_fields = {f.name for f in dataclasses.fields(ActionThresholds)}
    unknown = set(flat) - calc_fields - th_fields
    if unknown:
        raise CliError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    calc = {k: v for k, v in flat.items() if k in calc_fields}
    if "qdc_bounds" in calc:
        calc["qdc_bounds"] = tuple(float(x) for x in calc["qdc_bounds"])
    try:
        return (CalculiConfig(**calc),
                ActionThresholds(**{k: float(v) for k, v in flat.items() if k in th_fields}))
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad config: {exc}") from exc


def _scene(args, path):
    return load_scene(path, strict=not args.lenient)


def _write(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


# --- commands ------------------------------------------------------------------

def cmd_generate(args, cfg, th) -> None:
    seed = args.seed
    params = dict(frames=args.frames, frame_rate_hz=args.rate, objects=args.objects)
    if args.count is None:
        scene = generate(ScenarioSpec(args.kind, seed=seed, **params))
        _write(args.out, serialize_scene(scene).decode())
        return
    if seed is None:
        seed = 0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for s in range(seed, seed + args.count):
        scene = generate(ScenarioSpec(args.kind, seed=s, **params))
        (out_dir / f"{scene.scene_id}.json").write_bytes(serialize_scene(scene))


def cmd_build(args, cfg, th) -> None:
    scene = _scene(args, args.scene)
    qxg, stats = build(scene, cfg, window=args.window, max_pair_distance=args.max_pair_distance,
                       parallel_pairs=args.parallel_pairs)
    _write(args.out, qxg.dumps())
    if args.stats:
        _write(args.stats, stats.to_csv())


def cmd_label(args, cfg, th) -> None:
    scene = _scene(args, args.scene)
    _write(args.out, labels_csv(scene.scene_id, label_scene(scene, th, args.n)))


def _scene_files(path) -> list[Path]:
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    if not files:
        raise CliError(f"no scene files in {path}")
    return files


def cmd_dataset(args, cfg, th) -> None:
    parts, lines = [], []
    for f in _scene_files(args.scenes):
        scene = _scene(args, f)
        qxg, _ = build(scene, cfg)
        windows = make_windows(scene, qxg, th, args.n, ego_only=args.ego_only)
        parts.append(encode_windows(windows, args.n))
        if args.windows_out:
            lines.extend(w.to_json() for w in windows)
    ds = concat(parts)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_dataset(ds, fh)
    if args.windows_out:
        _write(args.windows_out, "".join(line + "\n" for line in lines))
    counts = {a.value: ds.labels.count(a) for a in ds.actions}
    log.info("%d windows from %d scene(s): %s", len(ds), len(parts), counts)


def _read_dataset(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return read_dataset(fh)


def cmd_train(args, cfg, th) -> None:
    ds = _read_dataset(args.dataset)
    seed = 0 if args.seed is None else args.seed
    if args.classifier == "softmax":
        model = train_multiclass(ds.X, ds.labels, learning_rate=args.lr, epochs=args.epochs,
                                 l2=args.l2, seed=seed)
    else:
        if args.action == "all":
            actions = None
        else:
            action = ActionLabel.parse(args.action)
            if ds.labels.count(action) == 0:
                raise CliError(f"no samples for action {action.value} in {args.dataset}")
            actions = [action]
        params = ({"n_trees": args.trees, "subsample": args.subsample}
                  if args.classifier == "iforest" else {"k": args.neighbors})
        model = train_one_class(ds.X, ds.labels, args.classifier, args.contamination, seed,
                                actions, **params)
        if not model.models:
            raise CliError("no samples: " + "; ".join(model.skipped or ["empty dataset"]))
    save_model(model, args.out)
    log.info("model %s written to %s", model_id(model), args.out)


def cmd_eval(args, cfg, th) -> None:
    model = load_model(args.model)
    ds = _read_dataset(args.dataset)
    if not isinstance(model, (OneClassBundle, SoftmaxModel)):
        raise CliError("eval needs a one-class bundle or a softmax model")
    _write(args.out, evaluate(model, ds.X, ds.labels).to_csv())


def cmd_explain(args, cfg, th) -> None:
    if (args.scene is None) == (args.graph is None):
        raise CliError("give exactly one of --scene or --graph")
    qxg = build(_scene(args, args.scene), cfg)[0] if args.scene else load_graph(args.graph, cfg)
    bundle = load_model(args.model)
    if not isinstance(bundle, OneClassBundle):
        raise CliError("explain needs a one-class model bundle")
    query = ExplanationQuery(args.actor, ActionLabel.parse(args.action), args.frame, args.n,
                             args.top)
    report = explain(qxg, query, bundle, model_id=model_id(bundle), all_pairs=args.all_pairs)
    if args.json:
        _write(args.json, report.to_json())
    sys.stdout.write(report.to_text())


def parse_range(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+)(?::(\d+))?)?", text.strip())
    if not m:
        raise CliError(f"bad range {text!r}; expected A..B:step")
    lo = int(m[1])
    hi = int(m[2]) if m[2] else lo
    step = int(m[3]) if m[3] else 1
    if hi < lo or step < 1:
        raise CliError(f"bad range {text!r}")
    return list(range(lo, hi + 1, step))


def bench_rows(objects: list[int], frames: int, repeat: int = 1, seed: int = 0,
               parallel_pairs: int = 0, max_pair_distance=None) -> list[dict]:
    rows = []
    for n in objects:
        times = []
        for rep in range(repeat):
            scene = generate(ScenarioSpec("random_traffic", seed=seed + rep, frames=frames,
                                          objects=n))
            qxg = Qxg(scene.scene_id)
            times.extend(elapsed for _, _, elapsed in iter_steps(
                scene, qxg, parallel_pairs=parallel_pairs, max_pair_distance=max_pair_distance))
        t = np.array(times)
        rows.append({
            "objects": n,
            "frames": frames,
            "mean_us": float(t.mean()),
            "p95_us": float(np.percentile(t, 95)),
            "max_us": float(t.max()),
            "pairs_per_frame": math.comb(n + 1, 2),
            "parallel_pairs": parallel_pairs,
        })
    return rows


BENCH_COLUMNS = ("objects", "frames", "mean_us", "p95_us", "max_us", "pairs_per_frame",
                 "parallel_pairs")


def bench_csv(rows: list[dict]) -> str:
    out = [",".join(BENCH_COLUMNS)]
    for r in rows:
        out.append(f"{r['objects']},{r['frames']},{r['mean_us']:.1f},{r['p95_us']:.1f},"
                   f"{r['max_us']:.1f},{r['pairs_per_frame']},{r['parallel_pairs']}")
    return "\n".join(out) + "\n"


def cmd_bench(args, cfg, th) -> None:
    if args.frames < 5:
        raise CliError("--frames must be at least 5")
    rows = bench_rows(parse_range(args.objects), args.frames, args.repeat,
                      0 if args.seed is None else args.seed, args.parallel_pairs,
                      args.max_pair_distance)
    _write(args.out, bench_csv(rows))
    for r in rows:
        log.info("%d objects: mean %.1f ms/frame", r["objects"], r["mean_us"] / 1000)


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: 0)")
    common.add_argument("--config", default=None,
                        help="TOML file overriding calculi / threshold defaults")
    common.add_argument("--lenient", action="store_true",
                        help="ignore unknown keys in scene files instead of rejecting them")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qxg", description=__doc__,
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_,
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sp.set_defaults(func=fn)
        return sp

    sp = add("generate", cmd_generate, "write synthetic scene(s)")
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--frames", type=int, default=40)
    sp.add_argument("--rate", type=float, default=2.0, help="frame rate in Hz")
    sp.add_argument("--objects", type=int, default=20, help="object count for random_traffic")
    sp.add_argument("--count", type=int, default=None,
                    help="write COUNT scenes with consecutive seeds into the --out directory")
    sp.add_argument("--out", required=True)

    sp = add("build", cmd_build, "build the graph of a scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--window", type=int, default=None, help="keep only the last K frames")
    sp.add_argument("--stats", default=None, help="per-frame timing CSV")
    sp.add_argument("--max-pair-distance", type=float, default=None,
                    help="skip pairs farther apart than this (meters)")
    sp.add_argument("--parallel-pairs", type=int, default=0,
                    help="worker threads for pair relations (0 = sequential)")

    sp = add("label", cmd_label, "label ego actions of a scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("-n", type=int, default=5, help="window length")

    sp = add("dataset", cmd_dataset, "encode labeled windows of scenes")
    sp.add_argument("--scenes", required=True, help="scene file or directory of *.json")
    sp.add_argument("--out", required=True)
    sp.add_argument("--windows-out", default=None, help="also write windows as JSON lines")
    sp.add_argument("-n", type=int, default=5, help="window length")
    sp.add_argument("--ego-only", action="store_true", help="only pairs involving the ego")

    sp = add("train", cmd_train, "train action classifiers")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--classifier", choices=("iforest", "lof", "softmax"), default="iforest")
    sp.add_argument("--action", default="all", help="action label or 'all'")
    sp.add_argument("--out", required=True)
    sp.add_argument("--contamination", type=float, default=0.1)
    sp.add_argument("--trees", type=int, default=100)
    sp.add_argument("--subsample", type=int, default=256)
    sp.add_argument("--neighbors", type=int, default=20)
    sp.add_argument("--epochs", type=int, default=500)
    sp.add_argument("--lr", type=float, default=0.5)
    sp.add_argument("--l2", type=float, default=1e-4)

    sp = add("eval", cmd_eval, "recall/precision of a model on a dataset")
    sp.add_argument("--model", required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--out", required=True)

    sp = add("explain", cmd_explain, "rank object pairs explaining an action")
    sp.add_argument("--scene", default=None)
    sp.add_argument("--graph", default=None)
    sp.add_argument("--model", required=True)
    sp.add_argument("--actor", default="ego")
    sp.add_argument("--action", required=True)
    sp.add_argument("--frame", type=int, required=True, help="last frame of the window")
    sp.add_argument("-n", type=int, default=5, help="window length")
    sp.add_argument("--top", type=int, default=3)
    sp.add_argument("--all-pairs", action="store_true", help="score every pair, not only the actor's")
    sp.add_argument("--json", default=None, help="also write the report as JSON")

    sp = add("bench", cmd_bench, "time per-frame graph construction")
    sp.add_argument("--objects", required=True, help="object counts as A..B:step")
    sp.add_argument("--frames", type=int, default=40)
    sp.add_argument("--repeat", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--parallel-pairs", type=int, default=0)
    sp.add_argument("--max-pair-distance", type=float, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg, th = load_config(args.config)
        args.func(args, cfg, th)
    except (CliError, SceneError, ModelFileError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"qxg {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

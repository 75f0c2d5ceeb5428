"""Command-line surface: synth, train, attack, report, gradcheck, replay.

Every file-writing command drops a run_manifest.json with the fully resolved
argument vector; `moperturb replay <manifest>` re-executes it and reproduces
the outputs bitwise. Exit codes: 0 success, 1 check failure, 2 usage or
config error, 3 missing input. MOPERTURB_THREADS caps per-sequence
parallelism in batch attacks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, attack, predict, report, synth
from .core import MotionSequence, interval_to_frame, mpjpe_curve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3

DEFAULT_EPSILONS = (0.01, 0.02, 0.03, 0.04, 0.05)
DEFAULT_INTERVALS_MS = (80.0, 160.0, 320.0, 400.0, 560.0, 1000.0)

_CONSTRAINT_BY_FLAG = {
    "none": "none",
    "temporal": "temporal_only",
    "bone": "bone_only",
    "both": "both",
}


def _write_json(path: Path, payload: dict) -> None:
    synth._atomic_write_text(path, json.dumps(payload))


def _env_workers() -> int:
    raw = os.environ.get("MOPERTURB_THREADS")
    if raw is None:
        return 1
    workers = int(raw)
    if workers < 1:
        raise ValueError(f"MOPERTURB_THREADS must be at least 1, got {workers}")
    return workers


@dataclass(frozen=True)
class RunManifest:
    """Record of one command invocation, sufficient to replay it bitwise."""

    tool_version: str
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    outputs: list[str]
    duration_s: float

    @classmethod
    def load(cls, path: "str | Path") -> "RunManifest":
        raw = json.loads(Path(path).read_text())
        try:
            return cls(**{k: raw[k] for k in cls.__dataclass_fields__})
        except KeyError as exc:
            raise ValueError(f"{path}: manifest missing field {exc}") from None


def _write_manifest(
    path: Path, command: str, argv: list[str], config: dict,
    seed: int | None, outputs: list[str], started: float,
) -> None:
    manifest = RunManifest(
        tool_version=__version__,
        command=command,
        argv=argv,
        config=config,
        seed=seed,
        outputs=outputs,
        duration_s=time.time() - started,
    )
    _write_json(path, asdict(manifest))


def cmd_synth(args: argparse.Namespace) -> int:
    started = time.time()
    config = synth.SynthConfig(
        n_sequences=args.n,
        t_h=args.t_h,
        t_f=args.t_f,
        fps=args.fps,
        family=args.family,
        amplitude=args.amplitude,
        freq_range=(args.freq_min, args.freq_max),
        noise_std=args.noise,
        seed=args.seed,
    )
    dataset = synth.generate(config)
    out = Path(args.out)
    written = synth.write_dataset(out, dataset)
    argv = [
        "synth", "--n", str(args.n), "--t-h", str(args.t_h), "--t-f", str(args.t_f),
        "--fps", repr(args.fps), "--family", args.family,
        "--amplitude", repr(args.amplitude), "--freq-min", repr(args.freq_min),
        "--freq-max", repr(args.freq_max), "--noise", repr(args.noise),
        "--seed", str(args.seed), "--out", str(out),
    ]
    snapshot = {
        "n_sequences": args.n, "t_h": args.t_h, "t_f": args.t_f, "fps": args.fps,
        "family": args.family, "amplitude": args.amplitude,
        "freq_range": [args.freq_min, args.freq_max], "noise_std": args.noise,
        "seed": args.seed,
    }
    _write_manifest(
        out / "run_manifest.json", "synth", argv, snapshot, args.seed,
        [str(p.relative_to(out)) for p in written], started,
    )
    print(f"wrote {len(dataset)} sequences to {out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    started = time.time()
    dataset = synth.read_dataset(args.data)
    result = predict.train_mlp(
        dataset.sequences, hidden=args.hidden, lr=args.lr,
        epochs=args.epochs, batch=args.batch, seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    predict.save_predictor(out, result.predictor)
    loss_path = out.with_name(out.stem + "_loss.csv")
    lines = ["epoch,mse"] + [f"{i},{v!r}" for i, v in enumerate(result.epoch_losses)]
    synth._atomic_write_text(loss_path, "\n".join(lines) + "\n")
    argv = [
        "train", "--data", str(args.data), "--out", str(out),
        "--hidden", str(args.hidden), "--lr", repr(args.lr),
        "--epochs", str(args.epochs), "--batch", str(args.batch),
        "--seed", str(args.seed),
    ]
    snapshot = {
        "hidden": args.hidden, "lr": args.lr, "epochs": args.epochs,
        "batch": args.batch, "seed": args.seed, "data": str(args.data),
    }
    _write_manifest(
        out.with_name(out.stem + "_manifest.json"), "train", argv, snapshot,
        args.seed, [out.name, loss_path.name], started,
    )
    print(f"trained mlp predictor -> {out} (final mse {result.epoch_losses[-1]:.6g})")
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    started = time.time()
    workers = _env_workers()
    dataset = synth.read_dataset(args.data)
    predictor = predict.load_predictor(args.predictor)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    epsilons = list(args.epsilon) if args.epsilon else list(DEFAULT_EPSILONS)
    mode = _CONSTRAINT_BY_FLAG[args.constraints]
    t_h = dataset.sequences[0].history.n_frames
    frame_mask = attack.frame_mask_for(args.frames, t_h)

    clean_curves = [
        mpjpe_curve(predictor.forward(s.history), s.future) for s in dataset.sequences
    ]
    clean_mean = np.mean(clean_curves, axis=0)

    outputs: list[str] = []
    per_eps_agg = []
    for eps in epsilons:
        config = attack.AttackConfig(
            epsilon=eps, step_factor=args.step_factor, iterations=args.iterations,
            lam=args.lam, n_order=args.n_order, constraint_mode=mode,
            frame_mask=frame_mask, seed=args.seed,
        )
        results = attack.attack_batch(
            predictor, dataset.sequences, dataset.connectivity, config,
            batch_scale=args.batch_scale, absolute_bound=args.absolute_bound,
            max_workers=workers,
        )
        eps_dir = out / f"eps_{eps:g}"
        eps_dir.mkdir(exist_ok=True)
        adv_curves = []
        for i, res in enumerate(results):
            seq_path = eps_dir / f"seq_{i:05d}.json"
            _write_json(seq_path, attack.attack_result_to_dict(res))
            outputs.append(str(seq_path.relative_to(out)))
            adv_curves.append(
                mpjpe_curve(predictor.forward(res.adversarial), dataset.sequences[i].future)
            )
        mu, sigma = report.per_joint_stats([r.perturbation for r in results])
        phys = report.physical_change_metrics(
            [s.history for s in dataset.sequences],
            [r.adversarial for r in results],
            dataset.connectivity,
        )
        per_eps_agg.append({
            "epsilon": eps,
            "adv_mpjpe_per_frame": np.mean(adv_curves, axis=0).tolist(),
            "final_loss": {
                key: float(np.mean([r.final_loss[key] for r in results]))
                for key in ("total", "prediction", "temporal", "bone")
            },
            "physical_change": {
                "bone_length": phys[0], "velocity": phys[1], "acceleration": phys[2],
            },
            "per_joint_mu": mu.tolist(),
            "per_joint_sigma": sigma.tolist(),
            "mean_scale": float(np.mean([r.scale for r in results])),
        })

    aggregate = {
        "version": 1,
        "fps": dataset.sequences[0].fps,
        "t_h": t_h,
        "t_f": dataset.sequences[0].future.n_frames,
        "joints": dataset.sequences[0].n_joints,
        "joint_names": list(dataset.joint_names) if dataset.joint_names else None,
        "n_sequences": len(dataset),
        "predictor": {"kind": predictor.kind, "t_h": predictor.t_h,
                      "t_f": predictor.t_f, "j": predictor.j},
        "constraint_mode": mode,
        "frames": args.frames,
        "seed": args.seed,
        "batch_scale": bool(args.batch_scale),
        "absolute_bound": args.absolute_bound,
        "clean_mpjpe_per_frame": clean_mean.tolist(),
        "per_epsilon": per_eps_agg,
    }
    _write_json(out / "aggregate.json", aggregate)
    outputs.append("aggregate.json")

    argv = ["attack", "--data", str(args.data), "--predictor", str(args.predictor),
            "--out", str(out)]
    for eps in epsilons:
        argv += ["--epsilon", repr(eps)]
    argv += [
        "--constraints", args.constraints, "--frames", args.frames,
        "--iterations", str(args.iterations), "--step-factor", repr(args.step_factor),
        "--lam", repr(args.lam), "--n-order", str(args.n_order),
        "--seed", str(args.seed),
    ]
    if args.absolute_bound is not None:
        argv += ["--absolute-bound", repr(args.absolute_bound)]
    if args.batch_scale:
        argv.append("--batch-scale")
    snapshot = {
        "epsilons": epsilons, "constraint_mode": mode, "frames": args.frames,
        "iterations": args.iterations, "step_factor": args.step_factor,
        "lambda": args.lam, "n_order": args.n_order, "seed": args.seed,
        "absolute_bound": args.absolute_bound, "batch_scale": bool(args.batch_scale),
        "data": str(args.data), "predictor": str(args.predictor),
    }
    _write_manifest(out / "run_manifest.json", "attack", argv, snapshot,
                    args.seed, outputs, started)
    print(f"attacked {len(dataset)} sequences at {len(epsilons)} epsilon value(s) -> {out}")
    return EXIT_OK


def _load_aggregate(results_dir: Path) -> dict:
    path = results_dir / "aggregate.json"
    if not path.exists():
        raise FileNotFoundError(f"no results found in {results_dir}")
    return json.loads(path.read_text())


def _resolve_intervals(requested: list[float] | None, agg: dict) -> list[float]:
    fps, t_f = agg["fps"], agg["t_f"]
    if requested:
        for iv in requested:
            idx = interval_to_frame(iv, fps)
            if not 0 <= idx < t_f:
                raise ValueError(f"interval {iv} ms outside the {t_f}-frame horizon")
        return list(requested)
    fitting = [iv for iv in DEFAULT_INTERVALS_MS
               if 0 <= interval_to_frame(iv, fps) < t_f]
    if fitting:
        return fitting
    return [(i + 1) * 1000.0 / fps for i in range(t_f)]


def _errors_at(curve: list[float], intervals: list[float], fps: float) -> dict[float, float]:
    return {iv: curve[interval_to_frame(iv, fps)] for iv in intervals}


def _single_epsilon_entry(agg: dict, results_dir: Path) -> dict:
    entries = agg["per_epsilon"]
    if len(entries) != 1:
        raise ValueError(
            f"{results_dir} holds {len(entries)} epsilon values; "
            "this report needs single-epsilon runs"
        )
    return entries[0]


def cmd_report(args: argparse.Namespace) -> int:
    started = time.time()
    dirs = [Path(d) for d in args.results]
    aggs = [_load_aggregate(d) for d in dirs]
    fps = aggs[0]["fps"]
    intervals = _resolve_intervals(args.intervals, aggs[0])

    if args.kind == "robustness":
        if len(aggs) != 1:
            raise ValueError("robustness report takes exactly one results directory")
        agg = aggs[0]
        clean = _errors_at(agg["clean_mpjpe_per_frame"], intervals, fps)
        per_eps = {
            entry["epsilon"]: _errors_at(entry["adv_mpjpe_per_frame"], intervals, fps)
            for entry in agg["per_epsilon"]
        }
        table = report.robustness_table(clean, per_eps, growth=args.growth)
    elif args.kind == "frames":
        per_part = {}
        epsilons = set()
        clean = None
        for agg, d in zip(aggs, dirs):
            part = "whole" if agg["frames"] == "all" else agg["frames"]
            entry = _single_epsilon_entry(agg, d)
            epsilons.add(entry["epsilon"])
            per_part[part] = _errors_at(entry["adv_mpjpe_per_frame"], intervals, fps)
            if part == "whole":
                clean = _errors_at(agg["clean_mpjpe_per_frame"], intervals, fps)
        if len(epsilons) > 1:
            raise ValueError(f"frame runs used different epsilons: {sorted(epsilons)}")
        table = report.frame_vulnerability_table(per_part, clean)
    elif args.kind == "joints":
        if len(aggs) != 1:
            raise ValueError("joints report takes exactly one results directory")
        agg = aggs[0]
        stats = {
            f"eps={entry['epsilon']:g}": (
                np.asarray(entry["per_joint_mu"]), np.asarray(entry["per_joint_sigma"])
            )
            for entry in agg["per_epsilon"]
        }
        table = report.per_joint_stats_table(stats, agg.get("joint_names"))
    elif args.kind == "physical":
        per_mode = {}
        epsilons = set()
        clean = None
        for agg, d in zip(aggs, dirs):
            entry = _single_epsilon_entry(agg, d)
            epsilons.add(entry["epsilon"])
            phys = entry["physical_change"]
            per_mode[agg["constraint_mode"]] = (
                _errors_at(entry["adv_mpjpe_per_frame"], intervals, fps),
                (phys["bone_length"], phys["velocity"], phys["acceleration"]),
            )
            clean = _errors_at(agg["clean_mpjpe_per_frame"], intervals, fps)
        if len(epsilons) > 1:
            raise ValueError(f"ablation runs used different epsilons: {sorted(epsilons)}")
        table = report.physical_change_table(per_mode, clean)
    else:
        raise ValueError(f"unknown report kind {args.kind!r}")

    text = report.render_csv(table) if args.format == "csv" else report.render_markdown(table)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        synth._atomic_write_text(out, text)
        argv = ["report", "--kind", args.kind, "--format", args.format,
                "--growth", args.growth, "--out", str(out), "--results"]
        argv += [str(d) for d in dirs]
        if args.intervals:
            argv += ["--intervals"] + [repr(iv) for iv in args.intervals]
        snapshot = {"kind": args.kind, "format": args.format, "growth": args.growth,
                    "results": [str(d) for d in dirs], "intervals": intervals}
        _write_manifest(out.with_name(out.stem + "_manifest.json"), "report",
                        argv, snapshot, None, [out.name], started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _max_rel_err(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    denom = np.maximum(np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def run_gradient_checks(
    h: float = 1e-5, trials: int = 20, seed: int = 0, tolerance: float = 1e-4
) -> list[tuple[str, float, bool]]:
    """Compare every analytic gradient against central differences.

    Returns (name, max relative error, passed) per check. Loss functions are
    looked up on the attack module at call time so a patched gradient is
    picked up and reported under its own name.
    """
    from . import attack as attack_mod
    from . import predict as predict_mod

    t_h, t_f, j = 6, 4, 5
    conn = synth.default_connectivity()
    rng = np.random.default_rng(seed)

    def draw_pose_pair() -> tuple[np.ndarray, np.ndarray]:
        # Keep bone-length changes away from the |.| kink so the finite
        # difference stays on one side of it.
        while True:
            x = rng.normal(size=(t_h, j, 3))
            xp = x + 0.1 * rng.normal(size=(t_h, j, 3))
            gap = np.abs(
                np.linalg.norm(x[:, conn.index_arrays()[0]] - x[:, conn.index_arrays()[1]], axis=2)
                - np.linalg.norm(xp[:, conn.index_arrays()[0]] - xp[:, conn.index_arrays()[1]], axis=2)
            )
            if gap.min() > 1e-3:
                return x, xp

    def mlp_predictor() -> predict.MlpPredictor:
        d_in, d_out, hidden = t_h * j * 3, t_f * j * 3, 16
        params = predict.MlpParams(
            rng.uniform(-1, 1, (hidden, d_in)) / np.sqrt(d_in),
            rng.uniform(-1, 1, hidden) / np.sqrt(d_in),
            rng.uniform(-1, 1, (d_out, hidden)) / np.sqrt(hidden),
            rng.uniform(-1, 1, d_out) / np.sqrt(hidden),
        )
        return predict.MlpPredictor(t_h, t_f, j, params)

    errors: dict[str, float] = {}

    def record(name: str, err: float) -> None:
        errors[name] = max(errors.get(name, 0.0), err)

    for _ in range(trials):
        p = rng.normal(size=(t_f, j, 3))
        y = p + rng.normal(size=(t_f, j, 3))
        while np.linalg.norm(p - y, axis=2).min() < 1e-3:
            y = p + rng.normal(size=(t_f, j, 3))
        _, grad = attack_mod.prediction_loss(p, y)
        fd = predict_mod.central_difference_gradient(
            lambda arr: attack_mod.prediction_loss(arr, y)[0], p, h
        )
        record("prediction_loss", _max_rel_err(grad, fd))

        x, xp = draw_pose_pair()
        _, grad = attack_mod.temporal_loss(x, xp, 2)
        fd = predict_mod.central_difference_gradient(
            lambda arr: attack_mod.temporal_loss(x, arr, 2)[0], xp, h
        )
        record("temporal_loss", _max_rel_err(grad, fd))

        _, grad = attack_mod.bone_length_loss(x, xp, conn)
        fd = predict_mod.central_difference_gradient(
            lambda arr: attack_mod.bone_length_loss(x, arr, conn)[0], xp, h
        )
        record("bone_length_loss", _max_rel_err(grad, fd))

        seq = MotionSequence(x)
        upstream = rng.normal(size=(t_f, j, 3))
        for pred, name in (
            (predict.ZeroVelocityPredictor(t_h, t_f, j), "zero_velocity_vjp"),
            (predict.LinearExtrapolationPredictor(t_h, t_f, j), "linear_vjp"),
            (mlp_predictor(), "mlp_vjp"),
        ):
            grad = pred.vjp(seq, upstream)
            fd = predict_mod.central_difference_gradient(
                lambda arr: float((upstream * pred.forward(seq.with_frames(arr)).frames).sum()),
                x, h,
            )
            record(name, _max_rel_err(grad, fd))

        pred = mlp_predictor()
        x_seq = MotionSequence(x)
        xp_seq = MotionSequence(xp)
        y_seq = MotionSequence(rng.normal(size=(t_f, j, 3)))
        config = attack.AttackConfig(constraint_mode="both", lam=0.5, n_order=2)
        _, grad, _ = attack_mod.total_loss(pred, x_seq, xp_seq, y_seq, conn, config)
        fd = predict_mod.central_difference_gradient(
            lambda arr: attack_mod.total_loss(
                pred, x_seq, x_seq.with_frames(arr), y_seq, conn, config
            )[0],
            xp, h,
        )
        record("total_loss_mlp", _max_rel_err(grad, fd))

    return [(name, err, err < tolerance) for name, err in errors.items()]


def cmd_gradcheck(args: argparse.Namespace) -> int:
    started = time.time()
    checks = run_gradient_checks(
        h=args.h, trials=args.trials, seed=args.seed, tolerance=args.tolerance
    )
    lines = []
    for name, err, ok in checks:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}  max_rel_err={err:.3e}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        synth._atomic_write_text(out, text)
        argv = ["gradcheck", "--h", repr(args.h), "--trials", str(args.trials),
                "--seed", str(args.seed), "--tolerance", repr(args.tolerance),
                "--out", str(out)]
        snapshot = {"h": args.h, "trials": args.trials, "seed": args.seed,
                    "tolerance": args.tolerance}
        _write_manifest(out.with_name(out.stem + "_manifest.json"), "gradcheck",
                        argv, snapshot, args.seed, [out.name], started)
    if all(ok for _, _, ok in checks):
        return EXIT_OK
    failing = [name for name, _, ok in checks if not ok]
    print(f"gradient check failed for: {', '.join(failing)}", file=sys.stderr)
    return EXIT_CHECK_FAILED


def cmd_replay(args: argparse.Namespace) -> int:
    path = Path(args.manifest)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    manifest = RunManifest.load(path)
    argv = list(manifest.argv)
    if args.out is not None:
        if "--out" not in argv:
            raise ValueError("manifest command has no --out to override")
        argv[argv.index("--out") + 1] = str(args.out)
    return main(argv)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moperturb",
        description="Physics-constrained adversarial attacks on motion predictors.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", help="generate a synthetic motion dataset")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--t-h", type=int, default=10, dest="t_h")
    p.add_argument("--t-f", type=int, default=25, dest="t_f")
    p.add_argument("--fps", type=float, default=25.0)
    p.add_argument("--family", choices=("oscillation", "drift", "mixture"),
                   default="oscillation")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--freq-min", type=float, default=0.5)
    p.add_argument("--freq-max", type=float, default=2.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the MLP predictor on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="run the constrained attack over a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--predictor", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float, action="append",
                   help="repeatable; default grid 0.01..0.05")
    p.add_argument("--constraints", choices=tuple(_CONSTRAINT_BY_FLAG), default="both")
    p.add_argument("--frames", choices=("all", "front", "middle", "rear", "last"),
                   default="all")
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--step-factor", type=float, default=0.1, dest="step_factor")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--n-order", type=int, default=2, dest="n_order")
    p.add_argument("--absolute-bound", type=float, default=None, dest="absolute_bound",
                   help="fixed perturbation bound, disabling the scale function")
    p.add_argument("--batch-scale", action="store_true", dest="batch_scale",
                   help="one shared scale for the whole batch")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("report", help="render tables from attack results")
    p.add_argument("--results", nargs="+", required=True)
    p.add_argument("--kind", choices=("robustness", "frames", "joints", "physical"),
                   default="robustness")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--growth", choices=("extremes", "all"), default="extremes")
    p.add_argument("--intervals", type=float, nargs="+", default=None,
                   help="time intervals in ms; default 80..1000 where they fit")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gradcheck", help="check analytic gradients against finite differences")
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="override the recorded --out path")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except attack.NumericFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def script() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    script()

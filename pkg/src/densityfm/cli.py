"""Command-line front end.

Exit codes: 0 success, 2 input or flag error, 3 estimation failure.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from . import io
from .errors import EstimationError, InputError
from .evaluation import (
    METHODS,
    BenchmarkSettings,
    EvaluationConfig,
    benchmark,
    run_method,
    zhang_error,
)
from .pipeline import PipelineConfig, decision_figure
from .robust import RansacConfig
from .synthetic import SyntheticSceneConfig, generate_scene

EXIT_OK, EXIT_INPUT, EXIT_ESTIMATION = 0, 2, 3


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _method_list(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown method(s) {', '.join(unknown)}")
    return methods


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_estimator_flags(p):
    p.add_argument("--th", type=float, default=1.0, help="inlier threshold in pixels")
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--alpha", type=float, default=0.011, help="density-peaks threshold coefficient")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--dc-fraction", type=float, default=0.02)
    p.add_argument("--lmeds-trials", type=int, default=500)
    p.add_argument("--no-normalize", action="store_true", help="skip coordinate normalization")


def _add_scene_flags(p, n_default=200):
    p.add_argument("--n", type=int, default=n_default, help="number of correspondences")
    p.add_argument("--sigma", type=float, default=0.0, help="pixel noise standard deviation")
    p.add_argument("--outliers", type=float, default=0.0, help="planted outlier fraction")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)


def _scene_config(args, seed):
    return SyntheticSceneConfig(
        num_points=args.n,
        noise_sigma=args.sigma,
        outlier_fraction=args.outliers,
        image_size=(args.width, args.height),
        seed=seed,
    )


def _settings(args, **extra):
    return BenchmarkSettings(
        seed=args.seed,
        confidence=args.confidence,
        max_iterations=args.max_iter,
        lmeds_trials=args.lmeds_trials,
        dc_fraction=args.dc_fraction,
        normalize=not args.no_normalize,
        alpha=args.alpha,
        **extra,
    )


def cmd_estimate(args):
    pairs = io.read_matches(args.matches)
    if len(pairs) < 8:
        raise InputError(f"{args.matches}: need at least 8 matches, found {len(pairs)}")
    settings = _settings(args)
    RansacConfig(args.th, args.confidence, args.max_iter, args.seed)  # validates flags
    result = run_method(args.method, pairs, args.th, args.alpha, settings)
    _emit(io.format_fmatrix(result.f_matrix), args.out)
    report = [
        f"method: {args.method}",
        f"matches: {len(pairs)}",
        f"inliers: {result.num_inliers}",
        f"iterations: {result.iterations_used}",
        f"mean error (px): {result.mean_inlier_error:.6f}",
        f"time (ms): {result.elapsed * 1e3:.3f}",
    ]
    report += [f"  {stage} (ms): {t * 1e3:.3f}" for stage, t in result.timings.items()]
    print("\n".join(report), file=sys.stderr)
    return EXIT_OK


def cmd_synth(args):
    scene = generate_scene(_scene_config(args, args.seed))
    truth_path = args.truth or f"{args.out}.truth"
    io.write_matches(args.out, scene.pairs)
    Path(truth_path).write_text(io.format_ground_truth(scene.f0, scene.truth_mask))
    print(f"wrote {len(scene.pairs)} matches to {args.out} and ground truth to {truth_path}",
          file=sys.stderr)
    return EXIT_OK


def cmd_decision_figure(args):
    pairs = io.read_matches(args.matches)
    config = PipelineConfig(alpha=args.alpha, dc_fraction=args.dc_fraction)
    figure = decision_figure(pairs, config)
    _emit(io.format_decision_figure(figure), args.out)
    if args.svg:
        Path(args.svg).write_text(io.decision_figure_svg(figure))
    return EXIT_OK


def cmd_benchmark(args):
    if not args.methods:
        raise InputError("no methods given")
    ths = args.sweep_th or (args.th,)
    settings = _settings(
        args,
        ths=ths,
        alphas=args.sweep_alpha,
        evaluation=EvaluationConfig(args.trials, (args.width, args.height), args.eval_seed),
    )
    settings.threshold_grid()  # validates --sweep-alpha length
    rows = []
    if args.matches:
        pairs = io.read_matches(args.matches)
        f0 = io.read_ground_truth(args.truth)[0] if args.truth else None
        rows += benchmark(pairs, args.methods, f0, settings, dataset=str(args.matches))
    else:
        for seed in args.seeds or (args.seed,):
            scene = generate_scene(_scene_config(args, seed))
            seeded = dataclasses.replace(settings, seed=seed)
            rows += benchmark(scene.pairs, args.methods, scene.f0, seeded, dataset=f"synth:{seed}")
    _emit(io.format_benchmark(rows), args.out)
    if rows and all(r.status != "ok" for r in rows):
        return EXIT_ESTIMATION
    return EXIT_OK


def cmd_evaluate(args):
    f0 = io.read_fmatrix(args.f0)
    f1 = io.read_fmatrix(args.f1)
    report = zhang_error(f0, f1, EvaluationConfig(args.trials, (args.width, args.height), args.seed))
    print(io.fmt(report.d1))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="densityfm",
        description="Fundamental-matrix estimation with a density-peaks prefilter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate F from a match file")
    p.add_argument("matches")
    p.add_argument("--method", choices=METHODS, default="proposed")
    p.add_argument("--out", help="write F here instead of stdout")
    _add_estimator_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synth", help="generate a synthetic match file and ground truth")
    _add_scene_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="match file to write")
    p.add_argument("--truth", help="ground-truth sidecar (default: <out>.truth)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decision-figure", help="export per-point rho/delta/gamma records")
    p.add_argument("matches")
    p.add_argument("--alpha", type=float, default=0.011)
    p.add_argument("--dc-fraction", type=float, default=0.02)
    p.add_argument("--out")
    p.add_argument("--svg", help="also write a static scatter plot")
    p.set_defaults(func=cmd_decision_figure)

    p = sub.add_parser("benchmark", help="compare estimators, optionally against ground truth")
    p.add_argument("--matches", help="benchmark a match file instead of synthetic scenes")
    p.add_argument("--truth", help="ground-truth sidecar for --matches")
    p.add_argument("--methods", type=_method_list, default=(), help="comma-separated method names")
    p.add_argument("--sweep-th", type=_float_list, help="thresholds for ransac/proposed")
    p.add_argument("--sweep-alpha", type=_float_list, help="alpha per --sweep-th entry")
    p.add_argument("--seeds", type=_int_list, help="synthetic scene seeds (default: --seed)")
    p.add_argument("--trials", type=int, default=500, help="ground-truth comparison draws")
    p.add_argument("--eval-seed", type=int, default=0)
    p.add_argument("--out")
    _add_estimator_flags(p)
    _add_scene_flags(p, n_default=400)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("evaluate", help="ground-truth distance between two F files")
    p.add_argument("f0")
    p.add_argument("f1")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=float, default=640.0)
    p.add_argument("--height", type=float, default=480.0)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"estimation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front-end.

Exit codes: 0 success, 1 usage error (synopsis on stderr), 2 data or
solver error (diagnostic on stderr). All randomness is controlled by
``--seed``, so any sweep invocation rerun with identical flags rewrites
an identical CSV (``bench-time`` excepted: it measures wall-clock time).
"""

from __future__ import annotations

import argparse
import json
import sys

from .exceptions import AepnpError
from .fileio import load_correspondence_file, save_correspondence_file, write_sweep_csv
from .geometry import ScaledPose, rotation_to_quaternion
from .linear import aepnp_solve, epnp_solve
from .metrics import rotation_error, scale_error, translation_error
from .ransac import RansacConfig, ransac_aepnp
from .refine import refine
from .simulate import (
    DEFAULT_TRIALS,
    SceneConfig,
    generate_scene,
    run_count_sweep,
    run_noise_sweep,
    run_outlier_sweep,
    run_sparse_keypoint_protocol,
    run_timing,
)


class _UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(self, message)


def _float_list(text: str) -> list[float]:
    try:
        values = [float(token) for token in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(token) for token in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aepnp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sim = sub.add_parser("simulate", help="write a synthetic correspondence file with truth")
    sim.add_argument("--n", type=int, default=1024, help="number of correspondences")
    sim.add_argument("--sigma", type=float, default=0.0, help="pixel noise std dev")
    sim.add_argument("--outlier-ratio", type=float, default=0.0)
    sim.add_argument("--scale-min", type=float, default=0.5)
    sim.add_argument("--scale-max", type=float, default=2.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output correspondence file")
    sim.set_defaults(handler=_cmd_simulate)

    solve = sub.add_parser("solve", help="estimate a pose from a correspondence file")
    solve.add_argument("file", help="correspondence file")
    solve.add_argument(
        "--method", choices=("epnp", "aepnp", "ransac-aepnp"), default="aepnp"
    )
    solve.add_argument(
        "--refine",
        action="store_true",
        help="nonlinearly refine the full scaled pose (for ransac-aepnp, on its inliers)",
    )
    solve.add_argument(
        "--threshold-px", type=float, default=2.0, help="RANSAC inlier threshold"
    )
    solve.add_argument("--seed", type=int, default=0, help="RANSAC sampling seed")
    solve.set_defaults(handler=_cmd_solve)

    noise = sub.add_parser("sweep-noise", help="error statistics versus pixel noise")
    noise.add_argument("--sigmas", type=_float_list, default=[0.5, 1.0, 2.0, 4.0])
    _add_sweep_common(noise)
    noise.set_defaults(handler=_cmd_sweep_noise)

    count = sub.add_parser("sweep-count", help="error statistics versus correspondence count")
    count.add_argument("--counts", type=_int_list, default=[16, 64, 256, 1024])
    count.add_argument("--sigma", type=float, default=2.0, help="pixel noise std dev")
    _add_sweep_common(count)
    count.set_defaults(handler=_cmd_sweep_count)

    outliers = sub.add_parser("sweep-outliers", help="RANSAC statistics versus outlier ratio")
    outliers.add_argument("--ratios", type=_float_list, default=[0.0, 0.1, 0.2, 0.3])
    outliers.add_argument("--sigma", type=float, default=1.0)
    outliers.add_argument("--n", type=int, default=1000)
    outliers.add_argument("--threshold-px", type=float, default=2.0)
    outliers.add_argument(
        "--refine", action="store_true", help="also record refined rows per ratio"
    )
    _add_sweep_common(outliers)
    outliers.set_defaults(handler=_cmd_sweep_outliers)

    timing = sub.add_parser("bench-time", help="mean solve time versus correspondence count")
    timing.add_argument("--counts", type=_int_list, default=[64, 256, 1024])
    _add_sweep_common(timing)
    timing.set_defaults(handler=_cmd_bench_time)

    sparse = sub.add_parser("sparse-test", help="few-keypoint protocol at one count")
    sparse.add_argument("--keypoints", type=int, default=7)
    sparse.add_argument("--sigma", type=float, default=1.0)
    _add_sweep_common(sparse)
    sparse.set_defaults(handler=_cmd_sparse_test)

    return parser


def _add_sweep_common(sub_parser: argparse.ArgumentParser) -> None:
    sub_parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    sub_parser.add_argument("--seed", type=int, default=0)
    sub_parser.add_argument("--out", required=True, help="output CSV path")


def _cmd_simulate(args) -> int:
    cfg = SceneConfig(
        n_points=args.n,
        noise_sigma_px=args.sigma,
        outlier_ratio=args.outlier_ratio,
        scale_range=(args.scale_min, args.scale_max),
        seed=args.seed,
    )
    scene = generate_scene(cfg)
    save_correspondence_file(args.out, scene.corrs, cfg.intrinsics, truth=scene.truth)
    print(f"wrote {args.out}: {cfg.n_points} correspondences")
    return 0


def _cmd_solve(args) -> int:
    corrs, intrinsics, truth = load_correspondence_file(args.file)
    out: dict = {"method": args.method}

    if args.method == "epnp":
        rotation, translation, diagnostics = epnp_solve(corrs, intrinsics)
        pose = ScaledPose(rotation=rotation, translation=translation, s1=1.0, s2=1.0)
        out["diagnostics"] = _diagnostics_dict(diagnostics)
    elif args.method == "aepnp":
        pose, diagnostics = aepnp_solve(corrs, intrinsics)
        out["diagnostics"] = _diagnostics_dict(diagnostics)
    else:
        cfg = RansacConfig(inlier_threshold_px=args.threshold_px, seed=args.seed)
        result = ransac_aepnp(corrs, intrinsics, cfg)
        pose = result.pose
        out["ransac"] = {
            "iterations_run": result.iterations_run,
            "inlier_count": result.best_inlier_count,
            "n_points": len(corrs),
        }

    if args.refine:
        fit_corrs = corrs[result.inlier_mask] if args.method == "ransac-aepnp" else corrs
        pose, report = refine(pose, fit_corrs, intrinsics)
        out["refinement"] = {
            "initial_cost": report.initial_cost,
            "final_cost": report.final_cost,
            "iterations": report.iterations,
            "converged": report.converged,
        }

    out["rotation"] = [float(v) for v in pose.rotation.ravel()]
    out["quaternion"] = [float(v) for v in rotation_to_quaternion(pose.rotation)]
    out["translation"] = [float(v) for v in pose.translation]
    out["s1"] = float(pose.s1)
    out["s2"] = float(pose.s2)

    if truth is not None:
        out["errors"] = {
            "rotation_err_deg": rotation_error(pose.rotation, truth.rotation),
            "translation_err": translation_error(pose.translation, truth.translation),
            "s1_err_frac": scale_error(pose.s1, truth.s1),
            "s2_err_frac": scale_error(pose.s2, truth.s2),
        }

    print(json.dumps(out, indent=2))
    return 0


def _diagnostics_dict(diagnostics) -> dict:
    return {
        "smallest_singular_values": [float(v) for v in diagnostics.smallest_singular_values],
        "condition_gap": float(diagnostics.condition_gap),
        "cheirality_flips": int(diagnostics.cheirality_flips),
    }


def _cmd_sweep_noise(args) -> int:
    records = run_noise_sweep(args.sigmas, trials=args.trials, base_cfg=SceneConfig(seed=args.seed))
    write_sweep_csv(args.out, records)
    print(f"wrote {args.out}: {len(records)} records")
    return 0


def _cmd_sweep_count(args) -> int:
    records = run_count_sweep(
        args.counts,
        noise_sigma=args.sigma,
        trials=args.trials,
        base_cfg=SceneConfig(seed=args.seed),
    )
    write_sweep_csv(args.out, records)
    print(f"wrote {args.out}: {len(records)} records")
    return 0


def _cmd_sweep_outliers(args) -> int:
    records = run_outlier_sweep(
        args.ratios,
        trials=args.trials,
        base_cfg=SceneConfig(n_points=args.n, noise_sigma_px=args.sigma, seed=args.seed),
        ransac_cfg=RansacConfig(inlier_threshold_px=args.threshold_px),
        with_refinement=args.refine,
    )
    write_sweep_csv(args.out, records)
    print(f"wrote {args.out}: {len(records)} records")
    return 0


def _cmd_bench_time(args) -> int:
    records = run_timing(args.counts, trials=args.trials, base_cfg=SceneConfig(seed=args.seed))
    write_sweep_csv(args.out, records)
    print(f"wrote {args.out}: {len(records)} records")
    return 0


def _cmd_sparse_test(args) -> int:
    records = run_sparse_keypoint_protocol(
        args.keypoints, noise_sigma=args.sigma, trials=args.trials, seed=args.seed
    )
    write_sweep_csv(args.out, records)
    print(f"wrote {args.out}: {len(records)} records")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        err.parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except (AepnpError, OSError, ValueError) as err:
        # ValueError covers config validation (scale ranges, thresholds, ...)
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

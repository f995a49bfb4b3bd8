"""Command-line workflow: dataset construction, training, generation,
evaluation, and the inference service.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Every command writes a
``config_echo.json`` beside its outputs so a run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datasets as ds
from . import metrics as mt
from . import networks as nn
from . import service as sv
from . import training as tr


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's default 2
        raise UsageError(message)


def _echo_config(out_dir: Path, command: str, args: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, "arguments": args}
    (out_dir / "config_echo.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_dataset(args) -> int:
    out = Path(args.out)
    if args.kind == "superformula":
        data = ds.generate_superformula_dataset(
            args.count, s1_range=(args.s1_min, args.s1_max),
            s2_range=(args.s2_min, args.s2_max), m_lobes=args.m, seed=args.seed,
        )
    elif args.kind == "waterline":
        data = ds.generate_waterline_dataset(args.count, seed=args.seed)
    else:  # load
        files = sorted(Path(args.dir).glob(f"*.{args.format}")) if args.dir else []
        files += [Path(f) for f in args.files or []]
        if not files:
            raise UsageError("no input files; pass --dir or --files")
        data = ds.load_point_sequences(
            files, fmt=args.format, curvature_weight=args.curvature_weight,
            normalize=not args.no_normalize, name=args.name,
        )
    ds.save_dataset(data, out)
    _echo_config(out, "dataset", vars(args))
    print(f"wrote {len(data)} curves of {ds.CURVE_POINTS} points "
          f"({data.provenance}) to {out}")
    return 0


def _build_models(args, latent_dim):
    gcfg = nn.GeneratorConfig(
        latent_dim=latent_dim, noise_dim=args.noise_dim, degree=args.degree,
        kumaraswamy_terms=args.kumaraswamy_terms, symmetry_mode=args.symmetry,
        symmetry_parts=args.symmetry_parts, constraint=args.constraint,
        pinned_point=(args.pinned_x, args.pinned_y), hidden=args.gen_hidden,
        family=args.family,
    )
    dcfg = nn.DiscriminatorConfig(
        latent_dim=latent_dim, conv_depths=tuple(args.disc_depths), hidden=args.disc_hidden,
    )
    return nn.build_generator(gcfg, seed=args.seed), nn.build_discriminator(dcfg, seed=args.seed + 1)


def cmd_train(args) -> int:
    out = Path(args.out)
    data = ds.load_dataset(args.dataset)
    gen, disc = _build_models(args, args.latent_dim)
    cfg = tr.TrainConfig(
        steps=args.steps, batch=args.batch, lr_d=args.lr_d, lr_g=args.lr_g,
        lambda0=args.lambda0, lambda1=args.lambda1, lambda2=args.lambda2,
        lambda3=args.lambda3, lambda4=args.lambda4, seed=args.seed,
        eval_every=args.eval_every,
    )
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, "train", vars(args))
    result = tr.train(data, gen, disc, cfg, checkpoint_dir=out,
                      checkpoint_every=args.checkpoint_every)
    final = out / "checkpoint_final.npz"
    tr.save_checkpoint(final, result.generator, result.discriminator, cfg,
                       step=result.state.step, trainer_state=result.state)
    tr.export_history(result.history, out / "history.csv", timing=args.timing)
    secs = result.history.total_seconds()
    print(f"trained {cfg.steps} steps in {secs:.1f}s; checkpoint: {final}")
    return 0


def _latent_grid(k: int, dim: int) -> np.ndarray:
    axes = [np.linspace(0.0, 1.0, k) if k > 1 else np.array([0.5])] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def curve_sheet_svg(curves, per_row: int = 8, cell: float = 100.0, margin: float = 0.1) -> str:
    """One SVG sheet with each curve drawn in its own cell, auto-fit."""
    curves = [np.asarray(c) for c in curves]
    rows = -(-len(curves) // per_row)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{per_row * cell:.0f}" height="{rows * cell:.0f}" '
        f'viewBox="0 0 {per_row * cell:.0f} {rows * cell:.0f}">'
    ]
    for i, curve in enumerate(curves):
        r, col = divmod(i, per_row)
        lo = curve.min(axis=0)
        hi = curve.max(axis=0)
        span = max(float((hi - lo).max()), 1e-9)
        pad = margin * span
        scale = cell / (span + 2 * pad)
        ox, oy = col * cell, r * cell
        pts = []
        for x, y in curve:
            px = ox + (x - lo[0] + pad) * scale
            py = oy + cell - (y - lo[1] + pad) * scale  # flip y for screen coords
            pts.append(f"{px:.2f},{py:.2f}")
        parts.append(
            f'<polyline fill="none" stroke="black" stroke-width="1" points="{" ".join(pts)}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_generate(args) -> int:
    ck = tr.load_checkpoint(args.checkpoint)
    gen = ck.generator
    dim = gen.config.latent_dim
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.latent is not None:
        values = [float(v) for v in args.latent.split(",") if v.strip()]
        if len(values) != dim:
            raise UsageError(f"latent code must have {dim} dimensions, got {len(values)}")
        latents = np.asarray([values])
    else:
        latents = _latent_grid(args.grid, dim)

    clipped = np.clip(latents, 0.0, 1.0)
    if np.any(clipped != latents):
        print("warning: latent values clamped to [0, 1]", file=sys.stderr)
    z = sv.noise_from_seed(args.noise_seed, gen.config.noise_dim)

    curves = []
    for i, latent in enumerate(clipped):
        result = nn.generator_forward(gen, latent, z)
        curves.append(result.curve)
        (out / f"curve_{i:04d}.dat").write_text(
            sv.format_curve_dat(result.curve), encoding="utf-8"
        )
    (out / "sheet.svg").write_text(curve_sheet_svg(curves), encoding="utf-8")
    _echo_config(out, "generate", vars(args))
    print(f"wrote {len(curves)} curves and sheet.svg to {out}")
    return 0


def cmd_evaluate(args) -> int:
    ck = tr.load_checkpoint(args.checkpoint)
    data = ds.load_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = mt.EvalConfig(
        runs=args.runs, samples_per_run=args.samples, seed=args.seed,
        lsc_lines=args.lsc_lines, lsc_points_per_line=args.lsc_points,
        test_samples=args.test_samples,
    )
    report = mt.evaluate(ck.generator, data, cfg)
    minutes = args.train_minutes
    mt.export_report(report, out / "report.txt", out / "report.csv",
                     example=data.name, model=ck.generator.config.family,
                     train_minutes=minutes)
    _echo_config(out, "evaluate", vars(args))
    print(f"MLL {report.mll:.2f} ± {report.mll_std:.2f}  "
          f"RVOD {report.rvod:.3f}  LSC-proxy {report.lsc:.3f}")
    return 0


def cmd_serve(args) -> int:
    sv.serve(args.checkpoint, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Argument wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="curvegan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_data = sub.add_parser("dataset", help="build a curve dataset directory")
    data_sub = p_data.add_subparsers(dest="kind", required=True)
    for kind in ("superformula", "waterline", "load"):
        sp = data_sub.add_parser(kind)
        sp.add_argument("--out", required=True)
        sp.add_argument("--seed", type=int, default=0)
        if kind == "superformula":
            sp.add_argument("--count", type=int, default=1000)
            sp.add_argument("--m", type=int, default=3)
            sp.add_argument("--s1-min", type=float, default=1.0)
            sp.add_argument("--s1-max", type=float, default=10.0)
            sp.add_argument("--s2-min", type=float, default=1.0)
            sp.add_argument("--s2-max", type=float, default=10.0)
        elif kind == "waterline":
            sp.add_argument("--count", type=int, default=1000)
        else:
            sp.add_argument("--format", choices=("dat", "csv"), default="dat")
            sp.add_argument("--dir")
            sp.add_argument("--files", nargs="*")
            sp.add_argument("--curvature-weight", type=float, default=0.0)
            sp.add_argument("--no-normalize", action="store_true")
            sp.add_argument("--name", default="loaded")
        sp.set_defaults(func=cmd_dataset)

    p_train = sub.add_parser("train", help="train a model on a dataset directory")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--steps", type=int, default=2000)
    p_train.add_argument("--batch", type=int, default=32)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--latent-dim", type=int, default=2)
    p_train.add_argument("--noise-dim", type=int, default=10)
    p_train.add_argument("--degree", type=int, default=15)
    p_train.add_argument("--kumaraswamy-terms", type=int, default=4)
    p_train.add_argument("--symmetry", default="none",
                         choices=("none", "axis-x", "axis-y", "rotational"))
    p_train.add_argument("--symmetry-parts", type=int, default=1)
    p_train.add_argument("--constraint", default="open",
                         choices=("open", "closed", "pinned-last"))
    p_train.add_argument("--pinned-x", type=float, default=1.0)
    p_train.add_argument("--pinned-y", type=float, default=0.0)
    p_train.add_argument("--family", default="bezier", choices=("bezier", "direct"))
    p_train.add_argument("--gen-hidden", type=int, default=128)
    p_train.add_argument("--disc-hidden", type=int, default=128)
    p_train.add_argument("--disc-depths", type=int, nargs="+", default=[16, 32])
    p_train.add_argument("--lr-d", type=float, default=0.00005)
    p_train.add_argument("--lr-g", type=float, default=0.0002)
    for i, default in enumerate((1.0, 0.2, 0.2, 1.0, 0.1)):
        p_train.add_argument(f"--lambda{i}", type=float, default=default)
    p_train.add_argument("--eval-every", type=int, default=100)
    p_train.add_argument("--checkpoint-every", type=int, default=None)
    p_train.add_argument("--timing", action="store_true",
                         help="write wall-clock seconds into history.csv "
                              "(breaks bit-reproducibility of the file)")
    p_train.set_defaults(func=cmd_train)

    p_gen = sub.add_parser("generate", help="sample curves from a checkpoint")
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("--out", required=True)
    group = p_gen.add_mutually_exclusive_group(required=True)
    group.add_argument("--latent", help="comma-separated latent code")
    group.add_argument("--grid", type=int, help="k points per latent dimension")
    p_gen.add_argument("--noise-seed", type=int, default=0)
    p_gen.set_defaults(func=cmd_generate)

    p_eval = sub.add_parser("evaluate", help="metric report for a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--runs", type=int, default=10)
    p_eval.add_argument("--samples", type=int, default=1000)
    p_eval.add_argument("--test-samples", type=int, default=500)
    p_eval.add_argument("--lsc-lines", type=int, default=20)
    p_eval.add_argument("--lsc-points", type=int, default=10)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--train-minutes", type=float, default=0.0)
    p_eval.set_defaults(func=cmd_evaluate)

    p_serve = sub.add_parser("serve", help="HTTP inference service")
    p_serve.add_argument("--checkpoint", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8321)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ds.DatasetError, tr.TrainingError, tr.CheckpointError, mt.MetricError,
            nn.ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``ednig {illum,train,enhance,eval,bench}``.

Exit codes: 0 success, 1 partial failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .errors import EdnigError, NumericError
from .illum import IlluminationParams, bright_channel, four_channel_input, illumination_map
from .imgio import ImageTensor, list_images, load_lol_dataset, read_image, to_unit, write_png
from .losses import VGG_ENV, LossWeights, VGG16Features
from .net import GeneratorConfig

log = logging.getLogger("ednig")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
LOL_ROOT_ENV = "EDNIG_LOL_ROOT"


class UsageError(Exception):
    pass


def _rgb(img: ImageTensor) -> ImageTensor:
    if img.channels == 1:
        return ImageTensor(np.repeat(img.data, 3, axis=2), img.range_tag)
    return img


def _defaults(cls) -> str:
    return ", ".join(f"{f.name}={f.default!r}" for f in fields(cls))


def _illum_args(p: argparse.ArgumentParser):
    d = IlluminationParams()
    p.add_argument("--patch", type=int, default=None, help=f"bright-channel window (default {d.patch_size})")
    p.add_argument("--radius", type=int, default=None, help=f"guided-filter radius (default {d.gf_radius})")
    p.add_argument("--eps", type=float, default=None, help=f"guided-filter epsilon (default {d.gf_epsilon})")


def _illum_params(args, base: dict | None = None) -> IlluminationParams:
    vals = dict(base or {})
    for flag, key in (("patch", "patch_size"), ("radius", "gf_radius"), ("eps", "gf_epsilon")):
        if getattr(args, flag, None) is not None:
            vals[key] = getattr(args, flag)
    return IlluminationParams(**vals)


# -- illum ---------------------------------------------------------------------------

def cmd_illum(args) -> int:
    try:
        img = _rgb(read_image(args.input))
    except (OSError, EdnigError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    params = _illum_params(args)
    unit = to_unit(img)
    m = (bright_channel(unit, params.patch_size) if args.coarse else illumination_map(unit, params)).data
    write_png(args.output, np.rint(m * 255.0).astype(np.uint8))
    print(f"min={m.min():.6f} max={m.max():.6f} mean={m.mean():.6f}")
    return EXIT_OK


# -- train ---------------------------------------------------------------------------

TRAIN_SECTIONS = {"illumination": IlluminationParams, "generator": GeneratorConfig, "loss_weights": LossWeights}
TRAIN_PATHS = ("data_root", "out_dir", "vgg_weights", "random_vgg_seed", "train_limit", "val_limit")


def load_run_config(path) -> dict:
    """Read a JSON run config and reject unknown keys (listing all of them)."""
    from .trainer import TrainingConfig

    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    allowed = {f.name for f in fields(TrainingConfig)} | set(TRAIN_SECTIONS) | set(TRAIN_PATHS)
    bad = sorted(k for k in raw if k not in allowed)
    for section, cls in TRAIN_SECTIONS.items():
        sub = raw.get(section, {})
        if not isinstance(sub, dict):
            bad.append(section)
            continue
        names = {f.name for f in fields(cls)}
        bad += [f"{section}.{k}" for k in sorted(sub) if k not in names]
    if bad:
        raise UsageError(f"{path}: unknown config keys: {', '.join(bad)}")
    return raw


def cmd_train(args) -> int:
    from .trainer import TrainingConfig, train

    raw = load_run_config(args.config) if args.config else {}
    overrides = {k: v for k, v in {
        "total_epochs": args.epochs, "seed": args.seed, "lr_initial": args.lr, "batch_size": args.batch_size,
        "n_critic": args.n_critic, "input_size": args.input_size, "checkpoint_every": args.checkpoint_every,
        "data_root": args.data_root, "out_dir": args.out, "vgg_weights": args.vgg_weights,
        "random_vgg_seed": args.random_vgg_seed, "train_limit": args.limit, "val_limit": args.val_limit,
    }.items() if v is not None}
    for k, v in overrides.items():
        if k in raw and raw[k] != v:
            log.info("override %s: %r -> %r", k, raw[k], v)
        elif k not in raw:
            log.info("override %s = %r", k, v)
    raw.update(overrides)

    tnames = {f.name for f in fields(TrainingConfig)}
    try:
        cfg = TrainingConfig(**{k: v for k, v in raw.items() if k in tnames})
        illum = IlluminationParams(**raw.get("illumination", {}))
        illum = _illum_params(args, asdict(illum))
        gen_cfg = GeneratorConfig(**raw.get("generator", {}))
        weights = LossWeights(**raw.get("loss_weights", {}))
    except (TypeError, EdnigError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc

    root = raw.get("data_root") or os.environ.get(LOL_ROOT_ENV)
    if not root:
        raise UsageError(f"no dataset: pass --data-root or set {LOL_ROOT_ENV} "
                         "(expects our485/{low,high} and eval15/{low,high})")
    try:
        train_set = load_lol_dataset(root, "train", raw.get("train_limit"))
        val_set = load_lol_dataset(root, "val", raw.get("val_limit"))
    except EdnigError as exc:
        raise UsageError(str(exc)) from exc

    extractor = None
    if weights.lambda_per > 0:
        if raw.get("random_vgg_seed") is not None:
            log.warning("perceptual loss uses randomly initialized VGG16 features (seed %d)", raw["random_vgg_seed"])
            extractor = VGG16Features.random(int(raw["random_vgg_seed"]))
        else:
            extractor = VGG16Features.load(raw.get("vgg_weights"))
    out = Path(raw.get("out_dir") or "runs/ednig")
    result = train(train_set, cfg, out, val_set=val_set, gen_cfg=gen_cfg, illum=illum, weights=weights,
                   extractor=extractor, resume=args.resume, extra_meta={"data_root": str(root)})
    print(f"checkpoint: {result.checkpoint}")
    return EXIT_OK


# -- enhance -------------------------------------------------------------------------

def _inputs(path) -> list[Path]:
    path = Path(path)
    if path.is_dir():
        return list_images(path)
    if path.is_file():
        return [path]
    raise UsageError(f"input not found: {path}")


def cmd_enhance(args) -> int:
    from .enhance import enhance_image
    from .trainer import load_generator

    gen = load_generator(args.weights)
    illum = _illum_params(args)
    out_dir = Path(args.output_dir)
    failed = []
    for path in _inputs(args.input_dir):
        try:
            out = enhance_image(gen, _rgb(read_image(path)), illum)
            write_png(out_dir / (path.stem + ".png"), out)
            print(f"{path.name}: ok")
        except Exception as exc:  # per-file failure; keep going
            log.error("%s: %s", path.name, exc)
            failed.append(path.name)
    if failed:
        print(f"{len(failed)} file(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# -- eval ----------------------------------------------------------------------------

def cmd_eval(args) -> int:
    from .metrics import ImageRecord, MetricReport, brisque, load_brisque_model, load_niqe_model, niqe, psnr, ssim

    preds = {p.stem: p for p in _inputs(args.pred_dir)}
    report = MetricReport()
    failed = []
    if args.no_ref:
        niqe_model, brisque_model = load_niqe_model(args.model_dir), load_brisque_model(args.model_dir)
        for stem in sorted(preds):
            try:
                img = _rgb(read_image(preds[stem]))
                report.records.append(ImageRecord(stem, niqe=niqe(img, niqe_model), brisque=brisque(img, brisque_model)))
            except Exception as exc:
                log.error("%s: %s", stem, exc)
                failed.append(stem)
        provenance = f"no-reference; pred_dir={Path(args.pred_dir).resolve()}; models={args.model_dir or 'default'}"
    else:
        if not args.gt_dir:
            raise UsageError("full-reference eval needs GT_DIR (or pass --no-ref)")
        gts = {p.stem: p for p in _inputs(args.gt_dir)}
        for stem in sorted(set(preds) ^ set(gts)):
            side = "prediction" if stem in preds else "ground truth"
            print(f"unmatched {side}: {stem} (skipped)", file=sys.stderr)
            failed.append(stem)
        for stem in sorted(set(preds) & set(gts)):
            try:
                a, b = _rgb(read_image(preds[stem])), _rgb(read_image(gts[stem]))
                report.records.append(ImageRecord(stem, psnr_db=psnr(a, b), ssim=ssim(a, b)))
            except Exception as exc:
                log.error("%s: %s", stem, exc)
                failed.append(stem)
        provenance = f"full-reference; pred_dir={Path(args.pred_dir).resolve()}; gt_dir={Path(args.gt_dir).resolve()}"
    if args.csv:
        report.write_csv(args.csv, provenance)
    for k, v in report.means.items():
        if v is not None:
            print(f"mean {k}: {'inf' if np.isinf(v) else f'{v:.4f}'}")
    return EXIT_PARTIAL if failed else EXIT_OK


# -- bench ---------------------------------------------------------------------------

def hardware_string() -> str:
    import torch

    cpu = platform.processor() or platform.machine()
    return f"{platform.system()} {cpu}; torch {torch.__version__}; threads {torch.get_num_threads()}; cuda {torch.cuda.is_available()}"


def _timed(fn, runs: int, warmup: int = 3) -> np.ndarray:
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(runs):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return np.array(out)


def bench(gen, img: ImageTensor, runs: int, illum: IlluminationParams = IlluminationParams()) -> dict:
    """Timings in seconds: forward only, illumination only, and both together (no file I/O)."""
    import torch

    from .enhance import enhance_image
    from .net import pad_to_multiple

    if runs < 1:
        raise UsageError("runs must be >= 1")
    x = four_channel_input(img, illum)
    padded, _ = pad_to_multiple(x, gen.cfg.multiple)
    inp = torch.from_numpy(padded.transpose(2, 0, 1).copy())[None]
    gen.eval()

    def forward():
        with torch.no_grad():
            gen(inp)

    t_fwd = _timed(forward, runs)
    t_ill = _timed(lambda: four_channel_input(img, illum), runs)
    t_all = _timed(lambda: enhance_image(gen, img, illum), runs)
    return {"forward": t_fwd, "illumination": t_ill, "inclusive": t_all}


def cmd_bench(args) -> int:
    from .trainer import load_generator

    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    gen = load_generator(args.weights)
    img = _rgb(read_image(args.input))
    res = bench(gen, img, args.runs, _illum_params(args))
    print(f"hardware: {hardware_string()}")
    print(f"input: {img.width}x{img.height}, runs={args.runs}, warmup=3")
    labels = {"forward": "enhancement (exclusive)", "illumination": "illumination map", "inclusive": "inclusive (map + forward)"}
    for key, label in labels.items():
        t = res[key]
        print(f"{label}: {t.mean():.4f} ± {t.std():.4f} s")
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # skip the automatic suffix when the help text already names the default
    def _get_help_string(self, action):
        if action.default in (None, False) or "(default" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    p = argparse.ArgumentParser(prog="ednig", description="Illumination-guided low-light enhancement.",
                                formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("illum", help="write the refined illumination map of an image", formatter_class=fmt)
    s.add_argument("input")
    s.add_argument("output", help="grayscale PNG, map scaled to [0,255]")
    s.add_argument("--coarse", action="store_true", help="write the bright channel without guided refinement")
    _illum_args(s)
    s.set_defaults(func=cmd_illum)

    from .trainer import TrainingConfig

    s = sub.add_parser(
        "train", help="train generator and critic",
        description="Train on a LOL-layout dataset. Flags override the JSON config. "
                    f"Training defaults: {_defaults(TrainingConfig)}. Loss weights: {_defaults(LossWeights)}. "
                    f"Learning rate decays linearly to zero at total_epochs. "
                    f"Perceptual features need VGG16 weights (--vgg-weights or ${VGG_ENV}).")
    s.add_argument("--config", help="JSON file with TrainingConfig fields plus "
                                    f"{', '.join(TRAIN_SECTIONS)} sections and {', '.join(TRAIN_PATHS)}")
    s.add_argument("--data-root", help=f"LOL root (default ${LOL_ROOT_ENV})")
    s.add_argument("--out", help="output directory (default runs/ednig)")
    s.add_argument("--epochs", type=int, help="total_epochs (default 200)")
    s.add_argument("--seed", type=int, help="seed (default 0)")
    s.add_argument("--lr", type=float, help="lr_initial (default 1e-4)")
    s.add_argument("--batch-size", type=int, help="batch_size (default 1)")
    s.add_argument("--n-critic", type=int, help="critic updates per generator update (default 5)")
    s.add_argument("--input-size", type=int, help="training crop size (default 512)")
    s.add_argument("--checkpoint-every", type=int, help="epochs between checkpoints (default 10)")
    s.add_argument("--limit", type=int, help="use only the first N training pairs")
    s.add_argument("--val-limit", type=int, help="use only the first N validation pairs")
    s.add_argument("--vgg-weights", help=f"VGG16 feature archive (default ${VGG_ENV})")
    s.add_argument("--random-vgg-seed", type=int, help="use randomly initialized VGG16 features (no weights needed)")
    s.add_argument("--resume", action="store_true", help="continue from the latest checkpoint in --out")
    _illum_args(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("enhance", help="enhance every image in a folder", formatter_class=fmt)
    s.add_argument("--weights", required=True, help="checkpoint directory")
    s.add_argument("input_dir", help="image file or folder")
    s.add_argument("output_dir")
    _illum_args(s)
    s.set_defaults(func=cmd_enhance)

    s = sub.add_parser("eval", help="score images (PSNR/SSIM, or NIQE/BRISQUE with --no-ref)", formatter_class=fmt)
    s.add_argument("pred_dir")
    s.add_argument("gt_dir", nargs="?")
    s.add_argument("--no-ref", action="store_true", help="no-reference metrics only")
    s.add_argument("--model-dir", default=None, help="NR model parameters (default $EDNIG_MODEL_DIR or shipped data)")
    s.add_argument("--csv", default=None, help="per-image CSV with a mean row")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="time enhancement of one image", formatter_class=fmt)
    s.add_argument("--weights", required=True, help="checkpoint directory")
    s.add_argument("--input", required=True)
    s.add_argument("--runs", type=int, default=50)
    _illum_args(s)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EdnigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL if isinstance(exc, NumericError) else EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

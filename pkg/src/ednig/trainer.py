"""Adversarial training loop, learning-rate schedule and checkpointing."""
from __future__ import annotations

import csv
import logging
import math
import shutil
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .archive import read_archive, write_archive
from .critic import Critic, CriticConfig, build_critic
from .enhance import enhance_image
from .errors import ArchiveError, ContractError, NumericError
from .illum import IlluminationParams, four_channel_input
from .imgio import AugmentationParams, PairedSample, augment, normalize, to_batch
from .losses import (LossWeights, VGG16Features, adversarial_loss, critic_loss, generator_loss,
                     gradient_penalty, mse_loss, perceptual_loss)
from .metrics import psnr, ssim
from .net import Generator, GeneratorConfig, build_generator

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
LOG_COLUMNS = ("epoch", "lr", "L_adv", "L_mse", "L_per", "L_cri", "val_psnr", "val_ssim")


@dataclass
class TrainingConfig:
    batch_size: int = 1
    lr_initial: float = 1e-4
    total_epochs: int = 200
    n_critic: int = 5
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0
    checkpoint_every: int = 10
    input_size: int = 512
    crop_scale_range: tuple[float, float] = (0.8, 1.0)
    flip_prob: float = 0.5

    def __post_init__(self):
        self.crop_scale_range = tuple(self.crop_scale_range)
        for name in ("batch_size", "total_epochs", "n_critic", "checkpoint_every"):
            if getattr(self, name) < 1:
                raise ContractError(f"{name} must be >= 1")
        if self.input_size % 32:
            raise ContractError("input_size must be divisible by 32 (generator 16, critic 32)")
        if self.lr_initial < 0:
            raise ContractError("lr_initial must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["crop_scale_range"] = list(self.crop_scale_range)
        return d


@dataclass
class StepReport:
    adv: float
    mse: float
    per: float
    gen_total: float
    critic: float
    gp: float
    wasserstein: float  # mean C(real) - C(fake) at the last critic update

    def values(self) -> dict:
        return asdict(self)


@dataclass
class Checkpoint:
    epoch: int
    generator: dict
    critic: dict
    optim_g: dict
    optim_c: dict
    meta: dict = field(default_factory=dict)

    @property
    def history(self) -> list:
        return self.meta.get("history", [])


def lr_schedule(epoch: int, cfg: TrainingConfig) -> float:
    """Linear decay from ``lr_initial`` at epoch 0 to zero at ``total_epochs``."""
    if not 0 <= epoch <= cfg.total_epochs:
        raise ContractError(f"epoch {epoch} outside [0, {cfg.total_epochs}]")
    return cfg.lr_initial * (1.0 - epoch / cfg.total_epochs)


def make_optimizers(gen: Generator, critic: Critic, cfg: TrainingConfig):
    betas = (cfg.beta1, cfg.beta2)
    return (torch.optim.Adam(gen.parameters(), lr=cfg.lr_initial, betas=betas),
            torch.optim.Adam(critic.parameters(), lr=cfg.lr_initial, betas=betas))


def _finite(name: str, value: torch.Tensor, last: StepReport | None):
    if not torch.isfinite(value).all():
        raise NumericError(f"non-finite {name} loss; last finite step: {last.values() if last else None}")


def train_step(batch, gen: Generator, critic: Critic, opt_g, opt_c, cfg: TrainingConfig,
               w: LossWeights = LossWeights(), extractor: VGG16Features | None = None,
               rng: torch.Generator | None = None, last: StepReport | None = None) -> StepReport:
    """``n_critic`` critic updates followed by one generator update on ``batch``.

    ``batch`` is ``(inputs N×4×H×W, targets N×3×H×W)``, both signed-range.
    """
    inp, target = batch
    if extractor is None and w.lambda_per > 0:
        raise ContractError("lambda_per > 0 needs a perceptual feature extractor")

    gen.requires_grad_(False)
    critic.requires_grad_(True)
    with torch.no_grad():
        fake = gen(inp)
    for _ in range(cfg.n_critic):
        opt_c.zero_grad(set_to_none=True)
        real_s, fake_s = critic(target), critic(fake)
        gp = gradient_penalty(critic, target, fake, generator=rng) if w.gp_weight > 0 else torch.zeros(())
        loss_c = critic_loss(real_s, fake_s, gp, w)
        _finite("critic", loss_c, last)
        loss_c.backward()
        opt_c.step()

    critic.requires_grad_(False)
    gen.requires_grad_(True)
    opt_g.zero_grad(set_to_none=True)
    out = gen(inp)
    adv = adversarial_loss(critic(out))
    mse = mse_loss(out, target)
    if extractor is None:
        per = torch.zeros(())
    elif w.lambda_per > 0:
        per = perceptual_loss(out, target, extractor)
    else:
        with torch.no_grad():
            per = perceptual_loss(out, target, extractor)
    loss_g = generator_loss(adv, mse, per, w)
    _finite("generator", loss_g, last)
    loss_g.backward()
    opt_g.step()
    critic.requires_grad_(True)

    vals = [float(t.detach()) for t in (adv, mse, per, loss_g, loss_c, gp, (real_s - fake_s).mean())]
    return StepReport(*vals)


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def prepare_pair(pair: PairedSample, cfg: TrainingConfig, illum: IlluminationParams, seed: int):
    """Augment a pair and build the (4-channel input, target) tensors for it."""
    params = AugmentationParams(cfg.flip_prob, cfg.crop_scale_range, (cfg.input_size, cfg.input_size), seed)
    aug = augment(pair, params)
    inp = torch.from_numpy(four_channel_input(aug.low, illum).transpose(2, 0, 1).copy())[None]
    return inp, to_batch(normalize(aug.target))


def epoch_batches(n: int, cfg: TrainingConfig, epoch: int) -> list[np.ndarray]:
    order = np.random.default_rng(_seed(cfg.seed, epoch, 0x5EED)).permutation(n)
    return [order[i:i + cfg.batch_size] for i in range(0, n, cfg.batch_size)]


def evaluate(gen: Generator, pairs: Sequence[PairedSample], illum: IlluminationParams = IlluminationParams()):
    """Mean PSNR / SSIM of the generator's enhancements at native resolution."""
    ps, ss = [], []
    for pair in pairs:
        out = enhance_image(gen, pair.low, illum)
        ps.append(psnr(np.rint(out.data), pair.target.data))
        ss.append(ssim(np.rint(out.data), pair.target.data))
    return float(np.mean(ps)), float(np.mean(ss))


# -- checkpoints -----------------------------------------------------------------

def _optim_to_flat(prefix: str, state: dict, tensors: dict) -> dict:
    scalars = {}
    for idx, entries in state["state"].items():
        for key, value in entries.items():
            if torch.is_tensor(value):
                tensors[f"{prefix}/state/{idx}/{key}"] = value
            else:
                scalars[f"{idx}/{key}"] = value
    groups = [{k: (list(v) if isinstance(v, tuple) else v) for k, v in g.items()} for g in state["param_groups"]]
    return {"param_groups": groups, "scalars": scalars}


def _optim_from_flat(prefix: str, tensors: dict, info: dict) -> dict:
    state: dict = {}
    for name, arr in tensors.items():
        if name.startswith(prefix + "/state/"):
            _, _, idx, key = name.split("/", 3)
            state.setdefault(int(idx), {})[key] = torch.from_numpy(arr.copy())
    for name, value in info.get("scalars", {}).items():
        idx, key = name.split("/", 1)
        state.setdefault(int(idx), {})[key] = value
    groups = []
    for g in info["param_groups"]:
        g = dict(g)
        if "betas" in g:
            g["betas"] = tuple(g["betas"])
        groups.append(g)
    return {"state": state, "param_groups": groups}


def save_checkpoint(path, gen: Generator, critic: Critic, opt_g, opt_c, epoch: int, meta: dict | None = None) -> Path:
    tensors: dict = {}
    for name, t in gen.state_dict().items():
        tensors[f"generator/{name}"] = t
    for name, t in critic.state_dict().items():
        tensors[f"critic/{name}"] = t
    info_g = _optim_to_flat("optim_g", opt_g.state_dict(), tensors)
    info_c = _optim_to_flat("optim_c", opt_c.state_dict(), tensors)
    full_meta = {
        "kind": "ednig-checkpoint",
        "checkpoint_version": CHECKPOINT_VERSION,
        "epoch": int(epoch),
        "generator_config": gen.cfg.to_dict(),
        "critic_config": critic.cfg.to_dict(),
        "optim_g": info_g,
        "optim_c": info_c,
    }
    full_meta.update(meta or {})
    return write_archive(path, tensors, full_meta)


def load_checkpoint(path) -> Checkpoint:
    tensors, meta = read_archive(path)
    if meta.get("kind") != "ednig-checkpoint" or meta.get("checkpoint_version") != CHECKPOINT_VERSION:
        raise ArchiveError(f"{path}: not a compatible checkpoint (kind={meta.get('kind')!r}, "
                           f"version={meta.get('checkpoint_version')!r})")

    def section(prefix):
        n = len(prefix) + 1
        return {k[n:]: torch.from_numpy(v.copy()) for k, v in tensors.items() if k.startswith(prefix + "/")}

    return Checkpoint(
        epoch=int(meta["epoch"]),
        generator=section("generator"),
        critic=section("critic"),
        optim_g=_optim_from_flat("optim_g", tensors, meta["optim_g"]),
        optim_c=_optim_from_flat("optim_c", tensors, meta["optim_c"]),
        meta=meta,
    )


def load_generator(path) -> Generator:
    """Generator from a checkpoint (or generator-only archive) directory."""
    tensors, meta = read_archive(path)
    cfg = GeneratorConfig(**meta["generator_config"])
    gen = Generator(cfg)
    state = {k[len("generator/"):]: torch.from_numpy(v.copy()) for k, v in tensors.items()
             if k.startswith("generator/")}
    gen.load_state_dict(state, strict=True)
    gen.eval()
    return gen


def checkpoint_dir(out_dir, epoch: int) -> Path:
    return Path(out_dir) / "checkpoints" / f"epoch_{epoch:04d}"


def latest_checkpoint(out_dir) -> Path | None:
    root = Path(out_dir) / "checkpoints"
    if not root.is_dir():
        return None
    found = sorted(p for p in root.glob("epoch_*") if (p / "manifest.json").is_file())
    return found[-1] if found else None


# -- training ----------------------------------------------------------------------

@dataclass
class TrainResult:
    generator: Generator
    critic: Critic
    history: list
    checkpoint: Path | None


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def _append_log(path: Path, row: dict):
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(LOG_COLUMNS)
        w.writerow([_fmt(row.get(c)) for c in LOG_COLUMNS])


def train(train_set: Sequence[PairedSample], cfg: TrainingConfig, out_dir, *,
          val_set: Sequence[PairedSample] = (), gen_cfg: GeneratorConfig = GeneratorConfig(),
          critic_cfg: CriticConfig = CriticConfig(), illum: IlluminationParams = IlluminationParams(),
          weights: LossWeights = LossWeights(), extractor: VGG16Features | None = None,
          resume: bool = False, extra_meta: dict | None = None) -> TrainResult:
    """Run (or resume) adversarial training; writes checkpoints and ``train_log.csv`` to ``out_dir``."""
    if not train_set:
        raise ContractError("training set is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "train_log.csv"

    gen = build_generator(gen_cfg, cfg.seed)
    critic = build_critic(critic_cfg, cfg.seed + 1)
    opt_g, opt_c = make_optimizers(gen, critic, cfg)
    start, history, best = 0, [], None
    last_ckpt = None

    if resume and (last_ckpt := latest_checkpoint(out_dir)) is not None:
        ck = load_checkpoint(last_ckpt)
        gen.load_state_dict(ck.generator)
        critic.load_state_dict(ck.critic)
        opt_g.load_state_dict(ck.optim_g)
        opt_c.load_state_dict(ck.optim_c)
        start, history, best = ck.epoch, list(ck.history), ck.meta.get("best")
        log.info("resuming from %s at epoch %d", last_ckpt, start)
    if log_path.exists():
        log_path.unlink()
    for row in history:  # rows past the last checkpoint are dropped and recomputed
        _append_log(log_path, row)

    snapshot = {
        "training_config": cfg.to_dict(), "illumination": asdict(illum), "loss_weights": asdict(weights),
        "seed": cfg.seed, **(extra_meta or {}),
    }
    last_report = None
    for epoch in range(start, cfg.total_epochs):
        lr = lr_schedule(epoch, cfg)
        for opt in (opt_g, opt_c):
            for group in opt.param_groups:
                group["lr"] = lr
        sums: dict = {}
        steps = 0
        for b, idxs in enumerate(epoch_batches(len(train_set), cfg, epoch)):
            pairs = [prepare_pair(train_set[i], cfg, illum, _seed(cfg.seed, epoch, int(i))) for i in idxs]
            batch = (torch.cat([p[0] for p in pairs]), torch.cat([p[1] for p in pairs]))
            rng = torch.Generator().manual_seed(_seed(cfg.seed, epoch, b, 0x6E))
            last_report = train_step(batch, gen, critic, opt_g, opt_c, cfg, weights, extractor, rng, last_report)
            for k, v in last_report.values().items():
                sums[k] = sums.get(k, 0.0) + v
            steps += 1
        done = epoch + 1
        row = {"epoch": done, "lr": lr, "L_adv": sums["adv"] / steps, "L_mse": sums["mse"] / steps,
               "L_per": sums["per"] / steps, "L_cri": sums["critic"] / steps}
        is_ckpt = done % cfg.checkpoint_every == 0 or done == cfg.total_epochs
        if is_ckpt and val_set:
            row["val_psnr"], row["val_ssim"] = evaluate(gen, val_set, illum)
        history.append(row)
        _append_log(log_path, row)
        log.info("epoch %d/%d lr=%.3g %s", done, cfg.total_epochs, lr,
                 " ".join(f"{k}={v:.4g}" for k, v in row.items() if k not in ("epoch", "lr")))
        if is_ckpt:
            improved = "val_psnr" in row and (best is None or row["val_psnr"] > best["val_psnr"])
            if improved:
                best = {"epoch": done, "val_psnr": row["val_psnr"], "val_ssim": row["val_ssim"]}
            meta = {**snapshot, "history": history, "best": best}
            last_ckpt = save_checkpoint(checkpoint_dir(out_dir, done), gen, critic, opt_g, opt_c, done, meta)
            if improved:
                best_dir = out_dir / "checkpoints" / "best"
                tmp = best_dir.with_name(".best.tmp")
                shutil.rmtree(tmp, ignore_errors=True)
                shutil.copytree(last_ckpt, tmp)
                shutil.rmtree(best_dir, ignore_errors=True)
                tmp.rename(best_dir)
    return TrainResult(gen, critic, history, last_ckpt)


def config_fields(cls) -> set[str]:
    return {f.name for f in fields(cls)}

"""Loading of the shipped NIQE / BRISQUE model parameters."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..archive import read_archive
from ..errors import ContractError, ModelFileError

MODEL_DIR_ENV = "EDNIG_MODEL_DIR"
NIQE_DIR = "niqe_pristine"
BRISQUE_DIR = "brisque_live"


def default_model_dir() -> Path:
    env = os.environ.get(MODEL_DIR_ENV)
    return Path(env) if env else Path(__file__).resolve().parent.parent / "data"


@dataclass(frozen=True)
class NIQEModel:
    mu: np.ndarray  # (36,)
    cov: np.ndarray  # (36, 36)
    patch_size: int = 96
    sharpness_threshold: float = 0.75

    def __post_init__(self):
        if not np.allclose(self.cov, self.cov.T, atol=1e-10):
            raise ContractError("NIQE covariance must be symmetric")
        if np.linalg.eigvalsh(self.cov).min() < -1e-8 * max(1.0, np.abs(self.cov).max()):
            raise ContractError("NIQE covariance must be positive semi-definite")


@dataclass(frozen=True)
class BRISQUEModel:
    support_vectors: np.ndarray  # (n_sv, 36), already in scaled feature space
    dual_coef: np.ndarray  # (n_sv,)
    rho: float
    gamma: float
    feature_min: np.ndarray
    feature_max: np.ndarray

    def __post_init__(self):
        if np.any(self.feature_min >= self.feature_max):
            raise ContractError("BRISQUE scaling ranges need min < max for every feature")


@dataclass(frozen=True)
class NRModelParams:
    niqe: NIQEModel
    brisque: BRISQUEModel

    @classmethod
    def load(cls, model_dir=None) -> "NRModelParams":
        return cls(load_niqe_model(model_dir), load_brisque_model(model_dir))


def _archive(model_dir, name):
    path = Path(model_dir or default_model_dir()) / name
    if not (path / "manifest.json").is_file():
        raise ModelFileError(
            f"model parameters not found: expected an archive at {path} "
            f"(run scripts/import_nr_models.py or set {MODEL_DIR_ENV})"
        )
    return read_archive(path)


def load_niqe_model(model_dir=None) -> NIQEModel:
    t, meta = _archive(model_dir, NIQE_DIR)
    return NIQEModel(t["mu"].astype(np.float64), t["cov"].astype(np.float64),
                     int(meta.get("patch_size", 96)), float(meta.get("sharpness_threshold", 0.75)))


def load_brisque_model(model_dir=None) -> BRISQUEModel:
    t, meta = _archive(model_dir, BRISQUE_DIR)
    return BRISQUEModel(t["support_vectors"].astype(np.float64), t["dual_coef"].astype(np.float64),
                        float(meta["rho"]), float(meta["gamma"]),
                        t["feature_min"].astype(np.float64), t["feature_max"].astype(np.float64))

"""Full-reference (PSNR, SSIM) and no-reference (NIQE, BRISQUE) image quality."""
from .fullref import psnr, ssim, ssim_map, to_gray
from .models import NRModelParams, load_brisque_model, load_niqe_model
from .noref import brisque, brisque_features, niqe, niqe_patch_features
from .nss import fit_aggd, fit_ggd, imresize, mscn
from .report import ImageRecord, MetricReport

__all__ = [
    "psnr", "ssim", "ssim_map", "to_gray", "NRModelParams", "load_brisque_model", "load_niqe_model",
    "brisque", "brisque_features", "niqe", "niqe_patch_features", "fit_aggd", "fit_ggd", "imresize",
    "mscn", "ImageRecord", "MetricReport",
]

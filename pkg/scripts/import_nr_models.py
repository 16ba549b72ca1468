#!/usr/bin/env python
"""Convert published NIQE / BRISQUE parameter sets into the package archive format.

NIQE:    a MATLAB-convention pristine model (mu_prisparam, cov_prisparam), e.g.
         ``frames_modelparameters.mat`` shipped in the scikit-video wheel.
BRISQUE: a libsvm epsilon-SVR model text file plus a min/max feature range file
         (pickle with ``min_``/``max_`` lists, or libsvm ``svm-scale`` range text).
"""
import argparse
import pickle
from pathlib import Path

import numpy as np
import scipy.io

from ednig.archive import write_archive


def convert_niqe(mat_path, out_dir):
    m = scipy.io.loadmat(mat_path)
    mu_key, cov_key = ("mu_prisparam", "cov_prisparam") if "mu_prisparam" in m else ("pop_mu", "pop_cov")
    write_archive(Path(out_dir) / "niqe_pristine",
                  {"mu": np.ravel(m[mu_key]).astype(np.float64), "cov": m[cov_key].astype(np.float64)},
                  {"kind": "niqe", "patch_size": 96, "sharpness_threshold": 0.75, "source": Path(mat_path).name})


def read_libsvm_model(path):
    header, svs, coefs = {}, [], []
    with open(path) as fh:
        for line in fh:
            if line.strip() == "SV":
                break
            k, *v = line.split()
            header[k] = v
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            coefs.append(float(parts[0]))
            row = {}
            for tok in parts[1:]:
                i, x = tok.split(":")
                row[int(i)] = float(x)
            svs.append(row)
    n_feat = max(max(r) for r in svs)
    sv = np.zeros((len(svs), n_feat))
    for j, r in enumerate(svs):
        for i, x in r.items():
            sv[j, i - 1] = x
    if header["svm_type"][0] != "epsilon_svr" or header["kernel_type"][0] != "rbf":
        raise SystemExit("only epsilon-SVR models with an RBF kernel are supported")
    return sv, np.array(coefs), float(header["rho"][0]), float(header["gamma"][0])


def read_range(path):
    path = Path(path)
    if path.suffix == ".pickle":
        with open(path, "rb") as fh:
            d = pickle.load(fh)
        return np.array(d["min_"], float), np.array(d["max_"], float)
    lo, hi = {}, {}
    lines = path.read_text().split("\n")
    for line in lines[2:]:
        p = line.split()
        if len(p) == 3:
            lo[int(p[0])], hi[int(p[0])] = float(p[1]), float(p[2])
    n = max(lo)
    return np.array([lo[i] for i in range(1, n + 1)]), np.array([hi[i] for i in range(1, n + 1)])


def convert_brisque(model_path, range_path, out_dir):
    sv, coef, rho, gamma = read_libsvm_model(model_path)
    lo, hi = read_range(range_path)
    write_archive(Path(out_dir) / "brisque_live",
                  {"support_vectors": sv, "dual_coef": coef, "feature_min": lo, "feature_max": hi},
                  {"kind": "brisque-svr", "rho": rho, "gamma": gamma, "source": Path(model_path).name})


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--niqe-mat")
    ap.add_argument("--brisque-model")
    ap.add_argument("--brisque-range")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/ednig/data"))
    args = ap.parse_args()
    if args.niqe_mat:
        convert_niqe(args.niqe_mat, args.out)
    if args.brisque_model:
        if not args.brisque_range:
            ap.error("--brisque-range is required with --brisque-model")
        convert_brisque(args.brisque_model, args.brisque_range, args.out)


if __name__ == "__main__":
    main()

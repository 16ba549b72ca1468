#!/usr/bin/env python
"""Convert a torchvision VGG16 checkpoint into the extractor archive.

Usage: python scripts/import_vgg16.py vgg16-397923af.pth OUT_DIR

Only ``features.0`` .. ``features.14`` (through conv3_3) are kept.
"""
import argparse

import torch

from ednig.losses import VGG16Features


def convert(pth_path, out_dir):
    state = torch.load(pth_path, map_location="cpu", weights_only=True)
    if "state_dict" in state:
        state = state["state_dict"]
    m = VGG16Features()
    wanted = m.features.state_dict().keys()
    sub = {k: state[f"features.{k}"] for k in wanted}
    m.features.load_state_dict(sub, strict=True)
    m.save(out_dir)
    return m


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("pth")
    p.add_argument("out_dir")
    a = p.parse_args(argv)
    convert(a.pth, a.out_dir)
    print(f"wrote {a.out_dir}")


if __name__ == "__main__":
    main()

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = ("id", "psnr_db", "ssim", "niqe", "brisque")


@dataclass
class ImageRecord:
    id: str
    psnr_db: float | None = None
    ssim: float | None = None
    niqe: float | None = None
    brisque: float | None = None


def _fmt(v) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6f}"


@dataclass
class MetricReport:
    records: list[ImageRecord] = field(default_factory=list)

    def mean(self, column: str) -> float | None:
        vals = [getattr(r, column) for r in self.records if getattr(r, column) is not None]
        if not vals:
            return None
        return float(sum(vals) / len(vals))

    @property
    def means(self) -> dict:
        return {c: self.mean(c) for c in COLUMNS[1:]}

    def write_csv(self, path, provenance: str | None = None) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f".{path.name}.tmp")
        with open(tmp, "w", newline="") as fh:
            if provenance:
                fh.write(f"# {provenance}\n")
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for r in sorted(self.records, key=lambda r: r.id):
                w.writerow([r.id] + [_fmt(getattr(r, c)) for c in COLUMNS[1:]])
            w.writerow(["mean"] + [_fmt(self.mean(c)) for c in COLUMNS[1:]])
        tmp.replace(path)

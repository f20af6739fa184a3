#!/usr/bin/env python3
"""Write the benchmark families as .lp files into problems/."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from liftsat import corpus

OUT = Path(__file__).resolve().parent.parent / "problems"

FILES = {
    "pigeonhole_10_5.lp": corpus.pigeonhole(10, 5, 2),
    "pigeonhole_10000_5000.lp": corpus.pigeonhole(10000, 5000, 2),
    "pigeonhole_pred_10_5.lp": corpus.pigeonhole_pred(10, 5, 2),
    "rack_single_8.lp": corpus.rack_single(8, 4),
    "rack_quad_4.lp": corpus.rack_quad(4),
    "rack_quad_8.lp": corpus.rack_quad(8),
    "rack_quad_20.lp": corpus.rack_quad(20),
    "generative_bins_12.lp": corpus.generative_bins(12, 3),
    "capacity_chain_16.lp": corpus.capacity_chain(16, 4, 4),
    "region_counts.lp": corpus.region_counts(),
    "bapa_sample.lp": corpus.bapa_sample(),
}


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, src in FILES.items():
        (OUT / name).write_text(src)
        print(f"wrote problems/{name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Write the figure CSVs for every preset and print a short summary.

    python3 scripts/reproduce_figures.py --outdir runs/ [--threads K]
"""

import argparse
from pathlib import Path

import numpy as np

from centralspins.analysis import strict_local_extrema
from centralspins.cli import PRESETS, _write_csv, preset_config, trajectory_rows


def summarize(name, header, rows):
    data = np.array(rows, dtype=float)
    parts = []
    for k, col in enumerate(header[1:], start=1):
        v = data[:, k]
        mx, mn = strict_local_extrema(v)
        parts.append(f"{col}: start {v[0]:.3g}, max {v.max():.3f}, {mx.size} maxima / {mn.size} minima")
    if "concurrence" in header:
        c = data[:, header.index("concurrence")]
        dead = np.flatnonzero(c <= 0.0)
        if dead.size:
            parts.append(f"concurrence first 0 at t={data[dead[0], 0]:.3f}, "
                         f"later max {c[dead[0]:].max():.3f}")
    print(f"{name}: " + "; ".join(parts))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="runs")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(PRESETS))
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in args.only or sorted(PRESETS):
        cfg = preset_config(name)
        cfg.threads = args.threads
        header, rows = trajectory_rows(cfg, cfg.outputs)
        _write_csv(header, rows, outdir / f"{name}.csv")
        summarize(name, header, rows)


if __name__ == "__main__":
    main()

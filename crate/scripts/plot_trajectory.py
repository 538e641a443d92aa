"""Plot a trajectory.csv written by `hartree evolve|blowup|concentrate`.

usage: python scripts/plot_trajectory.py OUT_DIR [--log]
"""
import argparse
import json
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

ap = argparse.ArgumentParser()
ap.add_argument("out_dir", type=Path)
ap.add_argument("--log", action="store_true", help="log scale for H and Gamma")
args = ap.parse_args()

df = pd.read_csv(args.out_dir / "trajectory.csv")
meta = json.loads((args.out_dir / "trajectory.json").read_text())

conc = [c for c in df.columns if c.startswith("conc@")]
fig, axes = plt.subplots(1, 3 if conc else 2, figsize=(13, 4))
axes[0].plot(df.t, df.H, label="H")
axes[0].plot(df.t, df.L_V, label="L_V")
axes[0].plot(df.t, df.E, label="E")
axes[1].plot(df.t, df.Gamma, label="Gamma")
for c in conc:
    axes[2].plot(df.t, df[c], label=c)
if args.log:
    axes[0].set_yscale("log")
    axes[1].set_yscale("log")
for ax in axes:
    ax.set_xlabel("t")
    ax.legend()
fig.suptitle(f"d={meta['d']} a={meta['a']} n={meta['n']} dt={meta['dt']} ({meta['stop_reason']})")
fig.tight_layout()
fig.savefig(args.out_dir / "trajectory.png", dpi=120)
print(args.out_dir / "trajectory.png")

"""Run the three two-step pulse scenarios and print final populations.

Writes trace.csv / summary.json per scenario under OUT (default: runs/fig3).
With --plot, also saves a 3x2 grid of population traces (needs matplotlib).

    python scripts/reproduce_fig3.py [--out runs/fig3] [--plot]
"""

import argparse
from pathlib import Path

from enantiosep.config import load_preset
from enantiosep.runner import run_scenario

PRESETS = ["fig3-perfect", "fig3-duration-error", "fig3-all-errors"]
QUOTED = {
    "fig3-perfect": "p1L = p2L = 1/2, p3R = 1",
    "fig3-duration-error": "p3R ~ 0.976, p1R ~ p2R ~ 0.012",
    "fig3-all-errors": "p1L + p2L ~ 0.988, p3R ~ 0.964",
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/fig3")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    results = {}
    for name in PRESETS:
        res = run_scenario(load_preset(name), Path(args.out) / name)
        results[name] = res
        f = res.final
        print(f"{name:22s} L: {f[0]:.4f} {f[1]:.4f} {f[2]:.4f}   R: {f[3]:.4f} {f[4]:.4f} {f[5]:.4f}")
        print(f"{'':22s} expected {QUOTED[name]}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(3, 2, figsize=(9, 9), sharex=True, sharey=True)
        for row, name in enumerate(PRESETS):
            res = results[name]
            for col, side in enumerate("LR"):
                ax = axes[row, col]
                for k in range(3):
                    ax.plot(res.times, res.populations[:, 3 * col + k], label=f"p{k + 1}")
                ax.set_title(f"{name} ({side})", fontsize=9)
        axes[0, 0].legend()
        for ax in axes[-1]:
            ax.set_xlabel("t / tau")
        fig.tight_layout()
        path = Path(args.out) / "fig3.png"
        fig.savefig(path, dpi=120)
        print(f"saved {path}")


if __name__ == "__main__":
    main()

"""Quick-look plots for the CSV files written by the ``volkovsep`` CLI.

Needs matplotlib (not a package dependency). Pass one or more run
directories; every recognised CSV in them becomes a PNG next to it.

    python scripts/plot_outputs.py out/born out/zitter out/barrier
"""
import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) if r[k] else float("nan") for r in rows] for k in rows[0]} if rows else {}


def channels(data, ax):
    for name in "abcd":
        ax.plot(data["t"], data[f"norm_{name}"], label=f"channel {name}")
    ax.plot(data["t"], data["delta"], "k--", label="Delta(t)")
    ax.set_xlabel("t [1/m]")
    ax.set_ylabel("norm")


def trajectory(data, ax):
    ax.plot(data["t"], data["z"], label="<z>")
    ax.set_xlabel("t [1/m]")
    ax.set_ylabel("<z> [1/m]")


def barrier(data, ax):
    for key in ("T_lr", "R_l"):
        ax.plot(data["E"], data[key], label=key)
    ax.set_xlabel("E")


def flight(data, ax):
    ax.plot(data["t"], data["negative_fraction"], label="negative fraction")
    ax.set_xlabel("t [1/m]")


def modes(data, ax):
    ax.semilogy(data["n"], data["norm2"], "o")
    ax.set_xlabel("n")
    ax.set_ylabel("|w_n|^2")


PLOTTERS = {"channels.csv": channels, "trajectory.csv": trajectory, "barrier.csv": barrier,
            "flight.csv": flight, "modes.csv": modes}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dirs", nargs="+", type=Path)
    args = ap.parse_args()
    for d in args.dirs:
        for name, plot in PLOTTERS.items():
            path = d / name
            if not path.exists():
                continue
            fig, ax = plt.subplots(figsize=(6, 4))
            plot(read(path), ax)
            if ax.get_legend_handles_labels()[0]:
                ax.legend()
            fig.tight_layout()
            fig.savefig(path.with_suffix(".png"), dpi=120)
            plt.close(fig)
            print(f"wrote {path.with_suffix('.png')}")


if __name__ == "__main__":
    main()

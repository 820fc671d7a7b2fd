"""Histogram of the estimator/error correlation coefficients across the
samples of a benchmark summary."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fig_common import read_summary


def render(summary_path, out, bins=10, title=None):
    payload = read_summary(summary_path)
    rhos = [s["rho_corr"] for s in payload["samples"] if s.get("rho_corr") is not None]
    if not rhos:
        raise SystemExit(f"{summary_path}: no correlation values recorded")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.hist(rhos, bins=bins, range=(0.0, 1.0), color="tab:blue", edgecolor="white")
    ax.axvline(float(np.median(rhos)), color="tab:red", ls="--",
               label=f"median {np.median(rhos):.3f}")
    ax.set_xlabel("correlation (estimate vs true error)")
    ax.set_ylabel("samples")
    ax.set_title(title or payload.get("benchmark", "correlation"))
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--summary", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--title")
    args = ap.parse_args(argv)
    render(args.summary, args.out, args.bins, args.title)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

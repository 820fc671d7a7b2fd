"""Estimator trace panel: running error estimate vs decaying threshold,
with solver-handled intervals shaded."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from fig_common import read_rollout_csv, solver_spans


def render(rollout_csv, out, title=None):
    data = read_rollout_csv(rollout_csv)
    fig, ax = plt.subplots(figsize=(7, 3.2))
    for start, end in solver_spans(data["times"], data["engine"]):
        ax.axvspan(start, end, color="mediumseagreen", alpha=0.25, linewidth=0)
    ax.semilogy(data["times"][1:], data["eta"][1:], color="tab:blue",
                label="error estimate")
    ax.semilogy(data["times"], data["threshold"], color="tab:red", ls="--",
                label="threshold")
    ax.set_xlabel("t")
    ax.set_ylabel("normalized residual EMA")
    ax.set_title(title or "estimator trace (shaded: solver steps)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rollout-csv", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--title")
    args = ap.parse_args(argv)
    render(args.rollout_csv, args.out, args.title)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

"""Error-growth panel: relative L2 error over time for each framework's
rollout CSV found in a sample directory."""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from fig_common import read_rollout_csv

STYLES = {
    "surrogate": dict(color="tab:orange", label="surrogate only"),
    "hybrid": dict(color="tab:blue", label="gated hybrid"),
    "reference": dict(color="tab:gray", label="solver reference", ls=":"),
}


def render(sample_dir, out, logy=False, title=None):
    sample = pathlib.Path(sample_dir)
    fig, ax = plt.subplots(figsize=(7, 3.2))
    plotted = 0
    for name, style in STYLES.items():
        path = sample / f"{name}.csv"
        if not path.exists():
            continue
        data = read_rollout_csv(path)
        if data["rel_l2"] is None:
            continue
        ax.plot(data["times"], data["rel_l2"], **style)
        plotted += 1
    if not plotted:
        raise SystemExit(f"no rollout CSVs with error columns in {sample_dir}")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("relative L2 error")
    ax.set_title(title or f"error growth: {sample.name}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sample-dir", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--logy", action="store_true")
    ap.add_argument("--title")
    args = ap.parse_args(argv)
    render(args.sample_dir, args.out, args.logy, args.title)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

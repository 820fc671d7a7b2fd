"""Spatiotemporal error panel from two snapshot series.

1d fields render as an (x, t) heatmap of |prediction - truth|; 2d fields
as a row of snapshots at selected times; 3d fields as mid-depth slices.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fig_common import read_snapshot_series


def render(truth_dir, truth_prefix, pred_dir, pred_prefix, out,
           n_panels=5, title=None):
    t_times, truth = read_snapshot_series(truth_dir, truth_prefix)
    p_times, pred = read_snapshot_series(pred_dir, pred_prefix)
    if truth.shape != pred.shape or not np.allclose(t_times, p_times):
        raise SystemExit("truth/prediction snapshot series do not line up")
    err = np.abs(pred - truth)

    if err.ndim == 2:          # (time, x): render as x-t heatmap
        fig, ax = plt.subplots(figsize=(6, 3.4))
        im = ax.imshow(err.T, origin="lower", aspect="auto",
                       extent=(t_times[0], t_times[-1], 0.0, 1.0), cmap="magma")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
        fig.colorbar(im, ax=ax, label="|error|")
    else:
        if err.ndim == 4:      # 3d: slice mid-depth
            err = err[:, :, :, err.shape[3] // 2]
        idx = np.linspace(0, len(t_times) - 1, n_panels).round().astype(int)
        fig, axes = plt.subplots(1, len(idx), figsize=(2.2 * len(idx), 2.6))
        vmax = max(err[idx].max(), 1e-300)
        for ax, i in zip(np.atleast_1d(axes), idx):
            im = ax.imshow(err[i].T, origin="lower", cmap="magma", vmin=0.0, vmax=vmax)
            ax.set_title(f"t = {t_times[i]:.2f}", fontsize=8)
            ax.set_xticks([]), ax.set_yticks([])
        fig.colorbar(im, ax=list(np.atleast_1d(axes)), label="|error|", shrink=0.8)
    fig.suptitle(title or "spatiotemporal error")
    fig.savefig(out, dpi=130, bbox_inches="tight")
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--truth-dir", required=True)
    ap.add_argument("--truth-prefix", default="reference")
    ap.add_argument("--pred-dir", required=True)
    ap.add_argument("--pred-prefix", default="hybrid")
    ap.add_argument("--out", required=True)
    ap.add_argument("--panels", type=int, default=5)
    ap.add_argument("--title")
    args = ap.parse_args(argv)
    render(args.truth_dir, args.truth_prefix, args.pred_dir, args.pred_prefix,
           args.out, args.panels, args.title)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

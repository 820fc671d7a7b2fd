"""Produce an on-disk experiment and render its figure panels.

Runs a three-sample 1d bench with snapshot files through the CLI, then
invokes the standalone figure scripts on the written CSV/JSON/snapshot
files.  Outputs land in ./demo_out.
"""

import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = pathlib.Path("demo_out")

subprocess.run([sys.executable, "-m", "hybridpde", "bench",
                "--benchmark", "burgers1d", "--test-count", "3",
                "--save-fields", "--out-dir", str(OUT / "bench")], check=True)

figures = ROOT / "figures"
sample = OUT / "bench" / "samples" / "sample_10000"
panels = [
    ("error growth", "plot_error_growth.py",
     ["--sample-dir", str(sample), "--out", str(OUT / "error_growth.png")]),
    ("estimator trace", "plot_estimator_trace.py",
     ["--rollout-csv", str(sample / "hybrid.csv"), "--out", str(OUT / "estimator_trace.png")]),
    ("correlation histogram", "plot_corr_hist.py",
     ["--summary", str(OUT / "bench" / "summary.json"), "--out", str(OUT / "corr_hist.png")]),
    ("error contour", "plot_error_contour.py",
     ["--truth-dir", str(sample), "--truth-prefix", "reference",
      "--pred-dir", str(sample), "--pred-prefix", "hybrid",
      "--out", str(OUT / "error_contour.png")]),
]
for label, script, args in panels:
    subprocess.run([sys.executable, str(figures / script), *args], check=True)
    print(f"rendered {label}")

print(f"\nall panels written under {OUT}/")

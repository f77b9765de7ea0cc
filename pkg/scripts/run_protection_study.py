#!/usr/bin/env python3
"""Run the protection study: all techniques over the available benchmarks.

Uses every ISCAS-85 .bench found in benchmarks/ (falling back to the bundled
full adder), runs none/random/g_color/g_type1/g_type2 over several seeds,
and writes report.csv, report.json, and the leakage-reduction table under
out/study/.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from splitsec import harness  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5, help="number of seeds (0..n-1)")
    ap.add_argument("--effort", type=int, default=None)
    ap.add_argument("--out-dir", default=str(REPO / "out" / "study"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    bench_dir = REPO / "benchmarks"
    benches = sorted(str(p) for p in bench_dir.glob("c*.bench"))
    if not benches:
        benches = [str(bench_dir / "fulladder.bench")]
        print("no ISCAS benchmarks found; using the bundled full adder "
              "(run scripts/fetch_benchmarks.py first for the real study)")

    cfg = harness.ExperimentConfig(
        benches=tuple(benches),
        techniques=("none", "random", "g_color", "g_type1", "g_type2"),
        seeds=tuple(range(args.seeds)),
        effort=args.effort,
        attacks=("greedy", "assignment"),
        out_dir=args.out_dir,
        workers=args.workers,
    )
    report = harness.run_pipeline(cfg)
    table = harness.table2_report(report)
    out = Path(args.out_dir)
    (out / "reduction_table.csv").write_text(harness.table_to_csv(table))

    print(f"rows: {len(report.rows)} -> {args.out_dir}")
    print("\nMI reduction vs unprotected (%):")
    print(harness.table_to_csv(table))
    for tech, entry in report.aggregates.items():
        parts = ", ".join(f"{k}={v:.4g}" for k, v in entry.items())
        print(f"{tech}: {parts}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

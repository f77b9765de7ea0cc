"""Command-line front end.

Exit codes: 0 success, 1 configuration or parse error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import attack as attack_mod
from . import layout as layout_mod
from . import leakage as leakage_mod
from . import netlist as netlist_mod
from . import protect as protect_mod
from . import harness
from .harness import ConfigError


def _load_graph(path: str) -> netlist_mod.NetlistGraph:
    p = Path(path)
    return netlist_mod.parse_bench(p.read_text(), p.stem)


def _load_placement(g, path: str) -> layout_mod.Placement:
    doc = json.loads(Path(path).read_text())
    return layout_mod.placement_from_json(g, doc)


def _emit(doc, out: str | None):
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_parse(args) -> int:
    g = _load_graph(args.bench)
    st = netlist_mod.stats(g)
    print(f"{g.name}: inputs={st.input_count} outputs={st.output_count} "
          f"gates={st.gate_count} edges={len(g.edges)}")
    if args.out:
        _emit(netlist_mod.graph_to_json(g), args.out)
    return 0


def _partition(g, args):
    return harness.partition_for(g, args.technique, args.seed)


def cmd_protect(args) -> int:
    g = _load_graph(args.bench)
    part = _partition(g, args)
    _emit(protect_mod.partitioning_to_json(part, g), args.out)
    return 0


def cmd_floorplan(args) -> int:
    g = _load_graph(args.bench)
    part = _partition(g, args)
    plan = layout_mod.floorplan(part, g, args.utilization)
    doc = {
        "die": list(plan.die),
        "utilization": plan.utilization,
        "fences": {
            str(pid): [f.x0, f.y0, f.x1, f.y1] for pid, f in sorted(plan.fences.items())
        },
        "pads": {
            g.gates[v].name: list(site) for v, site in sorted(plan.io_sites.items())
        },
    }
    _emit(doc, args.out)
    return 0


def cmd_place(args) -> int:
    g = _load_graph(args.bench)
    pl, _ = harness.placement_for(
        g, args.technique, args.seed, args.utilization, args.effort
    )
    _emit(layout_mod.placement_to_json(g, pl), args.out)
    return 0


def cmd_shuffle(args) -> int:
    g = _load_graph(args.bench)
    pl = _load_placement(g, args.placement)
    pl = layout_mod.shuffle(pl, args.fraction, args.seed, g)
    _emit(layout_mod.placement_to_json(g, pl), args.out)
    return 0


def cmd_mi(args) -> int:
    g = _load_graph(args.bench)
    pl = _load_placement(g, args.placement)
    jd = leakage_mod.joint_distribution(g, pl, args.bin_width)
    if args.csv:
        _emit_text(leakage_mod.joint_to_csv(jd), args.out)
    else:
        _emit(leakage_mod.report_to_json(leakage_mod.mutual_information(jd)), args.out)
    return 0


def cmd_attack(args) -> int:
    g = _load_graph(args.bench)
    pl = _load_placement(g, args.placement)
    view = attack_mod.feol_view(g, pl)
    if args.attack == "greedy":
        res = attack_mod.greedy_proximity_attack(view, args.seed)
    else:
        res = attack_mod.assignment_attack(view)
    _emit(attack_mod.result_to_json(res), args.out)
    if args.bench_out:
        Path(args.bench_out).write_text(attack_mod.recovered_to_bench(view, res))
    return 0


def cmd_pipeline(args) -> int:
    cfg = harness.ExperimentConfig(
        benches=tuple(args.bench),
        techniques=tuple(args.technique),
        seeds=tuple(args.seeds),
        utilization=args.utilization,
        bin_width=args.bin_width,
        effort=args.effort,
        attacks=tuple(args.attack),
        out_dir=args.out_dir,
        workers=args.workers,
    )
    report = harness.run_pipeline(cfg)
    failed = [r for r in report.rows if r.status != "ok"]
    print(f"{len(report.rows)} rows ({len(failed)} failed)"
          + (f" -> {args.out_dir}" if args.out_dir else ""))
    for tech, entry in report.aggregates.items():
        parts = ", ".join(f"{k}={v:.4g}" for k, v in entry.items())
        print(f"  {tech}: {parts}")
    return 0


def cmd_sweep(args) -> int:
    report = harness.mi_vs_attack_sweep(
        args.bench,
        args.seeds,
        steps=args.steps,
        utilization=args.utilization,
        bin_width=args.bin_width,
        effort=args.effort,
        out_dir=args.out_dir,
    )
    print(f"{report.benchmark}: pearson(normalized MI, greedy rate) over "
          f"{args.steps} fractions = {report.pearson:.4f} "
          f"(pooled {report.pearson_pooled:.4f})")
    return 0


def cmd_table2(args) -> int:
    doc = json.loads(Path(args.report).read_text())
    rows = [harness.RowResult(**r) for r in doc["rows"]]
    table = harness.table2_report(harness.ExperimentReport(rows, doc.get("aggregates", {})))
    _emit_text(harness.table_to_csv(table), args.out)
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="splitsec",
        description="Split-manufacturing layout security workbench",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, technique=False, placement=False, attacks=False, csv_ok=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--utilization", type=float, default=0.8)
        p.add_argument("--bin-width", type=int, default=1, dest="bin_width")
        p.add_argument("--effort", type=int, default=None)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", default=True,
                         help="JSON output (default)")
        if csv_ok:
            fmt.add_argument("--csv", action="store_true", default=False)
        if technique:
            p.add_argument("--technique", default="none",
                           choices=harness.PIPELINE_TECHNIQUES)
        if placement:
            p.add_argument("--placement", required=True,
                           help="placement JSON produced by `place` or `shuffle`")
        if attacks:
            p.add_argument("--attack", default="greedy", choices=harness.ATTACKS)

    p = sub.add_parser("parse", help="parse a .bench file, print stats, dump JSON")
    p.add_argument("bench")
    common(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("protect", help="partition a netlist")
    p.add_argument("bench")
    common(p, technique=True)
    p.set_defaults(fn=cmd_protect)

    p = sub.add_parser("floorplan", help="pack fences for a partitioning")
    p.add_argument("bench")
    common(p, technique=True)
    p.set_defaults(fn=cmd_floorplan)

    p = sub.add_parser("place", help="partition, floorplan, and place")
    p.add_argument("bench")
    common(p, technique=True)
    p.set_defaults(fn=cmd_place)

    p = sub.add_parser("shuffle", help="randomize part of a placement")
    p.add_argument("bench")
    common(p, placement=True)
    p.add_argument("--fraction", type=float, default=1.0)
    p.set_defaults(fn=cmd_shuffle)

    p = sub.add_parser("mi", help="leakage of a placement")
    p.add_argument("bench")
    common(p, placement=True, csv_ok=True)
    p.set_defaults(fn=cmd_mi)

    p = sub.add_parser("attack", help="recover connectivity from the FEOL view")
    p.add_argument("bench")
    common(p, placement=True, attacks=True)
    p.add_argument("--bench-out", default=None,
                   help="also write the recovered netlist as .bench")
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("pipeline", help="full experiment grid")
    p.add_argument("--bench", action="append", required=True)
    p.add_argument("--technique", action="append", required=True,
                   choices=harness.PIPELINE_TECHNIQUES)
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--attack", action="append", default=None,
                   choices=harness.ATTACKS)
    p.add_argument("--utilization", type=float, default=0.8)
    p.add_argument("--bin-width", type=int, default=1, dest="bin_width")
    p.add_argument("--effort", type=int, default=None)
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("sweep", help="stepwise shuffle sweep: leakage vs attack")
    p.add_argument("bench")
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--utilization", type=float, default=0.8)
    p.add_argument("--bin-width", type=int, default=1, dest="bin_width")
    p.add_argument("--effort", type=int, default=None)
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("table2", help="leakage-reduction table from a report")
    p.add_argument("report", help="report.json from `pipeline`")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_table2)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "attack", None) is None and args.command == "pipeline":
        args.attack = ["greedy"]
    try:
        return args.fn(args)
    except (netlist_mod.BenchParseError, ConfigError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end experiment pipeline and reporting.

Each report row runs parse -> partition -> floorplan -> place -> leakage ->
attacks for one (benchmark, technique, seed) triple.  ``random`` is the
randomization baseline: the unprotected placement with all cell sites
shuffled.  All randomness is derived from the configured seeds, so a config
maps to byte-identical CSV output on every run; wall-clock runtimes are
reported in the JSON form only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import attack as attack_mod
from . import layout as layout_mod
from . import leakage as leakage_mod
from . import netlist as netlist_mod
from . import protect as protect_mod

PIPELINE_TECHNIQUES = ("none", "random", "g_color", "g_type1", "g_type2")
ATTACKS = ("greedy", "assignment")


class ConfigError(ValueError):
    pass


def derive_seed(*parts) -> int:
    """Stable sub-seed from integer parts (independent of hash randomization)."""
    blob = ("splitsec:" + ":".join(str(int(p)) for p in parts)).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


@dataclass
class ExperimentConfig:
    benches: tuple[str, ...]
    techniques: tuple[str, ...]
    seeds: tuple[int, ...]
    utilization: float = 0.8
    bin_width: int = 1
    effort: int | None = None  # None: 150 moves per cell, floor 2000
    attacks: tuple[str, ...] = ("greedy",)
    out_dir: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.benches = tuple(self.benches)
        self.techniques = tuple(self.techniques)
        self.seeds = tuple(int(s) for s in self.seeds)
        self.attacks = tuple(self.attacks)
        if not self.benches:
            raise ConfigError("at least one benchmark is required")
        if not self.techniques:
            raise ConfigError("at least one technique is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        bad = [t for t in self.techniques if t not in PIPELINE_TECHNIQUES]
        if bad:
            raise ConfigError(f"unknown techniques: {bad}")
        bad = [a for a in self.attacks if a not in ATTACKS]
        if bad:
            raise ConfigError(f"unknown attacks: {bad}")
        if not (0 < self.utilization <= 1):
            raise ConfigError("utilization must be in (0, 1]")
        if self.bin_width < 1:
            raise ConfigError("bin_width must be >= 1")


@dataclass
class RowResult:
    benchmark: str
    technique: str
    seed: int
    status: str = "ok"
    error: str = ""
    gate_count: int = 0
    partitions: int = 0
    mi: float = math.nan
    h_x: float = math.nan
    normalized_mi: float = math.nan
    total_hpwl: int = 0
    die_area: int = 0
    rates: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)  # attack -> [correct, total]
    runtimes: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    rows: list[RowResult]
    aggregates: dict


def default_effort(n_cells: int) -> int:
    return max(2000, 150 * n_cells)


def partition_for(g, technique: str, seed: int):
    if technique in ("none", "random"):
        return protect_mod.identity_partition(g)
    if technique == "g_color":
        return protect_mod.g_color(g, seed)
    if technique == "g_type1":
        return protect_mod.g_type(g, 1, seed)
    if technique == "g_type2":
        return protect_mod.g_type(g, 2, seed)
    raise ConfigError(f"unknown technique '{technique}'")


def placement_for(g, technique: str, seed: int, utilization: float, effort: int | None):
    """Partition, floorplan, and place one layout; returns (placement, partitioning)."""
    part = partition_for(g, technique, seed)
    plan = layout_mod.floorplan(part, g, utilization)
    if effort is None:
        effort = default_effort(len(g.logic_ids))
    pl = layout_mod.place(g, plan, seed, effort)
    if technique == "random":
        pl = layout_mod.shuffle(pl, 1.0, derive_seed(seed, 0xF), g)
    return pl, part


def _run_row(args) -> RowResult:
    bench_name, text, technique, seed, utilization, bin_width, effort, attacks = args
    row = RowResult(benchmark=bench_name, technique=technique, seed=seed)
    try:
        t0 = time.perf_counter()
        g = netlist_mod.parse_bench(text, bench_name)
        row.gate_count = netlist_mod.stats(g).gate_count
        t1 = time.perf_counter()
        pl, part = placement_for(g, technique, seed, utilization, effort)
        row.partitions = part.count
        t2 = time.perf_counter()
        jd = leakage_mod.joint_distribution(g, pl, bin_width)
        rep = leakage_mod.mutual_information(jd)
        row.mi, row.h_x, row.normalized_mi = rep.mi, rep.h_x, rep.normalized_mi
        t3 = time.perf_counter()
        view = attack_mod.feol_view(g, pl)
        for name in attacks:
            if name == "greedy":
                res = attack_mod.greedy_proximity_attack(view, seed)
            else:
                res = attack_mod.assignment_attack(view)
            row.rates[name] = res.rate
            row.counts[name] = [res.correct, res.total]
        t4 = time.perf_counter()
        wl = layout_mod.hpwl(g, pl)
        row.total_hpwl = wl.total_hpwl
        row.die_area = wl.die_area
        row.runtimes = {
            "parse_s": t1 - t0,
            "place_s": t2 - t1,
            "leakage_s": t3 - t2,
            "attack_s": t4 - t3,
        }
    except Exception as exc:  # isolate per-row failures
        row.status = "failed"
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_pipeline(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every configured (benchmark, technique, seed) row and aggregate.

    Rows are assembled sorted by (benchmark, technique, seed) regardless of
    execution order; per-row failures are recorded, not fatal.
    """
    texts = {}
    for path in cfg.benches:
        p = Path(path)
        texts[p.stem] = p.read_text()

    jobs = [
        (name, texts[name], tech, seed,
         cfg.utilization, cfg.bin_width, cfg.effort, cfg.attacks)
        for name in sorted(texts)
        for tech in sorted(cfg.techniques)
        for seed in sorted(cfg.seeds)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_row, jobs))
    else:
        rows = [_run_row(j) for j in jobs]
    rows.sort(key=lambda r: (r.benchmark, r.technique, r.seed))

    report = ExperimentReport(rows, _aggregate(rows))
    if cfg.out_dir:
        write_report(report, cfg.out_dir)
    return report


def _aggregate(rows: list[RowResult]) -> dict:
    """Per-technique means of MI reduction and attack-rate reduction vs none."""
    base_mi = {}
    base_rates = {}
    for r in rows:
        if r.technique == "none" and r.status == "ok":
            base_mi[(r.benchmark, r.seed)] = r.mi
            base_rates[(r.benchmark, r.seed)] = r.rates
    agg: dict[str, dict] = {}
    for tech in sorted({r.technique for r in rows} - {"none"}):
        reductions = []
        factors: dict[str, list[float]] = {}
        for r in rows:
            if r.technique != tech or r.status != "ok":
                continue
            key = (r.benchmark, r.seed)
            if key not in base_mi:
                continue
            reductions.append(leakage_mod.mi_reduction_percent(base_mi[key], r.mi))
            for name, rate in r.rates.items():
                base = base_rates[key].get(name)
                if base is None:
                    continue
                factors.setdefault(name, []).append(
                    base / rate if rate > 0 else math.inf
                )
        entry = {}
        if reductions:
            entry["mean_mi_reduction_pct"] = float(np.mean(reductions))
        for name, vals in sorted(factors.items()):
            entry[f"mean_{name}_rate_reduction_factor"] = float(np.mean(vals))
        if entry:
            agg[tech] = entry
    return agg


CSV_COLUMNS = (
    "benchmark technique seed status gate_count partitions "
    "h_x mi normalized_mi total_hpwl die_area greedy_rate assignment_rate error"
).split()


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([
            r.benchmark, r.technique, r.seed, r.status, r.gate_count, r.partitions,
            _fmt(r.h_x), _fmt(r.mi), _fmt(r.normalized_mi),
            r.total_hpwl, r.die_area,
            _fmt(r.rates.get("greedy")), _fmt(r.rates.get("assignment")),
            r.error,
        ])
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def report_to_json(report: ExperimentReport) -> dict:
    return {
        "rows": [asdict(r) for r in report.rows],
        "aggregates": report.aggregates,
    }


def write_report(report: ExperimentReport, out_dir: str):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report_to_csv(report))
    (out / "report.json").write_text(
        json.dumps(report_to_json(report), indent=2) + "\n"
    )


# -- randomization sweep ------------------------------------------------------


@dataclass
class SweepReport:
    benchmark: str
    seeds: tuple[int, ...]
    rows: list[tuple[int, float, float, float]]  # seed, fraction, norm MI, rate
    fraction_means: list[tuple[float, float, float]]
    pearson: float
    pearson_pooled: float


def mi_vs_attack_sweep(
    bench_path: str,
    seeds,
    steps: int = 11,
    utilization: float = 0.8,
    bin_width: int = 1,
    effort: int | None = None,
    out_dir: str | None = None,
) -> SweepReport:
    """Shuffle the unprotected layout stepwise and track leakage vs attack.

    For each seed the unprotected placement is shuffled at fractions
    0, 1/(steps-1), ..., 1; every step reports normalized MI and the greedy
    attack's correct-connection rate.  The headline correlation is Pearson
    over the per-fraction means; the pooled point cloud is also reported.
    """
    if steps < 2:
        raise ConfigError("sweep needs at least 2 steps")
    path = Path(bench_path)
    g = netlist_mod.parse_bench(path.read_text(), path.stem)
    # round away binary noise so 3/10 reads 0.3 in reports
    fractions = [round(i / (steps - 1), 9) for i in range(steps)]

    rows = []
    for seed in sorted(int(s) for s in seeds):
        base, _ = placement_for(g, "none", seed, utilization, effort)
        for i, frac in enumerate(fractions):
            pl = layout_mod.shuffle(base, frac, derive_seed(seed, i), g)
            rep = leakage_mod.mutual_information(
                leakage_mod.joint_distribution(g, pl, bin_width)
            )
            res = attack_mod.greedy_proximity_attack(attack_mod.feol_view(g, pl))
            rows.append((seed, frac, rep.normalized_mi, res.rate))

    means = []
    for i, frac in enumerate(fractions):
        sel = [r for r in rows if r[1] == frac]
        means.append((
            frac,
            float(np.mean([r[2] for r in sel])),
            float(np.mean([r[3] for r in sel])),
        ))
    pearson = _pearson([m[1] for m in means], [m[2] for m in means])
    pooled = _pearson([r[2] for r in rows], [r[3] for r in rows])
    report = SweepReport(path.stem, tuple(sorted(int(s) for s in seeds)),
                         rows, means, pearson, pooled)
    if out_dir:
        write_sweep(report, out_dir)
    return report


def _pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.std() == 0 or y.std() == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


def sweep_to_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "fraction", "normalized_mi", "greedy_rate"])
    for seed, frac, nmi, rate in report.rows:
        writer.writerow([seed, _fmt(frac), _fmt(nmi), _fmt(rate)])
    return buf.getvalue()


def write_sweep(report: SweepReport, out_dir: str):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(sweep_to_csv(report))
    (out / "sweep.json").write_text(json.dumps({
        "benchmark": report.benchmark,
        "seeds": list(report.seeds),
        "fraction_means": [list(m) for m in report.fraction_means],
        "pearson": report.pearson,
        "pearson_pooled": report.pearson_pooled,
    }, indent=2) + "\n")


# -- leakage-reduction table ---------------------------------------------------


@dataclass
class ReductionTable:
    benchmarks: list[str]
    techniques: list[str]
    reductions: dict[tuple[str, str], float]
    averages: dict[str, float]


def table2_report(report: ExperimentReport) -> ReductionTable:
    """Per benchmark and technique: percent MI reduction vs the unprotected
    baseline (seed-mean MI on both sides), plus a per-technique average."""
    mi: dict[tuple[str, str], list[float]] = {}
    for r in report.rows:
        if r.status == "ok":
            mi.setdefault((r.benchmark, r.technique), []).append(r.mi)
    benches = sorted({b for b, _ in mi})
    techs = sorted({t for _, t in mi} - {"none"})
    reductions = {}
    for b in benches:
        if (b, "none") not in mi:
            raise ConfigError(f"no unprotected baseline rows for '{b}'")
        base = float(np.mean(mi[(b, "none")]))
        for t in techs:
            if (b, t) in mi:
                reductions[(b, t)] = leakage_mod.mi_reduction_percent(
                    base, float(np.mean(mi[(b, t)]))
                )
    averages = {
        t: float(np.mean([v for (b, tt), v in reductions.items() if tt == t]))
        for t in techs
        if any(tt == t for _, tt in reductions)
    }
    return ReductionTable(benches, techs, reductions, averages)


def table_to_csv(table: ReductionTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["benchmark"] + table.techniques)
    for b in table.benchmarks:
        writer.writerow(
            [b] + [_fmt(table.reductions.get((b, t))) for t in table.techniques]
        )
    writer.writerow(["avg"] + [_fmt(table.averages.get(t)) for t in table.techniques])
    return buf.getvalue()

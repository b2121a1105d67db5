"""Evaluation harness: per-matrix metrics and the experiment runner.

``measure`` reproduces the evaluation methodology: count flow entries, group
forwards and distinct groups; take every pair's primary path and, for each
link (or node, depending on the matrix family) on it, simulate that element
failing and relate the delivered and crankback weights to the pair's
shortest distance.  ``run_experiment`` generates topologies, builds all
requested configurations, measures them, and aggregates means per network
size, deterministically for a given master seed.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field, replace
from statistics import fmean
from typing import Callable

from .baseline import disjoint_rules
from .dataplane import LOOP, simulate
from .protect import hybrid_rules, optimize, per_link_rules, per_node_rules
from .rules import MODE_DISJOINT_NODE, MODE_HYBRID, MODE_PER_NODE, ForwardingMatrix
from .spf import all_shortest_trees
from .topology import (
    NO_FAILURE,
    FailureScenario,
    GenerationError,
    Topology,
    generate_erdos_renyi,
    generate_lattice,
    generate_waxman,
    unit_weights,
)

__all__ = [
    "MetricsRow",
    "ExperimentConfig",
    "ExperimentReport",
    "measure",
    "run_experiment",
    "CSV_HEADER",
    "ALL_VARIANTS",
    "build_variant",
]

CSV_HEADER = (
    "network,variant,size,flow_entries,group_fwd_entries,distinct_groups,"
    "primary_ratio,backup_avg,backup_min,backup_max,crankback_avg,crankback_max"
)

ALL_VARIANTS = ("per-link", "per-node", "hybrid", "disjoint-link", "disjoint-node")

# Matrices whose backup behavior is exercised with node failures; the rest
# are exercised with link failures.  Hybrid results are reported for node
# failures: under pure link failures they equal the per-link results by
# construction.
_NODE_FAILURE_MODES = {MODE_PER_NODE, MODE_HYBRID, MODE_DISJOINT_NODE}


@dataclass
class MetricsRow:
    network: str
    variant: str
    size: int
    flow_entries: float
    group_fwd_entries: float
    distinct_groups: float
    primary_ratio: float
    backup_avg: float
    backup_min: float
    backup_max: float
    crankback_avg: float
    crankback_max: float
    # Not part of the fixed CSV schema; carried in the JSON report.
    base_entries: float = 0.0
    extra_entries: float = 0.0
    uncovered_cases: float = 0.0
    loop_traces: float = 0.0
    compute_seconds: float = 0.0

    def csv_line(self) -> str:
        def num(x: float) -> str:
            if isinstance(x, float):
                return "nan" if math.isnan(x) else f"{x:.6f}"
            return str(x)

        return ",".join(
            [
                self.network,
                self.variant,
                str(self.size),
                num(self.flow_entries),
                num(self.group_fwd_entries),
                num(self.distinct_groups),
                num(self.primary_ratio),
                num(self.backup_avg),
                num(self.backup_min),
                num(self.backup_max),
                num(self.crankback_avg),
                num(self.crankback_max),
            ]
        )


def _on_path_scenarios(mode: str, sequence: tuple[int, ...]) -> list[FailureScenario]:
    if mode in _NODE_FAILURE_MODES:
        # Endpoints are excluded: the source is the sender and a failed
        # destination is undeliverable by definition.
        return [FailureScenario.node_down(v) for v in sequence[1:-1]]
    return [FailureScenario.link_down(a, b) for a, b in zip(sequence, sequence[1:])]


def measure(fw: ForwardingMatrix, t: Topology, network: str = "custom") -> MetricsRow:
    """Metrics for one forwarding configuration over one topology."""
    trees = all_shortest_trees(t)
    primary_ratios: list[float] = []
    backup_avgs: list[float] = []
    backup_mins: list[float] = []
    backup_maxs: list[float] = []
    crank_avgs: list[float] = []
    crank_maxs: list[float] = []
    uncovered = 0
    loops = 0
    for s in t.nodes:
        for d in t.nodes:
            if s == d:
                continue
            oracle = trees[s].dist.get(d)
            if oracle is None:
                uncovered += 1
                continue
            primary = simulate(fw, t, NO_FAILURE, s, d)
            if primary.outcome == LOOP:
                loops += 1
            if not primary.delivered:
                uncovered += 1
                continue
            primary_ratios.append(primary.total_weight / oracle)
            pair_ratios: list[float] = []
            pair_cranks: list[float] = []
            for scenario in _on_path_scenarios(fw.mode, primary.node_sequence):
                trace = simulate(fw, t, scenario, s, d)
                if trace.outcome == LOOP:
                    loops += 1
                if trace.delivered:
                    pair_ratios.append(trace.total_weight / oracle)
                    pair_cranks.append(trace.crankback_weight / oracle)
                else:
                    uncovered += 1
            if pair_ratios:
                backup_avgs.append(fmean(pair_ratios))
                backup_mins.append(min(pair_ratios))
                backup_maxs.append(max(pair_ratios))
                crank_avgs.append(fmean(pair_cranks))
                crank_maxs.append(max(pair_cranks))
    nan = float("nan")
    base = t.n * (t.n - 1)
    flow = fw.rule_count()
    return MetricsRow(
        network=network,
        variant=fw.mode,
        size=t.n,
        flow_entries=float(flow),
        group_fwd_entries=float(fw.group_forwarding_count()),
        distinct_groups=float(fw.distinct_group_count()),
        primary_ratio=fmean(primary_ratios) if primary_ratios else nan,
        backup_avg=fmean(backup_avgs) if backup_avgs else nan,
        backup_min=fmean(backup_mins) if backup_mins else nan,
        backup_max=fmean(backup_maxs) if backup_maxs else nan,
        crankback_avg=fmean(crank_avgs) if crank_avgs else nan,
        crankback_max=fmean(crank_maxs) if crank_maxs else nan,
        base_entries=float(base),
        extra_entries=float(flow - base),
        uncovered_cases=float(uncovered),
        loop_traces=float(loops),
    )


def build_variant(t: Topology, variant: str, optimized: bool = True) -> ForwardingMatrix:
    """Build one named configuration for ``t``."""
    if variant == "per-link":
        fw = per_link_rules(t)
    elif variant == "per-node":
        fw = per_node_rules(t)
    elif variant == "hybrid":
        fw = hybrid_rules(t)
    elif variant == "disjoint-link":
        return disjoint_rules(t, "link")
    elif variant == "disjoint-node":
        return disjoint_rules(t, "node")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return optimize(fw, t) if optimized else fw


_GENERATORS: dict[str, tuple[str, Callable[[int, int], Topology]]] = {
    "er": ("erdos-renyi", generate_erdos_renyi),
    "erdos-renyi": ("erdos-renyi", generate_erdos_renyi),
    "lattice": ("lattice", generate_lattice),
    "waxman": ("waxman", generate_waxman),
}


@dataclass
class ExperimentConfig:
    generator: str = "er"
    sizes: tuple[int, ...] = (9, 16, 25)
    runs: int = 10
    seed: int = 0
    variants: tuple[str, ...] = ALL_VARIANTS
    optimized: bool = True
    unweighted: bool = False
    jobs: int = 1

    def network_name(self) -> str:
        if self.generator not in _GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        return _GENERATORS[self.generator][0]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[MetricsRow] = field(default_factory=list)  # one per (size, run, variant)
    aggregates: list[MetricsRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def total_loop_traces(self) -> float:
        return sum(row.loop_traces for row in self.rows)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(row.csv_line() for row in self.aggregates)
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        def row_dict(row: MetricsRow) -> dict:
            return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                    for k, v in vars(row).items()}

        return {
            "config": vars(self.config) | {"sizes": list(self.config.sizes),
                                           "variants": list(self.config.variants)},
            "aggregates": [row_dict(r) for r in self.aggregates],
            "runs": [row_dict(r) for r in self.rows],
            "notes": self.notes,
        }


def _run_once(args) -> tuple[list[MetricsRow], list[str]]:
    config, network, size, run_idx, seed = args
    name, generator = _GENERATORS[config.generator]
    try:
        t = generator(size, seed)
    except GenerationError as exc:
        return [], [f"size={size} run={run_idx} skipped: {exc}"]
    if config.unweighted:
        t = unit_weights(t)
    rows = []
    for variant in config.variants:
        start = time.perf_counter()
        fw = build_variant(t, variant, optimized=config.optimized)
        elapsed = time.perf_counter() - start
        row = measure(fw, t, network=name)
        row.compute_seconds = elapsed
        rows.append(row)
    return rows, []


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Generate, build, simulate, and aggregate; deterministic per seed."""
    network = config.network_name()
    master = random.Random(config.seed)
    tasks = []
    for size in config.sizes:
        for run_idx in range(config.runs):
            tasks.append((config, network, size, run_idx, master.randrange(2**63)))
    if config.jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(config.jobs) as pool:
            results = pool.map(_run_once, tasks)
    else:
        results = [_run_once(task) for task in tasks]
    report = ExperimentReport(config)
    for rows, notes in results:
        report.rows.extend(rows)
        report.notes.extend(notes)
    report.aggregates = _aggregate(report.rows)
    return report


_NUMERIC_FIELDS = (
    "flow_entries",
    "group_fwd_entries",
    "distinct_groups",
    "primary_ratio",
    "backup_avg",
    "backup_min",
    "backup_max",
    "crankback_avg",
    "crankback_max",
    "base_entries",
    "extra_entries",
    "uncovered_cases",
    "loop_traces",
    "compute_seconds",
)


def _aggregate(rows: list[MetricsRow]) -> list[MetricsRow]:
    groups: dict[tuple[str, str, int], list[MetricsRow]] = {}
    for row in rows:
        groups.setdefault((row.network, row.variant, row.size), []).append(row)
    variant_order = {v: i for i, v in enumerate(ALL_VARIANTS)}
    out = []
    for key in sorted(groups, key=lambda k: (k[0], variant_order.get(k[1], 99), k[2])):
        bucket = groups[key]
        agg = replace(bucket[0])
        for name in _NUMERIC_FIELDS:
            values = [getattr(r, name) for r in bucket]
            clean = [v for v in values if not math.isnan(v)]
            setattr(agg, name, fmean(clean) if clean else float("nan"))
        out.append(agg)
    return out


def dumps_report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"

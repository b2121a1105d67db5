"""Command-line interface: generate, compute, simulate, evaluate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataplane import simulate
from .metrics import (
    ALL_VARIANTS,
    ExperimentConfig,
    build_variant,
    dumps_report_json,
    run_experiment,
)
from .rules import ForwardingMatrix
from .topology import (
    FailureScenario,
    load_topology,
    save_topology,
    generate_erdos_renyi,
    generate_lattice,
    generate_waxman,
    unit_weights,
)

_GENERATORS = {
    "er": generate_erdos_renyi,
    "lattice": generate_lattice,
    "waxman": generate_waxman,
}


def _parse_scenario(text: str) -> FailureScenario:
    if text == "none":
        return FailureScenario.none()
    kind, _, rest = text.partition(":")
    if kind == "link":
        u, v = rest.split("-")
        return FailureScenario.link_down(int(u), int(v))
    if kind == "node":
        return FailureScenario.node_down(int(rest))
    raise argparse.ArgumentTypeError(
        f"scenario must be 'none', 'link:U-V' or 'node:V', got {text!r}"
    )


def _cmd_generate(args) -> int:
    t = _GENERATORS[args.kind](args.nodes, args.seed)
    save_topology(t, args.out)
    print(f"wrote {args.out}: {t.n} nodes, {len(t.links)} links")
    return 0


def _cmd_compute(args) -> int:
    t = load_topology(args.topology)
    if args.unweighted:
        t = unit_weights(t)
    fw = build_variant(t, args.variant, optimized=not args.no_optimize)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(fw.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(
        f"wrote {args.out}: {fw.rule_count()} rules, "
        f"{fw.distinct_group_count()} groups, {len(fw.uncovered)} uncovered"
    )
    return 0


def _cmd_simulate(args) -> int:
    t = load_topology(args.topology)
    if args.unweighted:
        t = unit_weights(t)
    with open(args.matrix, "r", encoding="utf-8") as fh:
        fw = ForwardingMatrix.from_json(json.load(fh), t)
    trace = simulate(fw, t, args.scenario, args.src, args.dst)
    sys.stdout.write(trace.dump())
    return 0 if trace.delivered else 1


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _cmd_evaluate(args) -> int:
    settings = _read_config_file(args.config) if args.config else {}
    generator = args.generator or settings.get("generator", "er")
    sizes = args.sizes or settings.get("sizes", "9,16,25")
    runs = args.runs if args.runs is not None else int(settings.get("runs", "10"))
    seed = args.seed if args.seed is not None else int(settings.get("seed", "0"))
    variants = args.variants or settings.get("variants", ",".join(ALL_VARIANTS))
    config = ExperimentConfig(
        generator=generator,
        sizes=tuple(int(s) for s in str(sizes).split(",")),
        runs=runs,
        seed=seed,
        variants=tuple(v.strip() for v in str(variants).split(",")),
        optimized=not args.no_optimize,
        unweighted=args.unweighted or settings.get("unweighted", "") == "true",
        jobs=args.jobs,
    )
    report = run_experiment(config)
    csv_text = report.to_csv()
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.csv}")
    else:
        sys.stdout.write(csv_text)
    if args.json:
        Path(args.json).write_text(dumps_report_json(report), encoding="utf-8")
        print(f"wrote {args.json}")
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="failover",
        description="Failure-disjoint backup forwarding rules and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a topology file")
    p.add_argument("--kind", choices=sorted(_GENERATORS), required=True)
    p.add_argument("--nodes", "-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("compute", help="compute a forwarding matrix")
    p.add_argument("--topology", required=True)
    p.add_argument("--variant", choices=ALL_VARIANTS, required=True)
    p.add_argument("--no-optimize", action="store_true")
    p.add_argument("--unweighted", action="store_true",
                   help="treat every link weight as 1 (hop-count mode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compute)

    p = sub.add_parser("simulate", help="trace one packet under a failure")
    p.add_argument("--topology", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--scenario", type=_parse_scenario, default=FailureScenario.none())
    p.add_argument("--src", type=int, required=True)
    p.add_argument("--dst", type=int, required=True)
    p.add_argument("--unweighted", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="run the evaluation harness")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--generator", choices=sorted(_GENERATORS))
    p.add_argument("--sizes", help="comma-separated node counts")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--variants", help="comma-separated variant names")
    p.add_argument("--no-optimize", action="store_true")
    p.add_argument("--unweighted", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="CSV output path (default: stdout)")
    p.add_argument("--json", help="full JSON report path")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

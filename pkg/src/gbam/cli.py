"""Command-line interface: ``gbam validate|tables|run|compare``.

Exit codes: 0 success, 1 validation or equivalence failure, 2 usage or I/O
error.  Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys
from decimal import Decimal
from pathlib import Path

from .model import (
    InvalidConfig,
    alloctc_config,
    effective_max_allocation,
    mam_config,
    rdm_config,
    static_max_allocation,
)
from .metrics import export_csv, fold_trace, trace_meta
from .scenario_file import ScenarioFileError, load_scenario
from .sim import REFERENCE_BCS, REFERENCE_CAPACITY, make_engine, run, with_seed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_PAIRS = "gbam:mam=mam,gbam:rdm=rdm,gbam:alloctc=alloctc"


def mbps(kbps: int) -> str:
    return str((Decimal(kbps) / 1000).quantize(Decimal("0.01")))


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _table(headers, rows) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def config_table(cfg) -> str:
    rows = []
    for i, c in enumerate(cfg.classes):
        rows.append([f"CT{i}", c.bc, c.htl_cap, c.lth_cap, c.private,
                     static_max_allocation(cfg, i), effective_max_allocation(cfg, i)])
    return _table(["class", "bc_kbps", "htl_kbps", "lth_kbps", "private_kbps",
                   "max_n_kbps", "max_n_effective_kbps"], rows)


def _load(path):
    """Scenario plus its config, or an exit code after reporting the problem."""
    try:
        scenario = load_scenario(path)
    except OSError as exc:
        _err(f"error: cannot read {path}: {exc.strerror or exc}")
        return None, EXIT_USAGE
    except ScenarioFileError as exc:
        for p in exc.problems:
            _err(f"error: {p}")
        return None, EXIT_FAIL
    try:
        scenario.validate()
        scenario.config()
    except InvalidConfig as exc:
        for e in exc.errors:
            _err(f"error: {path}: {type(e).__name__}: {e.describe()}")
        return None, EXIT_FAIL
    except ValueError as exc:
        _err(f"error: {path}: {exc}")
        return None, EXIT_FAIL
    return scenario, EXIT_OK


# -- commands ------------------------------------------------------------------

def cmd_validate(args) -> int:
    scenario, code = _load(args.path)
    if scenario is None:
        return code
    cfg = scenario.config()
    print(f"{scenario.name}: valid ({scenario.factory}, capacity {cfg.capacity} kbps, "
          f"{cfg.n_classes} classes)")
    print(config_table(cfg))
    return EXIT_OK


def factory_tables() -> str:
    """The three factory configurations over the 40/35/25 % split of a
    622 Mbps link, with per-class loan sources and maximum allocation."""
    out = []
    bcs, cap = REFERENCE_BCS, REFERENCE_CAPACITY
    out.append(f"Bandwidth constraints (link {cap} kbps = {mbps(cap)} Mbps)")
    out.append(_table(["class", "bc_percent", "bc_kbps", "bc_Mbps"],
                      [[f"BC{i}", _pct(bc, cap), bc, mbps(bc)] for i, bc in enumerate(bcs)]))
    for title, factory in (("MAM", mam_config), ("RDM", rdm_config),
                           ("AllocTC-Sharing", alloctc_config)):
        cfg = factory(bcs, cap)
        n = cfg.n_classes
        out.append("")
        out.append(f"{title} configuration")
        out.append(_table(
            ["class", "htl_percent", "htl_kbps", "lth_percent", "lth_kbps", "private_kbps", "private_Mbps"],
            [[f"CT{i}", _pct(c.htl_cap, c.bc), c.htl_cap, _pct(c.lth_cap, c.bc), c.lth_cap,
              c.private, mbps(c.private)] for i, c in enumerate(cfg.classes)]))
        out.append("")
        out.append(f"{title} maximum bandwidth per class")
        headers = (["class", "bc_kbps"] + [f"htl_CT{j}" for j in range(n)] + ["htl_total"]
                   + [f"lth_CT{j}" for j in range(n)] + ["lth_total", "max_n_kbps", "max_n_Mbps"])
        rows = []
        for i, c in enumerate(cfg.classes):
            htl_src = [cfg.classes[j].htl_cap if j > i else 0 for j in range(n)]
            lth_src = [cfg.classes[j].lth_cap if j < i else 0 for j in range(n)]
            total = static_max_allocation(cfg, i)
            rows.append([f"CT{i}", c.bc, *htl_src, sum(htl_src), *lth_src, sum(lth_src),
                         total, mbps(total)])
        out.append(_table(headers, rows))
    return "\n".join(out) + "\n"


def _pct(part: int, whole: int) -> str:
    if whole == 0:
        return "0%"
    value = Decimal(part) * 100 / Decimal(whole)
    return f"{value.normalize():f}%"


def cmd_tables(args) -> int:
    sys.stdout.write(factory_tables())
    return EXIT_OK


def _print_summary(summary) -> None:
    rows = [[c, s.offered, s.admitted, s.blocked, f"{s.blocking_ratio:.4f}",
             f"{s.mean_load_kbps:.1f}", s.peak_load_kbps,
             f"{s.mean_htl_borrowed_kbps:.1f}", f"{s.mean_lth_borrowed_kbps:.1f}"]
            for c, s in enumerate(summary.classes)]
    print(_table(["class", "offered", "admitted", "blocked", "blocking", "mean_load_kbps",
                  "peak_load_kbps", "mean_htl_kbps", "mean_lth_kbps"], rows))
    print(f"link utilization {summary.link_utilization:.4f} over {summary.duration:.1f} s")


def cmd_run(args) -> int:
    scenario, code = _load(args.path)
    if scenario is None:
        return code
    if args.seed is not None:
        scenario = with_seed(scenario, args.seed)
    try:
        make_engine(args.engine, scenario)
    except (ValueError, InvalidConfig) as exc:
        _err(f"error: engine {args.engine!r}: {exc}")
        return EXIT_USAGE

    def check(engine, record):
        problems = engine.violations() if hasattr(engine, "violations") else []
        if problems:
            raise AssertionError(f"t={record.time}: " + "; ".join(problems))

    try:
        trace = run(scenario, args.engine, check=check if args.check else None)
    except AssertionError as exc:
        _err(f"internal error: allocator invariant violated: {exc}")
        return EXIT_FAIL
    series, summary = fold_trace(trace, warmup=args.warmup)
    out = Path(args.out) if args.out else Path(f"{scenario.name}-{args.engine.replace(':', '_')}-{scenario.seed}")
    try:
        export_csv(series, summary, out, trace_meta(trace))
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    print(f"{scenario.name} engine={args.engine} seed={scenario.seed} -> {out}")
    _print_summary(summary)
    return EXIT_OK


def _decisions(trace):
    return [(r.kind, r.lsp_id, r.admitted, r.shortfall) for r in trace.records]


def compare_runs(scenario, left: str, right: str, seed: int):
    """Run both engines on the same workload; first differing event or None."""
    a = run(scenario, left, seed=seed, loans=False)
    b = run(scenario, right, seed=seed, loans=False)
    da, db = _decisions(a), _decisions(b)
    for k, (x, y) in enumerate(zip(da, db)):
        if x != y:
            return k, a.records[k], b.records[k]
    if len(da) != len(db):
        k = min(len(da), len(db))
        return k, a.records[k] if k < len(da) else None, b.records[k] if k < len(db) else None
    return None


def _describe(rec) -> str:
    if rec is None:
        return "<no event>"
    what = "admitted" if rec.admitted else f"blocked (shortfall {rec.shortfall} kbps)"
    if rec.kind == "departure":
        what = "released"
    return (f"t={rec.time:.6f} {rec.kind} lsp={rec.lsp_id} class={rec.cls} "
            f"bw={rec.bandwidth} kbps -> {what}; totals={list(rec.totals)}")


def parse_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in item:
            raise ValueError(f"pair {item!r} must look like left=right")
        left, right = (s.strip() for s in item.split("=", 1))
        pairs.append((left, right))
    if not pairs:
        raise ValueError("no pairs given")
    return pairs


def cmd_compare(args) -> int:
    scenario, code = _load(args.path)
    if scenario is None:
        return code
    try:
        pairs = parse_pairs(args.pairs)
        for left, right in pairs:
            make_engine(left, scenario)
            make_engine(right, scenario)
    except (ValueError, InvalidConfig) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    if args.seeds < 0:
        _err("error: --seeds must be >= 0")
        return EXIT_USAGE
    if args.seeds == 0:
        print("no runs")
        return EXIT_OK
    base = scenario.seed if args.seed is None else args.seed
    failed = False
    for left, right in pairs:
        bad = None
        for k in range(args.seeds):
            seed = base + k
            hit = compare_runs(scenario, left, right, seed)
            if hit is not None:
                bad = (seed, hit)
                break
        if bad is None:
            print(f"{left}={right}: equivalent over {args.seeds} seeds")
            continue
        failed = True
        seed, (index, ra, rb) = bad
        print(f"{left}={right}: DIVERGENT at seed {seed}, event {index}")
        print(f"  {left}: {_describe(ra)}")
        print(f"  {right}: {_describe(rb)}")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gbam", description="Generalized bandwidth allocation model tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and print its derived bounds")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tables", help="print the MAM/RDM/AllocTC factory tables for a 622 Mbps link")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("run", help="simulate a scenario and write CSV metrics")
    p.add_argument("path")
    p.add_argument("--engine", default="gbam",
                   help="gbam, gbam:<mam|rdm|alloctc|grdm>, mam, rdm or alloctc (default: gbam)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", help="output directory (default: <name>-<engine>-<seed>)")
    p.add_argument("--warmup", type=float, default=0.0, help="seconds excluded from time averages")
    p.add_argument("--check", action="store_true", help="verify allocator invariants after every event")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="diff admission decisions of engine pairs on identical workloads")
    p.add_argument("path")
    p.add_argument("--pairs", default=DEFAULT_PAIRS, help=f"comma-separated left=right (default: {DEFAULT_PAIRS})")
    p.add_argument("--seeds", type=int, default=20, help="number of consecutive seeds (default: 20)")
    p.add_argument("--seed", type=int, help="first seed (default: the scenario seed)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

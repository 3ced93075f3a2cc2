"""Command line interface.

Exit codes: 0 ok, 1 infeasible (SOC does not fit the ATE), 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources

from . import __version__
from .analysis import (
    BENCH_COLUMNS,
    bench_table,
    compare_upgrades,
    parse_depth,
    parse_sweep,
    read_expected,
    sweep,
)
from .architecture import InfeasibleError, optimize_step2
from .soc_model import AteSpec, SocFormatError, import_itc02, parse_soc
from .throughput import ThroughputParams

HEADER = f"# multisite {__version__}"
REFERENCE_DEPTHS = "48K,56K,64K,72K,80K,88K,96K,104K,112K,120K,128K"


class InputError(Exception):
    pass


def _read_soc(path: str, fmt: str):
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        try:
            text = resources.files("multisite.data").joinpath(f"{name}.soc").read_text(encoding="utf-8")
        except FileNotFoundError:
            raise InputError(f"no built-in SOC named {name!r}") from None
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return import_itc02(text) if fmt == "itc02" else parse_soc(text)
    except SocFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _ate(args, depth_required=True) -> AteSpec:
    if args.channels is None:
        raise InputError("--channels is required")
    depth = 1
    if depth_required:
        if args.depth is None:
            raise InputError("--depth is required")
        depth = parse_depth(args.depth, args.depth_base)
    return AteSpec(args.channels, depth, args.freq, args.index_time, args.contact_time)


def _params(args) -> ThroughputParams:
    return ThroughputParams(args.pc, args.pm, args.broadcast, args.abort_on_fail, args.retest)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps({"tool": f"multisite {__version__}", **obj}, indent=2, sort_keys=True) + "\n"


def _fmt(x, spec=".6g"):
    return format(x, spec) if isinstance(x, float) else str(x)


def _text_table(columns, rows) -> str:
    cells = [[str(c) for c in columns]] + [[_fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------

CURVE_COLUMNS = ("n", "k", "w", "T", "t_m", "t_a", "P_c", "P_m", "D_th", "D_th_unique", "is_opt")


def cmd_optimize(args) -> str:
    soc = _read_soc(args.soc, args.input_format)
    ate, params = _ate(args), _params(args)
    res = optimize_step2(soc, ate, params)
    doc = res.to_dict()
    if args.oracle:
        from .oracle import OracleCapError, brute_force_fit

        try:
            ref = brute_force_fit(soc, ate)
        except OracleCapError as exc:
            raise InputError(f"--oracle: {exc}") from None
        doc["oracle"] = {**ref.to_dict(), "k_match": ref.k == res.base.k}

    if args.format == "json":
        return _json(doc)
    rows = [{**p.to_row(), "is_opt": int(p.n == res.n_opt)} for p in res.curve]
    if args.format == "csv":
        return _csv(CURVE_COLUMNS, rows)

    base = res.base
    out = [
        HEADER,
        f"SOC {soc.name}: {len(soc.modules)} modules; ATE N={ate.channels} V={ate.depth}"
        f" f={ate.freq:g} Hz; broadcast={'yes' if params.broadcast else 'no'}",
        "",
        f"Step 1: k={base.k} channels per site, E-RPCT {base.k // 2}-to-{base.w_total}, T={base.T} cycles,"
        f" n_max={res.n_max}",
        _text_table(("width", "tam_width", "depth", "members"),
                    [{"width": g.width, "tam_width": g.tam_width, "depth": g.depth,
                      "members": " ".join(g.members)} for g in base.groups]),
        f"Step 2: n_opt={res.n_opt}  D_th={res.best.D_th:.1f}/h  D_th_unique={res.best.D_th_unique:.1f}/h"
        f"  k={res.best.k}  T={res.best.T}  t_m={res.best.t_m:.6g} s  t_a={res.best.t_a:.6g} s"
        f"  P_c={res.best.P_c:.6g}  P_m={res.best.P_m:.6g}",
        "",
        _text_table(CURVE_COLUMNS, rows),
    ]
    if args.oracle:
        o = doc["oracle"]
        out.append(f"oracle: k={o['k']} T={o['T']} heuristic k {'matches' if o['k_match'] else 'differs'}")
    return "\n".join(out).rstrip("\n") + "\n"


def cmd_sweep(args) -> str:
    soc = _read_soc(args.soc, args.input_format)
    if not args.sweep:
        raise InputError("--sweep param:from:to:step is required")
    spec = parse_sweep(args.sweep, args.depth_base)
    sites = tuple(int(s) for s in args.sites.split(",") if s.strip())
    if not sites or min(sites) < 1:
        raise InputError("--sites needs positive site counts")
    columns, rows = sweep(soc, _ate(args), _params(args), spec, sites)
    if args.format == "json":
        return _json({"param": spec.param, "rows": rows})
    if args.format == "csv":
        return _csv(columns, rows)
    return HEADER + "\n" + _text_table(columns, rows)


def cmd_bench_table(args) -> str:
    socs = [_read_soc(p, args.input_format) for p in args.soc]
    depths = [parse_depth(d, args.depth_base) for d in args.depths.split(",") if d.strip()]
    if not depths:
        raise InputError("empty depth list")
    expected = None
    if args.expected:
        try:
            with open(args.expected, encoding="utf-8") as fh:
                expected = read_expected(fh.read(), args.depth_base)
        except OSError as exc:
            raise InputError(f"cannot read {args.expected}: {exc.strerror}") from None
        except (KeyError, ValueError) as exc:
            raise InputError(f"{args.expected}: bad reference table ({exc})") from None
    if args.channels is None:
        raise InputError("--channels is required")
    rows = bench_table(socs, depths, args.channels, expected)
    if args.format == "json":
        return _json({"channels": args.channels, "broadcast": True, "rows": rows})
    if args.format == "csv":
        return _csv(BENCH_COLUMNS, rows)
    return HEADER + "\n" + _text_table(BENCH_COLUMNS, rows)


def cmd_compare_upgrades(args) -> str:
    soc = _read_soc(args.soc, args.input_format)
    rep = compare_upgrades(soc, _ate(args), _params(args), args.channel_block_cost,
                           args.memory_upgrade_cost, args.budget)
    if args.format == "json":
        return _json(rep)
    rows = [
        {"scenario": "baseline", "D_th": rep["baseline"]["D_th"], "gain": 0.0, "gain_pct": 0.0,
         "spent": 0.0, "gain_per_currency": 0.0},
    ] + [
        {"scenario": name, **{c: rep[name][c] for c in ("D_th", "gain", "gain_pct", "spent", "gain_per_currency")}}
        for name in ("channels", "memory")
    ]
    cols = ("scenario", "D_th", "gain", "gain_pct", "spent", "gain_per_currency")
    if args.format == "csv":
        return _csv(cols, rows)
    mem = rep["memory"]
    return (
        f"{HEADER}\nbudget {rep['budget']:g}: {rep['channels']['blocks']} channel blocks -> N="
        f"{rep['channels']['channels']}; memory upgrade affordable fraction {mem['affordable_fraction']:.3g}"
        f" (full upgrade {mem['full_upgrade_cost']:g}, D_th {mem['full_upgrade_D_th']:.1f}/h)\n"
        + _text_table(cols, rows)
        + f"preferred: {rep['preferred']}\n"
    )


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("ATE and model")
    g.add_argument("--channels", type=int, help="ATE channels N")
    g.add_argument("--depth", help="vector memory depth V per channel (accepts K/M suffix)")
    g.add_argument("--freq", type=float, default=5e6, help="test clock in Hz (default 5e6)")
    g.add_argument("--index-time", type=float, default=0.7, help="prober index time in s")
    g.add_argument("--contact-time", type=float, default=0.01, help="contact test time in s")
    g.add_argument("--pc", type=float, default=1.0, help="per-pad contact yield")
    g.add_argument("--pm", type=float, default=1.0, help="manufacturing yield")
    g.add_argument("--broadcast", action="store_true", help="stimuli broadcast to all sites")
    g.add_argument("--abort-on-fail", action="store_true")
    g.add_argument("--retest", action="store_true", help="maximize unique-device throughput")
    g.add_argument("--decimal-units", dest="depth_base", action="store_const", const=1000, default=1024,
                   help="read K/M depth suffixes as 1000/1000^2 instead of 1024/1024^2")
    g.add_argument("--format", choices=("text", "csv", "json"), help="default: csv for sweep, else text")
    g.add_argument("--input-format", choices=("native", "itc02"), default="native",
                   help="SOC file syntax")

    p = argparse.ArgumentParser(prog="multisite", description="Test infrastructure design for multi-site wafer test.")
    p.add_argument("--version", action="version", version=f"multisite {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("optimize", parents=[common], help="design DfT and pick the site count")
    s.add_argument("soc", help="SOC file, or builtin:d695")
    s.add_argument("--oracle", action="store_true", help="cross-check Step 1 by brute force (tiny SOCs)")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("sweep", parents=[common], help="vary one parameter, CSV per value")
    s.add_argument("soc")
    s.add_argument("--sweep", help="param:from:to:step, param in channels|depth|p_c|p_m|sites")
    s.add_argument("--sites", default="1,2,5,10,20", help="site counts for t_eff columns of p_m sweeps")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bench-table", parents=[common], help="Step-1 channels and n_max with broadcast")
    s.add_argument("soc", nargs="+")
    s.add_argument("--depths", default=REFERENCE_DEPTHS, help="comma-separated depth list")
    s.add_argument("--expected", help="reference CSV soc,depth,k,n_max")
    s.set_defaults(func=cmd_bench_table)

    s = sub.add_parser("compare-upgrades", parents=[common], help="extra channels vs. doubled memory")
    s.add_argument("soc")
    s.add_argument("--channel-block-cost", type=float, default=8000.0, help="price of 16 channels")
    s.add_argument("--memory-upgrade-cost", type=float, default=1500.0,
                   help="price of doubling memory on 16 channels")
    s.add_argument("--budget", type=float, help="default: cost of upgrading all memory")
    s.set_defaults(func=cmd_compare_upgrades)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "text"
    try:
        out = args.func(args)
    except InfeasibleError as exc:
        print(f"multisite: {exc}", file=sys.stderr)
        return 1
    except (InputError, ValueError) as exc:
        print(f"multisite: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

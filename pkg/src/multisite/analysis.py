"""Parameter sweeps, benchmark tables and the ATE upgrade comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation

from .architecture import InfeasibleError, fit_step1, max_sites, optimize_step2
from .soc_model import AteSpec, SocDescription
from .throughput import ThroughputParams, contact_pass, manuf_pass

SWEEP_PARAMS = ("channels", "depth", "p_c", "p_m", "sites")
CHANNEL_BLOCK = 16

_UNITS = {"K": 1, "M": 2}


def parse_depth(text: str, base: int = 1024) -> int:
    """Parse a depth like ``65536``, ``64K`` or ``1.256M``.

    ``K`` and ``M`` are ``base`` and ``base**2``.
    """
    s = text.strip()
    scale = 1
    if s and s[-1].upper() in _UNITS:
        scale = base ** _UNITS[s[-1].upper()]
        s = s[:-1]
    try:
        value = Decimal(s) * scale
    except InvalidOperation:
        raise ValueError(f"bad depth {text!r}") from None
    if value != value.to_integral_value() or value <= 0:
        raise ValueError(f"depth {text!r} is not a positive whole number of vectors")
    return int(value)


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: Decimal
    stop: Decimal
    step: Decimal

    def values(self) -> list[Decimal]:
        out, v = [], self.start
        while v <= self.stop:
            out.append(v)
            v += self.step
        return out


def parse_sweep(text: str, depth_base: int = 1024) -> SweepSpec:
    """Parse ``param:from:to:step``."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"sweep must be param:from:to:step, got {text!r}")
    param = parts[0].strip().lower().replace("-", "_")
    aliases = {"pc": "p_c", "pm": "p_m", "n": "sites"}
    param = aliases.get(param, param)
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {parts[0]!r}; choose from {', '.join(SWEEP_PARAMS)}")
    try:
        if param == "depth":
            start, stop, step = (Decimal(parse_depth(p, depth_base)) for p in parts[1:])
        else:
            start, stop, step = (Decimal(p.strip()) for p in parts[1:])
    except (InvalidOperation, ValueError):
        raise ValueError(f"bad sweep bounds in {text!r}") from None
    if step <= 0:
        raise ValueError("sweep step must be positive")
    if start <= 0 or start > stop:
        raise ValueError("sweep bounds must be positive with from <= to")
    if param in ("channels", "depth", "sites") and any(x != x.to_integral_value() for x in (start, stop, step)):
        raise ValueError(f"{param} sweep needs whole numbers")
    return SweepSpec(param, start, stop, step)


SWEEP_COLUMNS = (
    "value", "feasible", "n_max", "n_opt", "n", "k", "w", "T",
    "t_m", "t_a", "P_c", "P_m", "D_th", "D_th_unique", "D_th_step1",
)


def sweep(soc: SocDescription, ate: AteSpec, params: ThroughputParams, spec: SweepSpec,
          sites=(1, 2, 5, 10, 20)) -> tuple[list[str], list[dict]]:
    """One row per swept value, describing the best plan (or plan at ``n`` for a sites sweep).

    A ``p_m`` sweep with abort-on-fail adds ``t_eff_n<n>`` columns: the
    expected manufacturing-test time ``P_c * P_m * t_m`` of the Step-1
    architecture at each listed site count.
    """
    columns = list(SWEEP_COLUMNS)
    with_teff = spec.param == "p_m" and params.abort_on_fail
    if with_teff:
        columns += [f"t_eff_n{n}" for n in sites]

    result_cache = None
    rows = []
    for v in spec.values():
        row = dict.fromkeys(columns, "")
        row["value"] = int(v) if spec.param in ("channels", "depth", "sites") else float(v)
        a, p = ate, params
        if spec.param == "channels":
            a = replace(ate, channels=int(v))
        elif spec.param == "depth":
            a = replace(ate, depth=int(v))
        elif spec.param == "p_c":
            p = replace(params, p_c=float(v))
        elif spec.param == "p_m":
            p = replace(params, p_m=float(v))
        try:
            if spec.param == "sites" and result_cache is not None:
                res = result_cache
            else:
                res = optimize_step2(soc, a, p)
                result_cache = res
        except (InfeasibleError, ValueError):
            row["feasible"] = 0
            rows.append(row)
            continue
        if spec.param == "sites":
            if int(v) > res.n_max:
                row.update(feasible=0, n_max=res.n_max, n_opt=res.n_opt)
                rows.append(row)
                continue
            plan = res.plan(int(v))
        else:
            plan = res.best
        row.update(feasible=1, n_max=res.n_max, n_opt=res.n_opt, **plan.to_row())
        row["D_th_step1"] = res.step1.D_th
        if with_teff:
            base = res.base
            t_m = base.T / a.freq
            for n in sites:
                row[f"t_eff_n{n}"] = contact_pass(p.p_c, base.k, n) * manuf_pass(p.p_m, n) * t_m
        rows.append(row)
    return columns, rows


BENCH_COLUMNS = ("soc", "depth", "k", "n_max", "T", "expected_k", "expected_n_max", "delta_k")


def bench_table(socs: list[SocDescription], depths: list[int], channels: int,
                expected: dict | None = None) -> list[dict]:
    """Step 1 only, with stimuli broadcast: channels per SOC and maximum multi-site."""
    if not depths:
        raise ValueError("no depths given")
    rows = []
    for soc in socs:
        for V in depths:
            row = dict.fromkeys(BENCH_COLUMNS, "")
            row.update(soc=soc.name, depth=V)
            try:
                arch = fit_step1(soc, AteSpec(channels, V))
                row.update(k=arch.k, n_max=max_sites(arch.k, channels, True), T=arch.T)
            except (InfeasibleError, ValueError):
                pass
            ref = (expected or {}).get((soc.name, V))
            if ref is not None:
                row["expected_k"], row["expected_n_max"] = ref
                if row["k"] != "":
                    row["delta_k"] = row["k"] - ref[0]
            rows.append(row)
    return rows


def read_expected(text: str, depth_base: int = 1024) -> dict:
    """Reference table: CSV with columns ``soc,depth,k,n_max`` (depth may use K/M)."""
    import csv
    import io

    out = {}
    for rec in csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")):
        out[(rec["soc"].strip(), parse_depth(rec["depth"], depth_base))] = (int(rec["k"]), int(rec["n_max"]))
    return out


def compare_upgrades(soc: SocDescription, ate: AteSpec, params: ThroughputParams,
                     channel_block_cost: float = 8000.0, memory_upgrade_cost: float = 1500.0,
                     budget: float | None = None) -> dict:
    """Throughput gained by spending ``budget`` on extra channels vs. doubled memory.

    Channels are bought in blocks of 16 at ``channel_block_cost``. Doubling
    the depth costs ``memory_upgrade_cost`` per 16 channels and only takes
    effect once the whole ATE is upgraded; a partial budget reports the
    affordable fraction and the full-upgrade throughput but gains nothing.
    ``budget`` defaults to the price of the full memory upgrade.
    """
    if channel_block_cost <= 0 or memory_upgrade_cost <= 0:
        raise ValueError("costs must be positive")
    blocks_total = math.ceil(ate.channels / CHANNEL_BLOCK)
    if budget is None:
        budget = blocks_total * memory_upgrade_cost
    if budget < 0:
        raise ValueError("budget must not be negative")

    def best(a: AteSpec) -> float:
        res = optimize_step2(soc, a, params)
        return res.best.D_th_unique if params.retest else res.best.D_th

    base = best(ate)

    blocks = int(budget // channel_block_cost)
    ch_ate = replace(ate, channels=ate.channels + CHANNEL_BLOCK * blocks)
    ch_spent = blocks * channel_block_cost
    ch_D = best(ch_ate) if blocks else base

    affordable = min(blocks_total, int(budget // memory_upgrade_cost))
    full = affordable == blocks_total
    mem_full_D = best(replace(ate, depth=2 * ate.depth))
    mem_D = mem_full_D if full else base
    mem_spent = blocks_total * memory_upgrade_cost if full else 0.0

    def scenario(D, spent, **extra):
        gain = D - base
        return {
            "D_th": D,
            "gain": gain,
            "gain_pct": 100.0 * gain / base if base else 0.0,
            "spent": spent,
            "gain_per_currency": gain / spent if spent else 0.0,
            **extra,
        }

    channels = scenario(ch_D, ch_spent, blocks=blocks, channels=ch_ate.channels)
    memory = scenario(mem_D, mem_spent, depth=2 * ate.depth if full else ate.depth,
                      affordable_fraction=affordable / blocks_total, full_upgrade_D_th=mem_full_D,
                      full_upgrade_cost=blocks_total * memory_upgrade_cost)
    if channels["gain_per_currency"] > memory["gain_per_currency"]:
        preferred = "channels"
    elif memory["gain_per_currency"] > channels["gain_per_currency"]:
        preferred = "memory"
    else:
        preferred = "none"
    return {
        "budget": float(budget),
        "baseline": {"D_th": base, "channels": ate.channels, "depth": ate.depth},
        "channels": channels,
        "memory": memory,
        "preferred": preferred,
    }

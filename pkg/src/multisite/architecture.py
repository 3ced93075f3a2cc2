"""Test architecture design (channel groups) and site-count optimization.

Step 1 packs the modules into channel groups using as few ATE channels as
possible while every group's filled depth stays within the vector memory.
Step 2 walks the site count down from the maximum and spends the channels
freed by each dropped site on the deepest channel group.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .soc_model import AteSpec, ModuleSpec, SocDescription
from .throughput import (
    ThroughputParams,
    contact_pass,
    manuf_pass,
    test_application_time,
    throughput,
    unique_throughput,
)
from .wrapper import best_test_time, min_channels


class InfeasibleError(Exception):
    """The SOC cannot be tested on the target ATE."""

    def __init__(self, reason: str, module: str | None = None):
        self.reason = reason
        self.module = module
        super().__init__(f"the SOC cannot be tested on the target ATE: {reason}")


@dataclass(frozen=True)
class ChannelGroup:
    width: int
    members: tuple[str, ...]
    depth: int

    @property
    def tam_width(self) -> int:
        return self.width // 2


@dataclass(frozen=True)
class Architecture:
    groups: tuple[ChannelGroup, ...]

    @property
    def k(self) -> int:
        return sum(g.width for g in self.groups)

    @property
    def T(self) -> int:
        return max(g.depth for g in self.groups)

    @property
    def w_total(self) -> int:
        return self.k // 2

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "w": self.w_total,
            "T": self.T,
            "groups": [
                {"width": g.width, "tam_width": g.tam_width, "members": list(g.members), "depth": g.depth}
                for g in self.groups
            ],
        }


def group_depth(members, width: int) -> int:
    """Filled vector memory of a channel group: its modules run one after another."""
    return sum(best_test_time(m, width // 2) for m in members)


def _free_memory(groups, V: int) -> int:
    # free vectors summed over every used channel
    return sum(width * (V - group_depth(members, width)) for width, members in groups)


def _freeze(groups) -> Architecture:
    return Architecture(
        tuple(
            ChannelGroup(width, tuple(m.name for m in members), group_depth(members, width))
            for width, members in groups
        )
    )


def fit_step1(soc: SocDescription, ate: AteSpec) -> Architecture:
    """Fit the SOC test on the ATE with minimum channels, then minimum memory filling."""
    N, V = ate.channels, ate.depth
    kmin: dict[str, int] = {}
    for m in soc.modules:
        k = min_channels(m, ate)
        if k is None:
            raise InfeasibleError(f"module {m.name} does not fit in {V} vectors at any width", m.name)
        kmin[m.name] = k

    order = sorted(soc.modules, key=lambda m: (-kmin[m.name], -m.test_bits, m.name))
    groups: list[tuple[int, list[ModuleSpec]]] = []
    for m in order:
        if not groups:
            groups.append((kmin[m.name], [m]))
            continue

        admitting = []
        for idx, (width, members) in enumerate(groups):
            d = group_depth(members + [m], width)
            if d <= V:
                admitting.append((d, idx))
        if admitting:
            _, idx = min(admitting)
            groups[idx][1].append(m)
            continue

        used = sum(width for width, _ in groups)
        options = []
        if used + kmin[m.name] <= N:
            options.append(groups + [(kmin[m.name], [m])])
        for idx, (width, members) in enumerate(groups):
            delta = 2
            while used + delta <= N:
                if group_depth(members + [m], width + delta) <= V:
                    widened = list(groups)
                    widened[idx] = (width + delta, members + [m])
                    options.append(widened)
                    break
                delta += 2
        if not options:
            raise InfeasibleError(f"module {m.name} needs more than the {N} available channels", m.name)
        groups = _pick(options, V)
    return _freeze(groups)


def _pick(options, V: int):
    # fewest channels first, then most free memory; earliest option on ties
    def key(item):
        idx, opt = item
        return (sum(w for w, _ in opt), -_free_memory(opt, V), idx)

    return min(enumerate(options), key=key)[1]


def max_sites(k: int, N: int, broadcast: bool) -> int:
    """Most sites the channel budget allows for ``k`` channels per site."""
    if k < 1:
        raise ValueError("k must be positive")
    n = (2 * N) // k - 1 if broadcast else N // k
    if n < 1:
        raise ValueError(f"{k} channels per site do not fit even one site on {N} channels")
    return n


def channels_used(n: int, k: int, broadcast: bool) -> int:
    """ATE channels occupied by ``n`` sites of ``k`` channels each."""
    return (n + 1) * k // 2 if broadcast else n * k


@dataclass(frozen=True)
class SitePlan:
    n: int
    arch: Architecture
    t_m: float
    t_a: float
    D_th: float
    D_th_unique: float
    P_c: float
    P_m: float

    @property
    def k(self) -> int:
        return self.arch.k

    @property
    def T(self) -> int:
        return self.arch.T

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "w": self.arch.w_total,
            "T": self.T,
            "t_m": self.t_m,
            "t_a": self.t_a,
            "P_c": self.P_c,
            "P_m": self.P_m,
            "D_th": self.D_th,
            "D_th_unique": self.D_th_unique,
        }


@dataclass(frozen=True)
class OptimizationResult:
    base: Architecture
    n_max: int
    n_opt: int
    curve: tuple[SitePlan, ...]
    best: SitePlan

    def plan(self, n: int) -> SitePlan:
        for p in self.curve:
            if p.n == n:
                return p
        raise KeyError(n)

    @property
    def step1(self) -> SitePlan:
        """Plan at n_max with the unmodified Step-1 architecture."""
        return self.curve[0]

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "n_opt": self.n_opt,
            "base": self.base.to_dict(),
            "best": {**self.best.to_row(), "architecture": self.best.arch.to_dict()},
            "curve": [p.to_row() for p in self.curve],
        }


def evaluate_plan(n: int, arch: Architecture, ate: AteSpec, params: ThroughputParams) -> SitePlan:
    t_m = arch.T / ate.freq
    P_c = contact_pass(params.p_c, arch.k, n)
    P_m = manuf_pass(params.p_m, n)
    t_a = test_application_time(ate.contact_time, t_m, P_c, P_m, params.abort_on_fail)
    D_th = throughput(n, ate.index_time, t_a)
    D_u = unique_throughput(params.p_c, arch.k, D_th)
    return SitePlan(n, arch, t_m, t_a, D_th, D_u, P_c, P_m)


def redistribute(base: Architecture, soc: SocDescription, n: int, N: int, broadcast: bool) -> Architecture:
    """Spend the channels left over at ``n`` sites on the deepest channel groups, one TAM wire at a time."""
    k_free = N - channels_used(n, base.k, broadcast)
    cost = n + 1 if broadcast else 2 * n
    groups = list(base.groups)
    while k_free > cost:
        idx = max(range(len(groups)), key=lambda i: (groups[i].depth, -i))
        g = groups[idx]
        members = [soc.module(name) for name in g.members]
        groups[idx] = replace(g, width=g.width + 2, depth=group_depth(members, g.width + 2))
        k_free -= cost
    return Architecture(tuple(groups))


def optimize_step2(soc: SocDescription, ate: AteSpec, params: ThroughputParams) -> OptimizationResult:
    """Find the site count with maximum throughput, redistributing freed channels."""
    base = fit_step1(soc, ate)
    n_max = max_sites(base.k, ate.channels, params.broadcast)
    curve = []
    for n in range(n_max, 0, -1):
        arch = redistribute(base, soc, n, ate.channels, params.broadcast)
        curve.append(evaluate_plan(n, arch, ate, params))
    metric = (lambda p: p.D_th_unique) if params.retest else (lambda p: p.D_th)
    best = max(curve, key=lambda p: (metric(p), p.n))
    return OptimizationResult(base, n_max, best.n, tuple(curve), best)

"""Exhaustive reference solvers for tiny instances.

These certify the heuristics in :mod:`multisite.wrapper` and
:mod:`multisite.architecture`. They refuse inputs beyond hard caps rather
than run for hours.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .architecture import Architecture, ChannelGroup, InfeasibleError
from .soc_model import AteSpec, ModuleSpec, SocDescription
from .wrapper import scan_test_time

MAX_SCAN_CHAINS = 5
MAX_CELLS = 8
MAX_WIDTH = 6
MAX_MODULES = 4
MAX_CHANNELS = 12


class OracleCapError(ValueError):
    pass


def _compositions(total: int, parts: int):
    """All ways to put ``total`` identical cells onto ``parts`` chains."""
    for cuts in itertools.combinations_with_replacement(range(total + 1), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def _min_longest(loads: tuple[int, ...], cells: int) -> int:
    return min(max(l + c for l, c in zip(loads, comp)) for comp in _compositions(cells, len(loads)))


@lru_cache(maxsize=None)
def exhaustive_wrapper(m: ModuleSpec, w: int) -> int:
    """Minimum test time of ``m`` over every wrapper with ``w`` chains."""
    if w < 1:
        raise ValueError("w must be >= 1")
    if m.scan_chains > MAX_SCAN_CHAINS or m.inputs + m.outputs + 2 * m.bidirs > MAX_CELLS or w > MAX_WIDTH:
        raise OracleCapError(f"module {m.name} or width {w} exceeds exhaustive-wrapper caps")
    best = None
    # test time is non-decreasing in both si and so, so each side is minimized on its own
    for assign in itertools.product(range(w), repeat=m.scan_chains):
        loads = [0] * w
        for j, chain in enumerate(assign):
            loads[chain] += m.scan_lengths[j]
        loads = tuple(loads)
        si = _min_longest(loads, m.in_cells)
        so = _min_longest(loads, m.out_cells)
        t = scan_test_time(si, so, m.patterns)
        if best is None or t < best:
            best = t
    return best


def _partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def brute_force_fit(soc: SocDescription, ate: AteSpec) -> Architecture:
    """Lexicographic optimum (fewest channels, then smallest T) over all groupings and widths."""
    N, V = ate.channels, ate.depth
    if len(soc.modules) > MAX_MODULES or N > MAX_CHANNELS:
        raise OracleCapError("instance exceeds brute-force caps")

    def depth(block, width):
        return sum(exhaustive_wrapper(m, width // 2) for m in block)

    best_key, best_arch = None, None
    for part in _partitions(list(soc.modules)):
        # cheapest feasible width per block bounds the search
        widths = []
        for block in part:
            widths.append([w for w in range(2, N + 1, 2) if depth(block, w) <= V])
            if not widths[-1]:
                break
        else:
            for combo in itertools.product(*widths):
                k = sum(combo)
                if k > N:
                    continue
                T = max(depth(b, w) for b, w in zip(part, combo))
                if best_key is None or (k, T) < best_key:
                    groups = sorted(
                        (
                            ChannelGroup(w, tuple(sorted(m.name for m in b)), depth(b, w))
                            for b, w in zip(part, combo)
                        ),
                        key=lambda g: (-g.width, g.members),
                    )
                    best_key, best_arch = (k, T), Architecture(tuple(groups))
    if best_arch is None:
        raise InfeasibleError("no grouping fits the vector memory within the channel budget")
    return best_arch

"""Closed-form multi-site test time and throughput model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


class ModelValidityWarning(UserWarning):
    """Re-test model used where several failing contacts per die are likely."""


@dataclass(frozen=True)
class ThroughputParams:
    p_c: float = 1.0
    p_m: float = 1.0
    broadcast: bool = False
    abort_on_fail: bool = False
    retest: bool = False

    def __post_init__(self):
        for label in ("p_c", "p_m"):
            v = getattr(self, label)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{label} must lie in [0, 1], got {v}")


def _at_least_one(log_fail_one: float, n: int) -> float:
    # 1 - fail_one**n from log(fail_one), exact-ish for tiny and near-one results
    return -math.expm1(n * log_fail_one)


def contact_pass(p_c: float, k: int, n: int) -> float:
    """Probability that at least one of ``n`` dies with ``k`` probed pads passes contact test."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if p_c <= 0.0:
        return 0.0
    if p_c >= 1.0:
        return 1.0
    log_pass_one = k * math.log(p_c)
    pass_one = math.exp(log_pass_one)
    if pass_one < 0.5:
        log_fail_one = math.log1p(-pass_one)
    else:
        log_fail_one = math.log(-math.expm1(log_pass_one))
    return _at_least_one(log_fail_one, n)


def manuf_pass(p_m: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if p_m >= 1.0:
        return 1.0
    return _at_least_one(math.log1p(-p_m), n)


def test_application_time(t_c: float, t_m: float, P_c: float, P_m: float, abort_on_fail: bool) -> float:
    """Test application time; with abort-on-fail this is the lower bound where failing dies cost no ``t_m``."""
    if abort_on_fail:
        return t_c + P_c * P_m * t_m
    return t_c + t_m


test_application_time.__test__ = False


def throughput(n: int, t_i: float, t_a: float) -> float:
    """Devices tested per hour."""
    total = t_i + t_a
    if not total > 0:
        raise ValueError("index time plus test time must be positive")
    return 3600.0 * n / total


def unique_throughput(p_c: float, k: int, D_th: float) -> float:
    """Unique devices per hour when contact-test failures are re-tested once."""
    retest_rate = (1.0 - p_c) * k
    if retest_rate > 0.5:
        warnings.warn(
            f"re-test rate (1-p_c)*k = {retest_rate:.3g}: single-failing-contact assumption is weak",
            ModelValidityWarning,
            stacklevel=2,
        )
    return max(0.0, 1.0 - retest_rate) * D_th

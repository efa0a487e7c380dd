"""Parameter validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from typing import Any

from .candidates import FILTER_NAMES

RANK_MODES = ("strict", "relaxed")


def check_unit_interval(name: str, value: Any) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0,1], got {value}")
    return value


def check_positive_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or int(value) != value or int(value) < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_rank_mode(value: Any) -> str:
    if value not in RANK_MODES:
        raise ValueError(f"rank_mode must be one of {RANK_MODES}, got {value!r}")
    return value


def check_filter_order(value: Any) -> tuple[str, ...]:
    order = tuple(value)
    if sorted(order) != sorted(FILTER_NAMES):
        raise ValueError(f"filter_order must be a permutation of {FILTER_NAMES}, got {order!r}")
    return order

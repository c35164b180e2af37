"""Bounded concurrent mapping with order-deterministic results."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def bounded_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int) -> list[R]:
    """Apply ``fn`` to every item with at most ``max_workers`` in flight.

    Results are returned in input order regardless of completion order, so
    callers see identical output for any worker count. The first exception
    raised by ``fn`` propagates.
    """
    items = list(items)
    if max_workers < 1:
        raise ValueError("max_workers must be >= 1")
    if not items:
        return []
    if max_workers == 1 or len(items) == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


def ordered_results(pairs: Sequence[tuple[int, R]]) -> list[R]:
    """Sort (index, value) pairs by index and return the values."""
    return [value for _, value in sorted(pairs, key=lambda p: p[0])]

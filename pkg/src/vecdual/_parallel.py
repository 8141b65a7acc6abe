"""Ordered parallel map shared by the per-atom loops.

The worker count changes speed only: results are collected in input order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

_workers = 1


def set_workers(n: int) -> None:
    global _workers
    if n < 1:
        raise ValueError("worker count must be positive")
    _workers = int(n)


def get_workers() -> int:
    return _workers


@contextmanager
def workers(n: int):
    old = get_workers()
    set_workers(n)
    try:
        yield
    finally:
        set_workers(old)


def pmap(fn, items) -> list:
    items = list(items)
    if _workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_workers) as ex:
        return list(ex.map(fn, items))

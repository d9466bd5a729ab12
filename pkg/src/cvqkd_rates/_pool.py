"""Deterministic fan-out of independent sweep points to a thread pool."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import DomainError

_ENV_VAR = "CVQKD_RATES_THREADS"
_AUTO_CAP = 8

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Worker-pool size: CVQKD_RATES_THREADS caps it, 0 or unset means auto."""
    raw = os.environ.get(_ENV_VAR)
    if raw is None or raw.strip() == "":
        requested = 0
    else:
        try:
            requested = int(raw)
        except ValueError as exc:
            raise DomainError(
                f"{_ENV_VAR} must be a non-negative integer, got {raw!r}"
            ) from exc
        if requested < 0:
            raise DomainError(f"{_ENV_VAR} must be >= 0, got {requested}")
    auto = min(_AUTO_CAP, os.cpu_count() or 1)
    return auto if requested == 0 else requested


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map preserving input order; results are independent of scheduling."""
    work: Sequence[T] = list(items)
    workers = worker_count()
    if workers <= 1 or len(work) <= 1:
        return [fn(item) for item in work]
    with ThreadPoolExecutor(max_workers=min(workers, len(work))) as pool:
        return list(pool.map(fn, work))

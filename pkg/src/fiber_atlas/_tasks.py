"""Deterministic task mapping.

Tasks share only immutable inputs and are merged in submission order, so the
output is identical whether they run serially or on a thread pool.  The pool
width comes from the ``FIBER_ATLAS_THREADS`` environment variable unless the
caller passes one explicitly.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["thread_count", "task_map"]


def thread_count(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    raw = os.environ.get("FIBER_ATLAS_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def task_map(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """Apply ``fn`` to ``items``, preserving order; results are thread-count
    independent for pure ``fn``."""
    n = thread_count(threads)
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))

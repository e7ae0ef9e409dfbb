from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

T = TypeVar("T")


def run_replicates(
    task: Callable[[int], T],
    replicates: int,
    *,
    threads: Optional[int] = 1,
) -> List[T]:
    """
    Runs task(0), ..., task(replicates - 1) and returns results in index order.

    numpy releases the GIL inside the heavy kernels, so threads are enough.
    """
    if threads is None or threads <= 1 or replicates <= 1:
        return [task(i) for i in range(replicates)]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(task, range(replicates)))

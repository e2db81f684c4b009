"""Worker-count policy.

LAYERSPLIT_THREADS caps parallelism for the stages that can use it
(0 or unset = auto).  The numeric kernels are single-threaded by design
so results are bit-identical regardless of this setting; the cap only
bounds coarse-grained work distribution such as the weight-grid sweep.
"""

from __future__ import annotations

import os

ENV_VAR = "LAYERSPLIT_THREADS"


def thread_cap() -> int:
    """Parallelism cap from the environment; 0 means auto."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        cap = int(raw)
    except ValueError:
        return 0
    return max(cap, 0)


def effective_workers(requested: int | None = None) -> int:
    """Resolve a worker count: explicit request, else CPU count, both
    bounded by LAYERSPLIT_THREADS when it is set."""
    if requested is None or requested <= 0:
        requested = os.cpu_count() or 1
    cap = thread_cap()
    if cap > 0:
        requested = min(requested, cap)
    return max(1, requested)

"""Worker-count policy shared by the parallel code paths."""

import os


def max_workers() -> int:
    """Thread cap from TWISTED_HODGE_THREADS (default: CPU count, at least 1)."""
    raw = os.environ.get("TWISTED_HODGE_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"TWISTED_HODGE_THREADS must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError("TWISTED_HODGE_THREADS must be >= 1")
        return value
    return max(1, os.cpu_count() or 1)

"""Worker-count policy shared by the cost sweeps and the simulator."""
import os

from .errors import ParameterError

ENV_VAR = "LEVY_INVENTORY_THREADS"


def worker_count() -> int:
    """Workers allowed by ``LEVY_INVENTORY_THREADS``, else the CPU count."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ParameterError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return value

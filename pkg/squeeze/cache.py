import logging
import threading
from collections import OrderedDict
from typing import Optional

import numpy as np

from .config import settings
from .schemas import SqueezeParam

logger = logging.getLogger(__name__)

# In-process LRU; entries are read-only parity blocks of e^G
_propagators: "OrderedDict[str, np.ndarray]" = OrderedDict()
_lock = threading.Lock()
_stored_bytes = 0


def get_propagator_key(param: SqueezeParam, dim: int, parity: int) -> str:
    return f"propagator:{param.r!r}:{param.phi!r}:{dim}:{parity}"


def get_propagator_from_cache(key: str) -> Optional[np.ndarray]:
    with _lock:
        block = _propagators.get(key)
        if block is not None:
            _propagators.move_to_end(key)
        return block


def set_propagator_in_cache(key: str, block: np.ndarray):
    global _stored_bytes
    if block.nbytes > settings.propagator_cache_max_bytes:
        logger.debug(f"{key} ({block.nbytes} bytes) exceeds the cache bound, not stored")
        return
    block.setflags(write=False)
    with _lock:
        previous = _propagators.pop(key, None)
        if previous is not None:
            _stored_bytes -= previous.nbytes
        _propagators[key] = block
        _stored_bytes += block.nbytes
        while len(_propagators) > settings.propagator_cache_size or _stored_bytes > settings.propagator_cache_max_bytes:
            evicted_key, evicted = _propagators.popitem(last=False)
            _stored_bytes -= evicted.nbytes
            logger.debug(f"Evicted {evicted_key} from propagator cache")


def invalidate_propagator_cache(key: Optional[str] = None):
    """Drop one entry, or everything when key is None."""
    global _stored_bytes
    with _lock:
        if key is None:
            _propagators.clear()
            _stored_bytes = 0
            return
        evicted = _propagators.pop(key, None)
        if evicted is not None:
            _stored_bytes -= evicted.nbytes

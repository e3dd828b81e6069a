"""Client-side request pacing shared by every PubMed caller in the process."""

from __future__ import annotations

import threading
import time
from typing import Callable


class RateLimiter:
    """Space calls at least ``1 / rate`` seconds apart, with no bursting.

    Callers block in :meth:`acquire` until their slot arrives. The lock is held
    while waiting so grants are strictly serialized and the gap between
    consecutive grants is never shorter than the interval.
    """

    def __init__(
        self,
        rate: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._last: float | None = None

    def acquire(self) -> float:
        """Block until a request may be sent; returns the grant time."""
        with self._lock:
            now = self._clock()
            if self._last is not None:
                wait = self._last + self.interval - now
                while wait > 0:
                    self._sleep(wait)
                    now = self._clock()
                    wait = self._last + self.interval - now
            self._last = now
            return now

    def __enter__(self) -> RateLimiter:
        self.acquire()
        return self

    def __exit__(self, *exc: object) -> None:
        return None


_shared: dict[float, RateLimiter] = {}
_shared_lock = threading.Lock()


def shared_limiter(rate: float) -> RateLimiter:
    """The process-wide limiter for ``rate`` requests per second."""
    with _shared_lock:
        limiter = _shared.get(rate)
        if limiter is None:
            limiter = _shared[rate] = RateLimiter(rate)
        return limiter

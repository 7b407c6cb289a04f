"""Per-user download traffic: exponential reading times, fixed-size requests.

Each user strictly alternates between Reading (idle until a drawn time) and
Active (downloading one request). Arrivals falling inside a slot take effect at
the next call to :meth:`TrafficState.advance_all`, but keep their true arrival
time as ``requested_at``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BITS_PER_MBYTE = {"binary": 8 * 2**20, "decimal": 8 * 10**6}


def mbyte_to_bits(size_mbyte: float, convention: str = "binary") -> float:
    try:
        return size_mbyte * BITS_PER_MBYTE[convention]
    except KeyError:
        raise ValueError(f"unknown MByte convention {convention!r}") from None


def draw_reading_time(rng: np.random.Generator, mean: float, size=None):
    if not mean > 0:
        raise ValueError(f"mean reading time must be positive, got {mean}")
    t = rng.exponential(mean, size)
    # Generator.exponential can return exactly 0.0 with negligible probability
    return np.where(t > 0, t, np.finfo(float).tiny) if size is not None else max(t, np.finfo(float).tiny)


def reading_time_quantile(u, mean: float):
    """Inverse CDF of the reading-time distribution."""
    return -mean * np.log1p(-np.asarray(u, dtype=float))


@dataclass
class Request:
    user_id: int
    cell_id: int
    size: float
    remaining: float
    requested_at: float
    completed_at: float | None = None

    @property
    def transmission_time(self) -> float | None:
        if self.completed_at is None:
            return None
        return self.completed_at - self.requested_at


@dataclass(frozen=True)
class Completion:
    request: Request


class TrafficState:
    """Reading/Active phase of every user.

    ``active[u]`` is True while user ``u`` downloads ``current[u]``; otherwise
    the user reads until ``until[u]``.
    """

    def __init__(self, user_cells, mean_reading_time: float, size_bits: float,
                 rng: np.random.Generator, start: float = 0.0):
        self.user_cells = np.asarray(user_cells, dtype=int)
        n = self.user_cells.size
        self.mean_reading_time = float(mean_reading_time)
        self.size_bits = float(size_bits)
        self.rng = rng
        self.active = np.zeros(n, dtype=bool)
        self.until = start + draw_reading_time(rng, self.mean_reading_time, n)
        self.remaining = np.zeros(n)
        self.current: list[Request | None] = [None] * n
        self.completed: list[Request] = []

    @property
    def n_users(self) -> int:
        return self.user_cells.size

    def phase(self, user_id: int) -> str:
        return "active" if self.active[user_id] else "reading"

    def active_set(self, cell_id: int, now: float | None = None) -> list[int]:
        """Active users of a cell, ascending user id."""
        return [int(u) for u in np.flatnonzero(self.active & (self.user_cells == cell_id))]

    def advance(self, user_id: int, now: float, delivered_bits: float = 0.0) -> list[Completion]:
        delivered = np.zeros(self.n_users)
        delivered[user_id] = delivered_bits
        return self.advance_all(now, delivered)

    def advance_all(self, now: float, delivered_bits) -> list[Completion]:
        """Apply bits delivered up to ``now``, then start due requests.

        Completions are stamped ``completed_at = now`` and immediately draw the
        next reading time from ``now``.
        """
        delivered = np.asarray(delivered_bits, dtype=float)
        if np.any(delivered < 0):
            raise ValueError("delivered bits must be non-negative")
        if np.any((delivered > 0) & ~self.active):
            bad = np.flatnonzero((delivered > 0) & ~self.active).tolist()
            raise ValueError(f"bits delivered to reading users {bad}")
        slack = 1e-9 * self.size_bits
        if np.any(delivered > self.remaining + slack):
            raise ValueError("delivered bits exceed the remaining request size")

        events = []
        if np.any(delivered):
            self.remaining = np.where(self.active, self.remaining - delivered, 0.0)
            done = np.flatnonzero(self.active & (self.remaining <= slack))
            if done.size:
                draws = draw_reading_time(self.rng, self.mean_reading_time, done.size)
                for u, wait in zip(done, draws):
                    req = self.current[u]
                    req.remaining = 0.0
                    req.completed_at = now
                    self.completed.append(req)
                    events.append(Completion(req))
                    self.current[u] = None
                    self.until[u] = now + wait
                self.active[done] = False
                self.remaining[done] = 0.0
            for u in np.flatnonzero(self.active):
                self.current[u].remaining = float(self.remaining[u])

        due = np.flatnonzero(~self.active & (self.until <= now))
        for u in due:
            self.current[u] = Request(int(u), int(self.user_cells[u]), self.size_bits,
                                      self.size_bits, float(self.until[u]))
        self.active[due] = True
        self.remaining[due] = self.size_bits
        return events

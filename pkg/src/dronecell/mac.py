"""Per-slot bandwidth allocation inside one cell."""

from __future__ import annotations

import enum

import numpy as np

from .channel import ChannelParams, expected_received_power


class Mac(str, enum.Enum):
    FDMA = "fdma"
    TDMA = "tdma"


# user_id -> allocated bandwidth in Hz; users absent from the map get 0
Allocation = dict


def fdma_allocate(active, bandwidth: float) -> Allocation:
    """Equal split of the whole band among the active users."""
    active = list(active)
    if not active:
        return {}
    share = bandwidth / len(active)
    return {int(u): share for u in active}


def tdma_select(active, drone_ground, user_positions, params: ChannelParams, height: float) -> Allocation:
    """Whole band to the active user with the strongest expected received power.

    ``user_positions`` maps (or indexes) user id to a ground ``(x, y)``.
    Ties go to the lowest user id.
    """
    active = sorted(int(u) for u in active)
    if not active:
        return {}
    pos = np.array([user_positions[u] for u in active], dtype=float)
    dx, dy = np.asarray(drone_ground, dtype=float)
    r = np.hypot(pos[:, 0] - dx, pos[:, 1] - dy)
    power = expected_received_power(params, height, r)
    return {active[int(np.argmax(power))]: params.bandwidth}


def band_fractions(mac: Mac, user_cells, active, signal_power, n_cells: int):
    """Vectorised allocation for every cell at once.

    Returns the per-user fraction of the band ``b_u / B`` (0 for users that
    get nothing) and the per-cell count of active users. ``signal_power`` is
    each user's expected received power from its own drone, used by TDMA.
    """
    user_cells = np.asarray(user_cells)
    counts = np.bincount(user_cells[active], minlength=n_cells)
    frac = np.zeros(user_cells.size)
    if not np.any(active):
        return frac, counts
    if Mac(mac) is Mac.FDMA:
        frac[active] = 1.0 / counts[user_cells[active]]
        return frac, counts
    idx = np.flatnonzero(active)
    # sort by cell, then power descending, then user id ascending
    order = np.lexsort((idx, -signal_power[idx], user_cells[idx]))
    ranked = idx[order]
    first = np.ones(ranked.size, dtype=bool)
    first[1:] = user_cells[ranked[1:]] != user_cells[ranked[:-1]]
    frac[ranked[first]] = 1.0
    return frac, counts

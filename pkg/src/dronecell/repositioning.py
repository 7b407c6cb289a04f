"""Per-slot heading choice for each drone.

Each drone examines ``2M`` headings spaced by ``angle_step`` and moves
``v * dt`` along the best one. Hovering happens only when the drone has no
active user (or under the Hover policy); there is no "stay" candidate.

Scores:

* MaxSnr sums the interference-free expected SE of the drone's own active
  users at the candidate position.
* MaxSlr treats leakage like interference: for each own active user the
  signal is compared with ``leakage + B*N'`` and the resulting expected SE is
  summed. Leakage is the expected power the candidate would deposit on active
  users of neighbour cells (centre distance <= kappa); with no leakage the
  score equals the MaxSnr score.

The brute-force ``centralized_oracle`` searches all joint headings and is only
meant for tiny instances in tests.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, expected_received_power, expected_se
from .geometry import DronePose
from .mobility import move_points

TIE_RTOL = 1e-9


class Policy(str, enum.Enum):
    HOVER = "hover"
    MAX_SNR = "max_snr"
    MAX_SLR = "max_slr"


@dataclass(frozen=True)
class HeadingPolicy:
    kind: Policy = Policy.MAX_SNR
    angle_step: float = math.radians(5.0)
    interference_distance: float = 200.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Policy(self.kind))
        n = 2 * math.pi / self.angle_step
        if round(n) < 2 or round(n) % 2 or abs(n - round(n)) > 1e-9 * n:
            raise ValueError(f"angle step {self.angle_step} rad does not split 2*pi into 2M headings")

    @property
    def n_candidates(self) -> int:
        return int(round(2 * math.pi / self.angle_step))


@dataclass(frozen=True)
class NeighborSnapshot:
    """Slot-start view of neighbour cells within the interference distance."""

    drone_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    user_positions: tuple = ()

    def active_users(self) -> np.ndarray:
        if not self.user_positions:
            return np.zeros((0, 2))
        return np.concatenate([np.reshape(u, (-1, 2)) for u in self.user_positions])


def candidate_headings(angle_step: float) -> np.ndarray:
    n = int(round(2 * math.pi / angle_step))
    return np.arange(n) * (2 * math.pi / n)


def candidate_positions(pose: DronePose, v: float, dt: float, angle_step: float, bounds=None):
    """Headings and the ``(2M, 2)`` ground points reached along each of them."""
    headings = candidate_headings(angle_step)
    origin = np.broadcast_to([pose.ground.x, pose.ground.y], (headings.size, 2))
    if bounds is None:
        bounds = (-np.inf, -np.inf, np.inf, np.inf)
    return headings, move_points(origin, headings, v * dt, bounds)


def _ground_distances(candidates, users):
    diff = candidates[..., :, None, :] - users[..., None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _snr_scores(candidates, h, users, own_mask, params):
    se = expected_se(params, h, _ground_distances(candidates, users))
    return np.sum(se * own_mask[..., None, :], axis=-1)


def _slr_scores(candidates, h, users, own_mask, neighbor_mask, params):
    r = _ground_distances(candidates, users)
    power = expected_received_power(params, h, r)
    leakage = np.sum(power * neighbor_mask[..., None, :], axis=-1, keepdims=True)
    # per-user S / (L + B N'), aggregated like the SNR score so L = 0 ranks identically
    return np.sum(expected_se(params, h, r, leakage) * own_mask[..., None, :], axis=-1)


def score_snr(candidates, h: float, own_active_users, params: ChannelParams):
    users = np.reshape(np.asarray(own_active_users, dtype=float), (-1, 2))
    if users.shape[0] == 0:
        raise ValueError("score_snr needs at least one active user")
    return _snr_scores(np.asarray(candidates, dtype=float), h, users, np.ones(users.shape[0]), params)


def score_slr(candidates, h: float, own_active_users, neighbors: NeighborSnapshot | None,
              params: ChannelParams):
    own = np.reshape(np.asarray(own_active_users, dtype=float), (-1, 2))
    if own.shape[0] == 0:
        raise ValueError("score_slr needs at least one active user")
    other = neighbors.active_users() if neighbors is not None else np.zeros((0, 2))
    users = np.concatenate([own, other])
    own_mask = np.r_[np.ones(own.shape[0]), np.zeros(other.shape[0])]
    return _slr_scores(np.asarray(candidates, dtype=float), h, users, own_mask, 1.0 - own_mask, params)


def best_index(scores):
    """Index of the best score along the last axis; near-ties go to the lowest index."""
    scores = np.asarray(scores)
    top = scores.max(axis=-1, keepdims=True)
    return np.argmax(scores >= top - TIE_RTOL * np.abs(top), axis=-1)


def decide(policy: HeadingPolicy, pose: DronePose, v: float, dt: float, own_active,
           neighbors: NeighborSnapshot | None, params: ChannelParams, bounds=None) -> float | None:
    """Heading in radians, or None when the drone hovers in place."""
    own = np.reshape(np.asarray(own_active, dtype=float), (-1, 2))
    if policy.kind is Policy.HOVER or own.shape[0] == 0:
        return None
    headings, cand = candidate_positions(pose, v, dt, policy.angle_step, bounds)
    if policy.kind is Policy.MAX_SNR:
        scores = score_snr(cand, pose.height, own, params)
    else:
        scores = score_slr(cand, pose.height, own, neighbors, params)
    return float(headings[best_index(scores)])


def decide_all(policy: HeadingPolicy, drone_positions, bounds, deciders, user_positions, user_cells,
               neighbor_mask, params: ChannelParams, h: float, step: float):
    """Headings for the drones ``deciders`` from one slot-start snapshot.

    ``user_positions``/``user_cells`` hold the active users of the whole
    network; ``neighbor_mask[i, j]`` says whether cell ``j`` is within the
    interference distance of cell ``i``. Returns ``(headings, new_positions)``
    for the deciders.
    """
    headings = candidate_headings(policy.angle_step)
    deciders = np.asarray(deciders, dtype=int)
    start = drone_positions[deciders]
    cand = move_points(start[:, None, :], headings[None, :], step, bounds[deciders][:, None, :])
    own = user_cells[None, :] == deciders[:, None]
    if policy.kind is Policy.MAX_SNR:
        nbr = np.zeros_like(own)
    elif policy.kind is Policy.MAX_SLR:
        nbr = neighbor_mask[deciders][:, user_cells]
    else:
        raise ValueError("hover policy makes no heading decisions")
    # gather each decider's relevant users into a padded (D, K) block
    relevant = own | nbr
    width = max(int(relevant.sum(axis=1).max()), 1)
    take = np.argsort(~relevant, axis=1, kind="stable")[:, :width]
    valid = np.take_along_axis(relevant, take, axis=1)
    users = user_positions[take]
    own_w = (np.take_along_axis(own, take, axis=1) & valid).astype(float)
    if policy.kind is Policy.MAX_SNR:
        scores = _snr_scores(cand, h, users, own_w, params)
    else:
        nbr_w = (np.take_along_axis(nbr, take, axis=1) & valid).astype(float)
        scores = _slr_scores(cand, h, users, own_w, nbr_w, params)
    pick = best_index(scores)
    rows = np.arange(deciders.size)
    return headings[pick], cand[rows, pick]


def neighbor_mask_from_centers(centers, kappa: float) -> np.ndarray:
    centers = np.asarray(centers, dtype=float)
    d = np.hypot(centers[:, None, 0] - centers[None, :, 0], centers[:, None, 1] - centers[None, :, 1])
    mask = d <= kappa
    np.fill_diagonal(mask, False)
    return mask


def system_expected_se(drone_positions, users_by_cell, params: ChannelParams, h: float,
                       kappa: float) -> float:
    """Mean over cells with active users of the per-cell mean expected SE.

    Every drone with at least one active user transmits and interferes with
    users whose ground distance to it is at most ``kappa``.
    """
    drones = np.asarray(drone_positions, dtype=float)
    transmitting = np.array([len(np.reshape(u, (-1, 2))) > 0 for u in users_by_cell])
    cell_means = []
    for n, users in enumerate(users_by_cell):
        users = np.reshape(np.asarray(users, dtype=float), (-1, 2))
        if users.shape[0] == 0:
            continue
        r = np.hypot(users[:, None, 0] - drones[None, :, 0], users[:, None, 1] - drones[None, :, 1])
        interferes = transmitting[None, :] & (r <= kappa)
        interferes[:, n] = False
        interference = np.sum(np.where(interferes, expected_received_power(params, h, r), 0.0), axis=1)
        cell_means.append(np.mean(expected_se(params, h, r[:, n], interference)))
    return float(np.mean(cell_means)) if cell_means else 0.0


def centralized_oracle(drone_positions, bounds, users_by_cell, params: ChannelParams, h: float,
                       v: float, dt: float, angle_step: float, kappa: float,
                       objective=system_expected_se):
    """Exhaustive joint heading search; a test oracle for tiny networks.

    Drones without active users hover (None). Returns ``(headings, best_value)``.
    """
    drones = np.asarray(drone_positions, dtype=float)
    n = drones.shape[0]
    headings = candidate_headings(angle_step)
    if n > 3 or headings.size > 8:
        raise ValueError(f"centralized search limited to N <= 3 and 2M <= 8, got N={n}, 2M={headings.size}")
    movers = [i for i, u in enumerate(users_by_cell) if len(np.reshape(u, (-1, 2))) > 0]
    bounds = np.asarray(bounds, dtype=float)
    reach = {i: move_points(np.broadcast_to(drones[i], (headings.size, 2)), headings, v * dt, bounds[i])
             for i in movers}
    best_value, best_choice = -np.inf, None
    for choice in itertools.product(range(headings.size), repeat=len(movers)):
        placed = drones.copy()
        for i, k in zip(movers, choice):
            placed[i] = reach[i][k]
        value = objective(placed, users_by_cell, params, h, kappa)
        if best_choice is None or value > best_value + TIE_RTOL * abs(best_value):
            best_value, best_choice = value, choice
    result = [None] * n
    for i, k in zip(movers, best_choice):
        result[i] = float(headings[k])
    return result, best_value

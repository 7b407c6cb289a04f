"""Random-waypoint users and heading-driven drones, confined to their cells."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import DronePose, GroundPoint

DEFAULT_USER_SPEED = (1.0, 3.0)


def clamp_to_bounds(points, bounds):
    """Clamp ``(..., 2)`` points into ``(..., 4)`` boxes ``(xmin, ymin, xmax, ymax)``."""
    points = np.asarray(points, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    x = np.clip(points[..., 0], bounds[..., 0], bounds[..., 2])
    y = np.clip(points[..., 1], bounds[..., 1], bounds[..., 3])
    return np.stack([x, y], axis=-1)


def uniform_in_bounds(rng: np.random.Generator, bounds):
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    u = rng.random((bounds.shape[0], 2))
    return bounds[:, :2] + u * (bounds[:, 2:] - bounds[:, :2])


@dataclass
class RwpState:
    """Random-waypoint state of ``n`` users; arrays are ``(n, 2)`` / ``(n,)``."""

    position: np.ndarray
    waypoint: np.ndarray
    speed: np.ndarray
    cell_id: np.ndarray

    def __len__(self):
        return self.speed.shape[0]


def rwp_init(rng: np.random.Generator, bounds, cell_id, speed_range=DEFAULT_USER_SPEED) -> RwpState:
    bounds = np.atleast_2d(bounds)
    n = bounds.shape[0]
    return RwpState(
        position=uniform_in_bounds(rng, bounds),
        waypoint=uniform_in_bounds(rng, bounds),
        speed=rng.uniform(speed_range[0], speed_range[1], n),
        cell_id=np.asarray(cell_id, dtype=int).reshape(n),
    )


def rwp_step(state: RwpState, rng: np.random.Generator, dt: float, cell_bounds,
             speed_range=DEFAULT_USER_SPEED) -> RwpState:
    """Walk every user ``speed * dt`` toward its waypoint, without pauses.

    A user that would reach or pass its waypoint stops on it and draws a new
    uniform waypoint in its cell and a new uniform speed; leftover time in the
    slot is dropped.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    bounds = np.atleast_2d(cell_bounds)
    delta = state.waypoint - state.position
    dist = np.hypot(delta[:, 0], delta[:, 1])
    step = state.speed * dt
    arrived = step >= dist
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(arrived, 1.0, step / dist)
    position = state.position + frac[:, None] * delta
    position[arrived] = state.waypoint[arrived]
    waypoint = state.waypoint.copy()
    speed = state.speed.copy()
    if np.any(arrived):
        idx = np.flatnonzero(arrived)
        waypoint[idx] = uniform_in_bounds(rng, bounds[idx])
        speed[idx] = rng.uniform(speed_range[0], speed_range[1], idx.size)
    return RwpState(position, waypoint, speed, state.cell_id)


def move_points(points, headings, distance, bounds):
    """Advance ``(n, 2)`` points ``distance`` along ``headings`` then clamp."""
    points = np.asarray(points, dtype=float)
    headings = np.asarray(headings, dtype=float)
    moved = points + distance * np.stack([np.cos(headings), np.sin(headings)], axis=-1)
    return clamp_to_bounds(moved, bounds)


def drone_step(pose: DronePose, heading: float, v: float, dt: float, cell_bounds) -> DronePose:
    if v < 0:
        raise ValueError(f"speed must be non-negative, got {v}")
    x, y = move_points([pose.ground.x, pose.ground.y], heading, v * dt, cell_bounds)
    return replace(pose, ground=GroundPoint(float(x), float(y)), heading=heading % (2 * math.pi))

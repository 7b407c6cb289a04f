"""Time-slotted multi-cell simulation.

Within a slot starting at ``t`` the phases run in a fixed order:

1. traffic arrivals due by ``t`` are already active (applied at the end of
   the previous slot);
2. every drone decides a heading from the slot-start snapshot;
3. drones move, then users take one random-waypoint step;
4. each cell allocates bandwidth among its active users;
5. every active user gets an expected SE against the drones within the
   interference distance that are serving someone this slot;
6. allocated users receive ``SE * b_u * dt`` bits (capped at what is left);
7. traffic is advanced to ``t + dt``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .channel import ChannelParams, dbm_to_watt, expected_received_power, expected_se
from .geometry import CellGrid, build_grid
from .mac import Mac, band_fractions
from .metrics import aggregate, summarize_run
from .mobility import rwp_init, rwp_step
from .repositioning import HeadingPolicy, Policy, decide_all, neighbor_mask_from_centers
from .traffic import BITS_PER_MBYTE, Request, TrafficState, mbyte_to_bits


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str, line: int | None = None):
        self.field = field_name
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field_name}: {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    side_count: int = 7
    edge_length: float = 80.0
    users_per_cell: int = 5
    height: float = 10.0
    drone_speed: float = 10.0
    bandwidth: float = 10e6
    carrier: float = 2e9
    tx_power_dbm: float = 24.0
    ue_noise_figure: float = 9.0
    alpha: float = 9.61
    beta: float = 0.16
    a_los: float = 41.1
    a_nlos: float = 33.0
    gamma_los: float = 2.09
    gamma_nlos: float = 3.75
    mean_reading_time: float = 20.0
    data_size_mbyte: float = 2.0
    mbyte_convention: str = "binary"
    slot: float = 0.1
    angle_step_deg: float = 5.0
    interference_distance: float = 200.0
    mac: Mac = Mac.FDMA
    policy: Policy = Policy.HOVER
    duration: float = 400.0
    runs: int = 10
    base_seed: int = 0
    user_speed_min: float = 1.0
    user_speed_max: float = 3.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "mac", Mac(self.mac))
        except ValueError:
            raise ConfigError("mac", f"{self.mac!r} not in {{fdma, tdma}}") from None
        try:
            object.__setattr__(self, "policy", Policy(self.policy))
        except ValueError:
            raise ConfigError("policy", f"{self.policy!r} not in {{hover, max_snr, max_slr}}") from None
        self.validate()

    def validate(self):
        positive = ("edge_length", "height", "bandwidth", "carrier", "ue_noise_figure", "alpha",
                    "beta", "a_los", "a_nlos", "gamma_los", "gamma_nlos", "mean_reading_time",
                    "data_size_mbyte", "slot", "angle_step_deg", "interference_distance",
                    "duration", "user_speed_min", "user_speed_max")
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be positive, got {value}")
        if self.drone_speed < 0:
            raise ConfigError("drone_speed", f"must be non-negative, got {self.drone_speed}")
        if self.side_count < 1 or self.side_count % 2 == 0:
            raise ConfigError("side_count", f"must be a positive odd integer, got {self.side_count}")
        for name in ("users_per_cell", "runs"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be at least 1, got {getattr(self, name)}")
        if self.user_speed_min > self.user_speed_max:
            raise ConfigError("user_speed_min", "exceeds user_speed_max")
        if self.mbyte_convention not in BITS_PER_MBYTE:
            raise ConfigError("mbyte_convention", f"{self.mbyte_convention!r} not in {{binary, decimal}}")
        slots = self.duration / self.slot
        if abs(slots - round(slots)) > 1e-6 * max(1.0, slots):
            raise ConfigError("duration", f"{self.duration} s is not a multiple of the {self.slot} s slot")
        n = 360.0 / self.angle_step_deg
        if abs(n - round(n)) > 1e-9 * n or round(n) % 2 or round(n) < 2:
            raise ConfigError("angle_step_deg", f"{self.angle_step_deg} does not give 2M equal headings")

    @property
    def n_slots(self) -> int:
        return int(round(self.duration / self.slot))

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(
            alpha=self.alpha, beta=self.beta, a_los=self.a_los, a_nlos=self.a_nlos,
            gamma_los=self.gamma_los, gamma_nlos=self.gamma_nlos,
            p_tx=float(dbm_to_watt(self.tx_power_dbm)), bandwidth=self.bandwidth,
            carrier=self.carrier, ue_noise_figure=self.ue_noise_figure,
        )

    @property
    def heading_policy(self) -> HeadingPolicy:
        return HeadingPolicy(self.policy, math.radians(self.angle_step_deg), self.interference_distance)

    @property
    def grid(self) -> CellGrid:
        return build_grid(self.side_count, self.edge_length)

    @property
    def request_bits(self) -> float:
        return mbyte_to_bits(self.data_size_mbyte, self.mbyte_convention)

    def replace(self, **changes) -> "ScenarioConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ScenarioConfig(**values)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["mac"] = self.mac.value
        out["policy"] = self.policy.value
        return out


@dataclass(frozen=True)
class SlotRecord:
    run: int
    t: float
    cell_id: int
    user_ids: tuple[int, ...]
    user_se: tuple[float, ...]
    allocation: dict
    active_count: int
    drone_x: float
    drone_y: float
    heading: float | None


@dataclass
class RunTrace:
    """Columnar per-slot history of one replication.

    ``se`` is NaN for users that are not active in a slot; ``band`` is the
    allocated bandwidth in Hz; ``heading`` is NaN for hovering drones.
    """

    config: ScenarioConfig
    run: int
    seed: int
    user_cells: np.ndarray
    inner_cells: tuple[int, ...]
    t: np.ndarray
    se: np.ndarray
    band: np.ndarray
    delivered: np.ndarray
    drone_pos: np.ndarray
    heading: np.ndarray
    active_count: np.ndarray
    requests: list[Request] = field(default_factory=list)

    @property
    def horizon(self) -> float:
        return self.config.n_slots * self.config.slot

    def records(self, cells=None):
        """Yield one SlotRecord per (slot, cell)."""
        cells = range(self.drone_pos.shape[1]) if cells is None else cells
        members = {c: np.flatnonzero(self.user_cells == c) for c in cells}
        for k, t in enumerate(self.t):
            for c in cells:
                users = members[c]
                act = users[~np.isnan(self.se[k, users])]
                alloc = {int(u): float(self.band[k, u]) for u in users if self.band[k, u] > 0}
                h = self.heading[k, c]
                yield SlotRecord(self.run, float(t), int(c), tuple(int(u) for u in act),
                                 tuple(float(self.se[k, u]) for u in act), alloc,
                                 int(self.active_count[k, c]), float(self.drone_pos[k, c, 0]),
                                 float(self.drone_pos[k, c, 1]), None if np.isnan(h) else float(h))


class World:
    """Mutable state of one replication."""

    def __init__(self, config: ScenarioConfig, run: int = 0):
        self.config = config
        self.run = run
        self.seed = config.base_seed + run
        traffic_seq, mobility_seq = np.random.SeedSequence(self.seed).spawn(2)
        self.rng_mobility = np.random.default_rng(mobility_seq)
        grid = config.grid
        self.grid = grid
        self.params = config.channel
        self.policy = config.heading_policy
        self.n_cells = grid.n_cells
        self.centers = grid.centers_array()
        self.bounds = grid.bounds_array()
        self.neighbor_mask = neighbor_mask_from_centers(self.centers, config.interference_distance)
        self.user_cells = np.repeat(np.arange(self.n_cells), config.users_per_cell)
        self.user_bounds = self.bounds[self.user_cells]
        self.speed_range = (config.user_speed_min, config.user_speed_max)
        self.drone_pos = self.centers.copy()
        self.users = rwp_init(self.rng_mobility, self.user_bounds, self.user_cells, self.speed_range)
        self.traffic = TrafficState(self.user_cells, config.mean_reading_time, config.request_bits,
                                    np.random.default_rng(traffic_seq))
        self.slot_index = 0

    @property
    def t(self) -> float:
        return self.slot_index * self.config.slot

    def step(self):
        """Advance one slot; returns ``(se, band, delivered, heading, active_count)``."""
        cfg, params = self.config, self.params
        dt, h = cfg.slot, cfg.height
        n_users = self.user_cells.size
        active = self.traffic.active.copy()
        counts = np.bincount(self.user_cells[active], minlength=self.n_cells)

        heading = np.full(self.n_cells, np.nan)
        deciders = np.flatnonzero(counts > 0)
        if cfg.policy is not Policy.HOVER and deciders.size:
            chosen, moved = decide_all(self.policy, self.drone_pos, self.bounds, deciders,
                                       self.users.position[active], self.user_cells[active],
                                       self.neighbor_mask, params, h, cfg.drone_speed * dt)
            heading[deciders] = chosen
            self.drone_pos[deciders] = moved

        self.users = rwp_step(self.users, self.rng_mobility, dt, self.user_bounds, self.speed_range)

        se = np.full(n_users, np.nan)
        band = np.zeros(n_users)
        delivered = np.zeros(n_users)
        idx = np.flatnonzero(active)
        if idx.size:
            cells = self.user_cells[idx]
            pos = self.users.position[idx]
            r = np.hypot(pos[:, None, 0] - self.drone_pos[None, :, 0],
                         pos[:, None, 1] - self.drone_pos[None, :, 1])
            power = expected_received_power(params, h, r)
            rows = np.arange(idx.size)
            interferes = (counts > 0)[None, :] & (r <= cfg.interference_distance)
            interferes[rows, cells] = False
            interference = np.sum(np.where(interferes, power, 0.0), axis=1)
            se[idx] = expected_se(params, h, r[rows, cells], interference)

            signal = np.zeros(n_users)
            signal[idx] = power[rows, cells]
            frac, _ = band_fractions(cfg.mac, self.user_cells, active, signal, self.n_cells)
            band = frac * cfg.bandwidth
            bits = se[idx] * band[idx] * dt
            delivered[idx] = np.minimum(bits, self.traffic.remaining[idx])

        self.slot_index += 1
        self.traffic.advance_all(self.t, delivered)
        return se, band, delivered, heading, counts


def simulate(config: ScenarioConfig, run: int = 0) -> RunTrace:
    world = World(config, run)
    n_slots, n_cells, n_users = config.n_slots, world.n_cells, world.user_cells.size
    t = np.arange(n_slots) * config.slot
    se = np.empty((n_slots, n_users))
    band = np.empty((n_slots, n_users))
    delivered = np.empty((n_slots, n_users))
    drone_pos = np.empty((n_slots, n_cells, 2))
    heading = np.empty((n_slots, n_cells))
    active_count = np.empty((n_slots, n_cells), dtype=int)
    for k in range(n_slots):
        se[k], band[k], delivered[k], heading[k], active_count[k] = world.step()
        drone_pos[k] = world.drone_pos
    in_flight = [r for r in world.traffic.current if r is not None]
    requests = sorted(world.traffic.completed + in_flight, key=lambda r: (r.requested_at, r.user_id))
    return RunTrace(config, run, world.seed, world.user_cells, world.grid.inner_cell_ids, t, se, band,
                    delivered, drone_pos, heading, active_count, requests)


def iter_runs(config: ScenarioConfig, jobs: int = 1):
    """Replications ``0 .. runs-1`` seeded ``base_seed + run``, in run order.

    With ``jobs > 1`` the runs execute in worker processes; results are
    identical to the serial path because every run owns its seed.
    """
    if jobs <= 1 or config.runs == 1:
        for run in range(config.runs):
            yield simulate(config, run)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(simulate, itertools.repeat(config), range(config.runs))


@dataclass
class RunResults:
    config: ScenarioConfig
    runs: list
    traces: list = field(default_factory=list)

    @property
    def summary(self):
        return aggregate(self.runs)


def run(config: ScenarioConfig, keep_traces: bool = False, jobs: int = 1) -> RunResults:
    runs, traces = [], []
    for trace in iter_runs(config, jobs):
        runs.append(summarize_run(trace))
        if keep_traces:
            traces.append(trace)
    return RunResults(config, runs, traces)

"""Drone small-cell simulator: hovering vs dynamically repositioning base stations."""

from .analytic import AnalyticScenario, high_snr_bound, hover_se_expected, mobile_se_expected
from .channel import ChannelParams, PathKind, expected_se
from .engine import ConfigError, RunResults, ScenarioConfig, run, simulate
from .geometry import CellGrid, DronePose, GroundPoint, build_grid
from .mac import Mac
from .repositioning import HeadingPolicy, Policy

__version__ = "0.1.0"

"""Single drone, single static user in a disk cell: hovering vs moving SE.

The user sits at ground distance ``r0`` from the cell centre, uniformly over
the disk (density ``2 r / R^2``). A hovering drone stays above the centre; a
moving drone flies straight at the user with speed ``v`` for
``t_m = min(r0 / v, tau)`` and hovers on top of the user for the rest of the
transmission time ``tau``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

from scipy import integrate

from .channel import ChannelParams, expected_se

EPS_ABS = 1e-9
EPS_REL = 1e-6


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalyticScenario:
    radius: float = 40.0
    height: float = 10.0
    speed: float = 10.0
    tau: float = 1.0
    params: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.speed < 0:
            raise ValueError(f"speed must be non-negative, got {self.speed}")


def _quad(fn, a, b, points=None) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(fn, a, b, epsabs=EPS_ABS, epsrel=EPS_REL, limit=200,
                                      points=points)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from None
    return value


def hover_se_at(scn: AnalyticScenario, r0: float) -> float:
    if not 0.0 <= r0 <= scn.radius:
        raise ValueError(f"r0 must lie in [0, {scn.radius}], got {r0}")
    return float(expected_se(scn.params, scn.height, r0))


def radial_expectation(scn: AnalyticScenario, fn, points=None) -> float:
    """E[fn(r)] for r distributed as a uniform point in the disk."""
    R = scn.radius
    return _quad(lambda r: fn(r) * 2.0 * r / (R * R), 0.0, R, points)


def hover_se_expected(scn: AnalyticScenario) -> float:
    return radial_expectation(scn, lambda r: hover_se_at(scn, r))


def moving_time(scn: AnalyticScenario, r0: float) -> float:
    if r0 == 0:
        return 0.0
    if scn.speed == 0:
        return scn.tau
    return min(r0 / scn.speed, scn.tau)


def mobile_se_at(scn: AnalyticScenario, r0: float) -> float:
    if not 0.0 <= r0 <= scn.radius:
        raise ValueError(f"r0 must lie in [0, {scn.radius}], got {r0}")
    overhead = hover_se_at(scn, 0.0)
    t_m = moving_time(scn, r0)
    if t_m == 0.0:
        return overhead
    c = t_m / scn.tau
    h, v, params = scn.height, scn.speed, scn.params
    # time average along the approach; ground distance r0 - v t stays >= 0
    path = _quad(lambda t: float(expected_se(params, h, max(r0 - v * t, 0.0))), 0.0, t_m) / t_m
    return c * path + (1.0 - c) * overhead


def mobile_se_expected(scn: AnalyticScenario) -> float:
    # integrand has a kink where the drone just reaches the user
    kink = scn.speed * scn.tau
    points = [kink] if 0.0 < kink < scn.radius else None
    return radial_expectation(scn, lambda r: mobile_se_at(scn, r), points)


def high_snr_bound(scn: AnalyticScenario) -> float:
    """High-SNR upper bound on the moving/hovering SE ratio.

    Ratio of the LoS SE directly overhead to the NLoS SE at the cell edge,
    both without the ``1 +`` inside the logarithm.
    """
    p = scn.params
    top = p.p_tx * p.a_los_lin * scn.height ** (-p.gamma_los) / p.noise_full_band
    edge = p.p_tx * p.a_nlos_lin * scn.radius ** (-p.gamma_nlos) / p.noise_full_band
    if min(top, edge) < 10.0:
        warnings.warn("high-SNR assumption of the bound is violated (SNR < 10 dB)", stacklevel=2)
    return math.log2(top) / math.log2(edge)


@dataclass(frozen=True)
class SweepRow:
    tau: float
    speed: float
    height: float
    radius: float
    hover_se: float
    mobile_se: float
    ratio: float
    bound: float


def sweep(taus, speeds, base: AnalyticScenario | None = None) -> list[SweepRow]:
    """Hover/mobile expectations over a (tau, v) grid; rows ordered by v then tau."""
    base = base or AnalyticScenario()
    hover = hover_se_expected(base)
    bound = high_snr_bound(base)
    rows = []
    for v in speeds:
        for tau in taus:
            scn = replace(base, speed=float(v), tau=float(tau))
            mobile = mobile_se_expected(scn)
            rows.append(SweepRow(float(tau), float(v), scn.height, scn.radius, hover, mobile,
                                 mobile / hover, bound))
    return rows


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` (inclusive stop) or a comma list, e.g. ``0.5:6:0.5`` or ``10,15,20``."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError(f"range step must be positive in {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_sweep_spec(spec: str) -> tuple[list[float], list[float]]:
    """Parse ``tau=0.5:6:0.5 v=10,15,20``; missing axes default to the figure's axes."""
    taus, speeds = parse_range("0.5:6:0.5"), [10.0, 15.0, 20.0]
    for part in spec.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in sweep spec, got {part!r}")
        if key == "tau":
            taus = parse_range(value)
        elif key == "v":
            speeds = parse_range(value)
        else:
            raise ValueError(f"unknown sweep axis {key!r}; use tau or v")
    return taus, speeds

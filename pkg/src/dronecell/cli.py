"""Command-line front end: config parsing, scenario orchestration, file output.

Example::

    dronecell --policy hover,max_snr,max_slr --mac fdma,tdma --runs 10 --seed 42 --out results
    dronecell --analytic-sweep "tau=0.5:6:0.5 v=10,15,20" --out results --figures
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import shutil
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analytic
from .engine import ConfigError, ScenarioConfig, iter_runs
from .mac import Mac
from .metrics import SummaryStats, aggregate, summarize_run
from .repositioning import Policy

log = logging.getLogger("dronecell")

SUMMARY_SCHEMA = "dronecell.summary/1"
SLOTS_SCHEMA = "dronecell.slots/1"
REQUESTS_SCHEMA = "dronecell.requests/1"
ANALYTIC_SCHEMA = "dronecell.analytic/1"

# config-file key -> ScenarioConfig field; the suffix names the unit
CONFIG_KEYS = {
    "side_count": "side_count",
    "edge_length_m": "edge_length",
    "users_per_cell": "users_per_cell",
    "height_m": "height",
    "drone_speed_mps": "drone_speed",
    "bandwidth_hz": "bandwidth",
    "carrier_hz": "carrier",
    "tx_power_dbm": "tx_power_dbm",
    "ue_noise_figure_db": "ue_noise_figure",
    "alpha": "alpha",
    "beta": "beta",
    "a_los_db": "a_los",
    "a_nlos_db": "a_nlos",
    "gamma_los": "gamma_los",
    "gamma_nlos": "gamma_nlos",
    "mean_reading_time_s": "mean_reading_time",
    "data_size_mbyte": "data_size_mbyte",
    "mbyte_convention": "mbyte_convention",
    "slot_s": "slot",
    "angle_step_deg": "angle_step_deg",
    "interference_distance_m": "interference_distance",
    "mac": "mac",
    "policy": "policy",
    "duration_s": "duration",
    "runs": "runs",
    "base_seed": "base_seed",
    "user_speed_min_mps": "user_speed_min",
    "user_speed_max_mps": "user_speed_max",
}
FIELD_KEYS = {v: k for k, v in CONFIG_KEYS.items()}
_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _convert(key: str, name: str, raw: str, line: int):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}", line) from None
    return raw.lower() if name in ("mac", "policy", "mbyte_convention") else raw


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key=value`` lines (``#`` starts a comment) over the default scenario."""
    values, lines = {}, {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(key or "<line>", "expected key=value", number)
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key", number)
        if key in lines:
            raise ConfigError(key, f"already set on line {lines[key]}", number)
        name = CONFIG_KEYS[key]
        values[name] = _convert(key, name, raw, number)
        lines[key] = number
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        key = FIELD_KEYS.get(exc.field, exc.field)
        message = str(exc).split(": ", 1)[-1]
        raise ConfigError(key, message, lines.get(key)) from None


def format_config(config: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config`; every key materialised."""
    data = config.as_dict()
    return "".join(f"{key}={data[name]}\n" for key, name in CONFIG_KEYS.items())


def _csv_float(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


@dataclass
class ScenarioResult:
    policy: Policy
    mac: Mac
    stats: SummaryStats


@dataclass
class OutputBundle:
    directory: Path
    summary: dict
    scenarios: list = field(default_factory=list)
    analytic: list = field(default_factory=list)
    files: list = field(default_factory=list)


def _stats_dict(res: ScenarioResult) -> dict:
    s = res.stats
    return {
        "policy": res.policy.value,
        "mac": res.mac.value,
        "system_se": s.system_se,
        "system_se_per_u": s.system_se_per_u,
        "se_ratio_vs_hover": s.se_ratio_vs_hover,
        "jain": s.jain,
        "mean_transmission_time_s": s.mean_transmission_time,
        "transmission_time_ratio_vs_hover": s.transmission_time_ratio_vs_hover,
        "mean_turning_angle_deg": s.mean_turning_angle,
        "per_run": [vars(r).copy() for r in s.per_run],
    }


def _slot_rows(trace, policy, mac, cells):
    se, band = trace.se, trace.band
    for k, t in enumerate(trace.t):
        for c in cells:
            users = np.flatnonzero(trace.user_cells == c)
            act = users[~np.isnan(se[k, users])]
            mean_se = float(se[k, act].mean()) if act.size else None
            alloc = ";".join(f"{u}:{band[k, u]:.6g}" for u in users if band[k, u] > 0)
            yield [SLOTS_SCHEMA, policy, mac, trace.run, f"{t:.1f}", c, int(trace.active_count[k, c]),
                   _csv_float(mean_se), f"{trace.drone_pos[k, c, 0]:.4f}",
                   f"{trace.drone_pos[k, c, 1]:.4f}",
                   "" if np.isnan(trace.heading[k, c]) else f"{math.degrees(trace.heading[k, c]):.1f}",
                   alloc]


def run_scenario(config: ScenarioConfig, policies, macs, out: Path, sweep: str | None = None,
                 figures: bool = False, slot_cells: str = "inner", jobs: int = 1) -> OutputBundle:
    """Run every (policy, mac) pair and the optional analytic sweep into ``out``.

    Files are written to a scratch directory first and moved into place only
    when everything succeeded.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        bundle = _run_into(config, policies, macs, scratch, sweep, figures, slot_cells, jobs)
        for path in sorted(scratch.iterdir()):
            target = out / path.name
            path.replace(target)
            bundle.files.append(target)
        bundle.directory = out
        return bundle
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def _run_into(config, policies, macs, out: Path, sweep, figures, slot_cells, jobs) -> OutputBundle:
    policies = [Policy(p) for p in policies]
    macs = [Mac(m) for m in macs]
    results = []
    if policies:
        cells = {"inner": list(config.grid.inner_cell_ids), "all": list(range(config.grid.n_cells)),
                 "none": []}[slot_cells]
        with open(out / "slots.csv", "w", newline="") as fs, open(out / "requests.csv", "w", newline="") as fr:
            slots, requests = csv.writer(fs), csv.writer(fr)
            slots.writerow([SLOTS_SCHEMA, "policy", "mac", "run", "t_s", "cell_id", "active_count",
                            "mean_active_se", "drone_x_m", "drone_y_m", "heading_deg", "allocation_hz"])
            requests.writerow([REQUESTS_SCHEMA, "policy", "mac", "run", "user_id", "cell_id", "inner",
                               "size_bits", "remaining_bits", "requested_at_s", "completed_at_s",
                               "transmission_time_s"])
            for mac in macs:
                for policy in policies:
                    scenario = config.replace(policy=policy, mac=mac)
                    log.info("running %s/%s: %d x %g s", policy.value, mac.value, config.runs, config.duration)
                    summaries = []
                    for trace in iter_runs(scenario, jobs):
                        summaries.append(summarize_run(trace))
                        slots.writerows(_slot_rows(trace, policy.value, mac.value, cells))
                        inner = set(trace.inner_cells)
                        for r in trace.requests:
                            requests.writerow([REQUESTS_SCHEMA, policy.value, mac.value, trace.run,
                                               r.user_id, r.cell_id, int(r.cell_id in inner),
                                               _csv_float(r.size), _csv_float(r.remaining),
                                               _csv_float(r.requested_at), _csv_float(r.completed_at),
                                               _csv_float(r.transmission_time)])
                    results.append(ScenarioResult(policy, mac, aggregate(summaries)))
        hover = {r.mac: r.stats for r in results if r.policy is Policy.HOVER}
        for r in results:
            if r.mac in hover:
                r.stats.with_baseline(hover[r.mac])

    rows = []
    if sweep:
        taus, speeds = analytic.parse_sweep_spec(sweep)
        base = analytic.AnalyticScenario(radius=config.edge_length / 2, height=config.height,
                                         speed=config.drone_speed, params=config.channel)
        rows = analytic.sweep(taus, speeds, base)
        with open(out / "analytic.csv", "w", newline="") as fa:
            w = csv.writer(fa)
            w.writerow([ANALYTIC_SCHEMA, "tau", "v", "h", "R", "hover_se", "mobile_se", "ratio", "bound"])
            for row in rows:
                w.writerow([ANALYTIC_SCHEMA, row.tau, row.speed, row.height, row.radius,
                            repr(row.hover_se), repr(row.mobile_se), repr(row.ratio), repr(row.bound)])

    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": config.as_dict(),
        "policies": [p.value for p in policies],
        "macs": [m.value for m in macs],
        "scenarios": [_stats_dict(r) for r in results],
    }
    if rows:
        summary["analytic"] = {"taus": sorted({r.tau for r in rows}),
                               "speeds": sorted({r.speed for r in rows}),
                               "hover_se": rows[0].hover_se, "bound": rows[0].bound}
    (out / "summary.txt").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    if figures:
        from . import plotting
        if results:
            plotting.plot_scenarios(results, out / "scenarios.png")
        if rows:
            plotting.plot_analytic(rows, out / "analytic.png")
    return OutputBundle(out, summary, results, rows)


def _list_arg(text: str) -> list[str]:
    return [x.strip().lower() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dronecell", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="key=value scenario file; missing keys take defaults")
    p.add_argument("--policy", type=_list_arg,
                   help="comma list of hover,max_snr,max_slr (default: all three unless only "
                        "--analytic-sweep is given)")
    p.add_argument("--mac", type=_list_arg, help="comma list of fdma,tdma (default: config mac)")
    p.add_argument("--runs", type=int, help="replications per scenario")
    p.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--analytic-sweep", metavar="SPEC",
                   help='single-drone sweep, e.g. "tau=0.5:6:0.5 v=10,15,20"')
    p.add_argument("--grid", type=int, help="cells per grid side (odd)")
    p.add_argument("--duration", type=float, help="simulated seconds per run")
    p.add_argument("--slot-cells", choices=("inner", "all", "none"), default="inner",
                   help="cells written to slots.csv")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for replications")
    p.add_argument("--figures", action="store_true", help="also render PNG figures next to the CSVs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        config = parse_config(text)
        overrides = {"runs": args.runs, "base_seed": args.seed, "side_count": args.grid,
                     "duration": args.duration}
        config = config.replace(**{k: v for k, v in overrides.items() if v is not None})
        if args.policy is not None:
            policies = args.policy
        elif args.analytic_sweep:
            policies = []
        else:
            policies = [p.value for p in Policy]
        for p in policies:
            if p not in {x.value for x in Policy}:
                raise ConfigError("--policy", f"{p!r} not in {{hover, max_snr, max_slr}}")
        macs = args.mac if args.mac is not None else [config.mac.value]
        for m in macs:
            if m not in {x.value for x in Mac}:
                raise ConfigError("--mac", f"{m!r} not in {{fdma, tdma}}")
        if args.jobs < 1:
            raise ConfigError("--jobs", f"must be at least 1, got {args.jobs}")
        bundle = run_scenario(config, policies, macs, args.out, args.analytic_sweep, args.figures,
                              args.slot_cells, args.jobs)
    except (ConfigError, ValueError, OSError, analytic.QuadratureError) as exc:
        print(f"dronecell: error: {exc}", file=sys.stderr)
        return 2
    for s in bundle.summary["scenarios"]:
        ratio = s["se_ratio_vs_hover"]
        print(f"{s['policy']:>8} {s['mac']}: SE {s['system_se']:.3f} bps/Hz"
              + (f" ({ratio:.2f}x hover)" if ratio is not None else "")
              + (f", Jain {s['jain']:.3f}" if s["jain"] is not None else ""))
    print(f"wrote {', '.join(p.name for p in bundle.files)} to {bundle.directory}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

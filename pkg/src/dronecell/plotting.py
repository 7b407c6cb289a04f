"""PNG figures for the report path. Uses the object API only (no pyplot state)."""

from __future__ import annotations

from collections import defaultdict

from matplotlib.figure import Figure

RC = {"font.size": 9, "axes.grid": True, "grid.alpha": 0.3}


def plot_analytic(rows, path):
    """SE vs transmission time, one mobile curve per drone speed plus the hover line."""
    by_speed = defaultdict(list)
    for row in rows:
        by_speed[row.speed].append(row)
    fig = Figure(figsize=(5.0, 3.4), layout="constrained")
    ax = fig.add_subplot()
    for speed, group in sorted(by_speed.items()):
        group.sort(key=lambda r: r.tau)
        ax.plot([r.tau for r in group], [r.mobile_se for r in group], marker="o", ms=3,
                label=f"moving, v={speed:g} m/s")
    taus = sorted({r.tau for r in rows})
    ax.plot(taus, [rows[0].hover_se] * len(taus), "k--", label="hovering")
    ax.set_xlabel("transmission time (s)")
    ax.set_ylabel("SE (bps/Hz)")
    ax.set_title(f"h={rows[0].height:g} m, R={rows[0].radius:g} m")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150)
    return path


def _bars(ax, results, value, title, ylabel):
    macs = sorted({r.mac.value for r in results})
    policies = []
    for r in results:
        if r.policy.value not in policies:
            policies.append(r.policy.value)
    width = 0.8 / max(len(macs), 1)
    for j, mac in enumerate(macs):
        xs, ys = [], []
        for i, policy in enumerate(policies):
            match = [r for r in results if r.mac.value == mac and r.policy.value == policy]
            v = value(match[0].stats) if match else None
            if v is not None:
                xs.append(i + (j - (len(macs) - 1) / 2) * width)
                ys.append(v)
        ax.bar(xs, ys, width=width, label=mac.upper())
    ax.set_xticks(range(len(policies)), policies)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.grid(True, axis="y", alpha=0.3)


def plot_scenarios(results, path):
    """2x2 panel: system SE, Jain index, turning angle, transmission time."""
    fig = Figure(figsize=(8.0, 6.0), layout="constrained")
    axes = fig.subplots(2, 2)
    _bars(axes[0, 0], results, lambda s: s.system_se, "system SE (inner cells)", "bps/Hz")
    _bars(axes[0, 1], results, lambda s: s.jain, "Jain index", "")
    _bars(axes[1, 0], results, lambda s: s.mean_turning_angle, "mean turning angle", "deg")
    _bars(axes[1, 1], results, lambda s: s.mean_transmission_time, "mean transmission time", "s")
    axes[0, 0].legend(fontsize=8)
    fig.savefig(path, dpi=150)
    return path

"""Command-line interface: scenario presets and deterministic file output.

Subcommands::

    green     dump shell density and boundary resolvent tables for one site
    scan      locate bound states of the configured junction
    field     evaluate a density or current grid over the window
    current   total current by two independent routes, plus j(e) samples
    scenario  run a named figure preset (fig3 ... fig9) or "custom"

Global flags ``--config``, ``--out-dir``, ``--tol``, ``--threads`` apply to
every subcommand.  Exit codes: 0 success, 2 configuration error,
3 convergence failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import green, scattering
from .config import ScenarioConfig, parse_config
from .errors import (BoundStateProximityError, ConfigError, ConvergenceError,
                     DomainError)
from .fields import CurrentField, DensityField, FieldEngine, Window
from .observables import equilibrium_density, spectral_total_current

DENSITY_HEADER = "x1,x2,value"
CURRENT_HEADER = "x1,x2,y1,y2,value"
PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "custom")


def _fmt(v) -> str:
    return format(float(v), ".12g")


def write_field_csv(field, path):
    """Write a density or current field as sorted CSV with LF endings."""
    path = Path(path)
    lines = []
    if isinstance(field, DensityField):
        lines.append(DENSITY_HEADER)
        for (x1, x2), v in zip(field.sites, field.values):
            lines.append(f"{x1},{x2},{_fmt(v)}")
    elif isinstance(field, CurrentField):
        lines.append(CURRENT_HEADER)
        for (x1, x2, y1, y2), v in zip(field.bonds, field.values):
            lines.append(f"{x1},{x2},{y1},{y2},{_fmt(v)}")
    else:
        raise DomainError(f"cannot serialize {type(field).__name__}")
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_table_csv(header, rows, path):
    """Write a generic numeric table as CSV with LF endings."""
    path = Path(path)
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


class RunSummary:
    """Ordered key-value report of one scenario run."""

    def __init__(self, scenario):
        self.items = [("scenario", scenario)]

    def add(self, key, value):
        self.items.append((key, value))

    def render(self) -> str:
        out = []
        for key, value in self.items:
            if isinstance(value, float):
                value = _fmt(value)
            out.append(f"{key}={value}")
        return "\n".join(out) + "\n"


def write_summary(summary: RunSummary, path):
    path = Path(path)
    path.write_text(summary.render(), newline="\n")
    return path


def _summarize_scenario(config: ScenarioConfig, summary: RunSummary):
    """Common numbers every scenario reports."""
    junction = config.junction()
    states = config.states()
    summary.add("rho_eq_1", equilibrium_density(states[0]))
    summary.add("rho_eq_2", equilibrium_density(states[1]))
    bound = scattering.find_bound_states(junction, tol=config.bound_tol)
    summary.add("bound_states", len(bound))
    for i, b in enumerate(bound):
        summary.add(f"bound_state_{i}_energy", b.energy)
        summary.add(f"bound_state_{i}_residual", b.residual)
    # a minimal window: the junction current needs no site fields
    engine = FieldEngine(junction, states, window=Window(0, 1, 0, 1),
                         nodes_per_panel=config.energy_nodes)
    J = engine.total_current()
    summary.add("J", J)
    summary.add("tol", config.tol)
    summary.add("bound_tol", config.bound_tol)
    return junction, states, engine, J


def _scenario_config(config: ScenarioConfig, preset, **overrides):
    """Preset parameters applied on top of the user config.

    Keys the user set explicitly and the preset must control are a
    conflict: report them instead of silently overriding.
    """
    controlled = set(overrides)
    if "t1" in overrides or "d1" in overrides:
        controlled |= {"contacts", "t2", "d2"}
    clash = sorted(controlled & config.overrides)
    if clash:
        raise ConfigError(
            f"preset {preset} overrides explicitly configured keys: "
            + ", ".join(clash))
    merged = {
        "mu1": config.mu1, "mu2": config.mu2,
        "beta1": config.beta1, "beta2": config.beta2,
        "contacts": config.contacts, "window": config.window,
        "energy_nodes": config.energy_nodes, "tol": config.tol,
        "bound_tol": config.bound_tol, "outputs": config.outputs,
        "overrides": config.overrides,
    }
    if "t1" in overrides or "d1" in overrides:
        t1 = overrides.pop("t1", 1.0)
        d1 = overrides.pop("d1", 1)
        merged["contacts"] = (((0, 0), (0, 0), t1),
                              ((d1, 0), (20, 0), 1.0))
    merged.update(overrides)
    return ScenarioConfig(**merged)


def _run_fig_density(config, preset, out_dir, summary):
    """fig3/fig4/fig5: fixed-energy density grids for three junctions."""
    cases = {
        "fig3": [("a", 0.3, "transmitted", 1.0, 1),
                 ("b", 0.3, "transmitted", 0.5, 1),
                 ("c", 0.3, "transmitted", 0.0, 1)],
        "fig4": [("a", 0.3, "reflected", 1.0, 1),
                 ("b", 0.3, "reflected", 0.5, 1),
                 ("c", 0.3, "reflected", 0.0, 1)],
        "fig5": [("a", 1.4, "transmitted", 1.0, 1),
                 ("b", 1.4, "transmitted", 1.0, 20),
                 ("c", 1.4, "transmitted", 0.0, 1)],
    }[preset]
    files = []
    for label, e, channel, t1, d1 in cases:
        sub = _scenario_config(config, preset, t1=t1, d1=d1)
        engine = FieldEngine(sub.junction(), sub.states(),
                             window=sub.resolved_window(),
                             nodes_per_panel=sub.energy_nodes)
        f = engine.density_spectral_field(channel, e)
        files.append(write_field_csv(f, out_dir / f"{preset}{label}.csv"))
        summary.add(f"{preset}{label}_max", float(np.max(f.values)))
    return files


def _run_fig6(config, preset, out_dir, summary):
    """Density profiles along one window row, all channels + reference."""
    sub = _scenario_config(config, preset, t1=1.0, d1=1)
    window = sub.resolved_window()
    row = window.x2_max - 1
    line = Window(window.x1_min, window.x1_max, row, row)
    engine = FieldEngine(sub.junction(), sub.states(), window=line,
                         nodes_per_panel=sub.energy_nodes)
    bound = scattering.find_bound_states(sub.junction(), tol=sub.bound_tol)
    tr = engine.density_field("transmitted")
    ref = engine.density_field("reflected")
    pt = engine.density_field("point", bound_states=bound)
    reference = equilibrium_density(sub.states()[1])
    rows = [(x1, row, a, b, c, a + b + c, reference)
            for (x1, x2), a, b, c in zip(tr.sites, tr.values, ref.values,
                                         pt.values)]
    path = write_table_csv(
        "x1,x2,transmitted,reflected,point,total,reference",
        rows, out_dir / "fig6.csv")
    summary.add("fig6_reference", reference)
    return [path]


def _spectral_current_samples(junction, lo, hi, n=101):
    es = np.linspace(lo, hi, n)
    return es, np.array([spectral_total_current(junction, e) for e in es])


def _run_fig7(config, preset, out_dir, summary):
    """Transmission trace j(e) against twice the single-contact trace."""
    sub = _scenario_config(config, preset, t1=1.0, d1=1)
    single = _scenario_config(config, preset, t1=0.0, d1=1)
    lo, hi = sorted((sub.mu2, sub.mu1))
    es, j = _spectral_current_samples(sub.junction(), lo, hi)
    _, j0 = _spectral_current_samples(single.junction(), lo, hi)
    path = write_table_csv("e,j,two_j0", zip(es, j, 2.0 * j0),
                           out_dir / "fig7.csv")
    summary.add("fig7_max_j", float(j.max()))
    summary.add("fig7_max_two_j0", float(2.0 * j0.max()))
    return [path]


def _run_fig_currents(config, preset, out_dir, summary):
    """fig8/fig9: bond currents across one horizontal cut of the window."""
    channel = "transmitted" if preset == "fig8" else "total"
    sub = _scenario_config(config, preset, t1=1.0, d1=1)
    window = sub.resolved_window()
    row = window.x2_max - 1
    strip = Window(window.x1_min, window.x1_max, row, row + 1)
    engine = FieldEngine(sub.junction(), sub.states(), window=strip,
                         nodes_per_panel=sub.energy_nodes)
    f = engine.current_field(channel)
    vertical = f.bonds[:, 1] != f.bonds[:, 3]
    cut = CurrentField(strip, channel, f.bonds[vertical],
                       f.values[vertical])
    path = write_field_csv(cut, out_dir / f"{preset}.csv")
    summary.add(f"{preset}_max_abs", float(np.max(np.abs(cut.values))))
    return [path]


def run_scenario(config: ScenarioConfig, preset: str, out_dir):
    """Evaluate one preset, write its files, and return the summary."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from "
                          + ", ".join(PRESETS))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    summary = RunSummary(preset)
    junction, states, engine, J = _summarize_scenario(config, summary)
    if preset in ("fig3", "fig4", "fig5"):
        files = _run_fig_density(config, preset, out_dir, summary)
    elif preset == "fig6":
        files = _run_fig6(config, preset, out_dir, summary)
    elif preset == "fig7":
        files = _run_fig7(config, preset, out_dir, summary)
    elif preset in ("fig8", "fig9"):
        files = _run_fig_currents(config, preset, out_dir, summary)
    else:  # custom: the configured outputs
        files = []
        for product in config.outputs:
            if product == "summary":
                continue
            kind, _, channel = product.partition(":")
            channel = channel or "total"
            if kind == "density":
                f = engine.density_field(channel)
            elif kind == "current":
                f = engine.current_field(channel)
            else:
                raise ConfigError(f"unknown output product {product!r}",
                                  field="outputs")
            files.append(write_field_csv(
                f, out_dir / f"{kind}_{channel}.csv"))
    summary.add("wall_time_s", round(time.perf_counter() - t0, 3))
    files.append(write_summary(summary, out_dir / f"{preset}_summary.txt"))
    return summary, files


# ---------------------------------------------------------------------------
# argument parsing and dispatch

def _load_config(args) -> ScenarioConfig:
    text = ""
    if args.config:
        text = Path(args.config).read_text()
    config = parse_config(text)
    if args.tol is not None:
        merged = dict(
            mu1=config.mu1, mu2=config.mu2, beta1=config.beta1,
            beta2=config.beta2, contacts=config.contacts,
            window=config.window, energy_nodes=config.energy_nodes,
            tol=args.tol, bound_tol=config.bound_tol,
            outputs=config.outputs, overrides=config.overrides)
        config = ScenarioConfig(**merged)
    return config


def _cmd_green(args, config, out_dir):
    try:
        site = tuple(int(p) for p in args.site.split(","))
        if len(site) != 2:
            raise ValueError
    except ValueError:
        raise ConfigError(f"--site expects 'm,n', got {args.site!r}")
    es = np.linspace(0.0, 4.0, args.nodes + 2)[1:-1]
    rows = []
    for e in es:
        p = green.shell_density(e, site)
        gp = green.green_boundary(e, +1, site)
        rows.append((e, p, gp.real, gp.imag))
    path = write_table_csv("e,p,gplus_re,gplus_im", rows,
                           out_dir / f"green_{site[0]}_{site[1]}.csv")
    print(path)
    return 0


def _cmd_scan(args, config, out_dir):
    bound = scattering.find_bound_states(config.junction(),
                                         tol=config.bound_tol)
    rows = [(b.energy, b.residual, b.norm_squared) for b in bound]
    path = write_table_csv("energy,residual,norm_squared", rows,
                           out_dir / "bound_states.csv")
    for b in bound:
        print(f"bound state at e = {_fmt(b.energy)} "
              f"(residual {b.residual:.2e})")
    if not bound:
        print("no bound states")
    print(path)
    return 0


def _cmd_field(args, config, out_dir):
    engine = FieldEngine(config.junction(), config.states(),
                         window=config.resolved_window(),
                         nodes_per_panel=config.energy_nodes)
    if args.kind == "density":
        if args.energy is None:
            f = engine.density_field(args.channel)
        else:
            f = engine.density_spectral_field(args.channel, args.energy)
    else:
        if args.energy is None:
            f = engine.current_field(args.channel)
        else:
            f = engine.current_spectral_field(args.channel, args.energy)
    tag = "" if args.energy is None else f"_e{_fmt(args.energy)}"
    path = write_field_csv(
        f, out_dir / f"{args.kind}_{args.channel}{tag}.csv")
    print(path)
    return 0


def _cmd_current(args, config, out_dir):
    junction = config.junction()
    states = config.states()
    engine = FieldEngine(junction, states, window=Window(0, 1, 0, 1),
                         nodes_per_panel=config.energy_nodes)
    J = engine.total_current()
    from .observables import total_current_bondwise
    J_bond = total_current_bondwise(junction, states, tol=config.tol)
    lo, hi = sorted((config.mu2, config.mu1))
    if hi > lo:
        es, j = _spectral_current_samples(junction, lo, hi, args.samples)
    else:
        es, j = np.zeros(0), np.zeros(0)
    path = write_table_csv("e,j", zip(es, j), out_dir / "current.csv")
    print(f"J={_fmt(J)}")
    print(f"J_bondwise={_fmt(J_bond)}")
    print(path)
    return 0


def _cmd_scenario(args, config, out_dir):
    summary, files = run_scenario(config, args.preset, out_dir)
    sys.stdout.write(summary.render())
    for f in files:
        print(f)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tunnel2d",
        description="Stationary transport between tunneling-coupled "
                    "2-D lattice gases.")
    parser.add_argument("--config", help="path to a key-value config file")
    parser.add_argument("--out-dir", default=".",
                        help="directory for output files")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the quadrature tolerance")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap the linear-algebra thread pool")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("green", help="dump P(e) and g+(e) for one site")
    p.add_argument("--site", default="0,0")
    p.add_argument("--nodes", type=int, default=200)
    p.set_defaults(func=_cmd_green)

    p = sub.add_parser("scan", help="locate bound states")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("field", help="evaluate a density or current grid")
    p.add_argument("--kind", choices=("density", "current"),
                   default="density")
    p.add_argument("--channel", default="total")
    p.add_argument("--energy", type=float, default=None,
                   help="fixed-energy spectral field instead of integrated")
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("current", help="total current and j(e) samples")
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(func=_cmd_current)

    p = sub.add_parser("scenario", help="run a figure preset")
    p.add_argument("preset", choices=PRESETS)
    p.set_defaults(func=_cmd_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads is not None:
            import threadpoolctl
            threadpoolctl.threadpool_limits(limits=args.threads)
        config = _load_config(args)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args, config, out_dir)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, BoundStateProximityError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

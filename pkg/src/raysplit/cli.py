"""Command line entry point: ``raysplit <subcommand> --scenario FILE --out DIR``.

Exit codes: 0 success or all observed, 1 usage or validation error,
2 undetermined, 3 trapped witness.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import svg
from .errors import ConfigError, RaysplitError
from .scenario import Scenario, dump_scenario, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_UNDETERMINED, EXIT_TRAPPED = 0, 1, 2, 3

ENV_CAPS = {"RAYSPLIT_DEPTH_CAP": "depth_cap", "RAYSPLIT_MAX_EVENTS": "max_events",
            "RAYSPLIT_MAX_ITER": "max_iter"}


class UsageError(RaysplitError):
    pass


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        g = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 128x64, got {text!r}")
    if min(g) < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return g


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "undetermined"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="raysplit", description="Two-medium ray-splitting billiards toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("trace", "grow the splitting tree of the [start] germ"),
                        ("construct", "iterate the observation-region construction"),
                        ("check-ueg", "uniform escape check on the unobserved inner arc"),
                        ("check-trap", "search for trapped periodic rays"),
                        ("check-gcc", "single-medium geometric control check"),
                        ("check-obs", "sampled two-medium observability check"),
                        ("ellipse", "ellipse billiard lab")]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--scenario", required=True, help="scenario config file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--grid", type=_grid, help="sampling grid NxM")
        sp.add_argument("--depth", type=int, help="depth cap")
        sp.add_argument("--horizon", type=float, help="time horizon T")
        sp.add_argument("--seed", type=int, help="rng seed")
    return p


def apply_overrides(scn: Scenario, args, environ=os.environ) -> Scenario:
    changes = {}
    for var, attr in ENV_CAPS.items():
        if environ.get(var):
            try:
                changes[attr] = int(environ[var])
            except ValueError:
                raise ConfigError(f"{var} must be an integer, got {environ[var]!r}")
    if args.depth is not None:
        changes["depth_cap"] = args.depth
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.seed is not None:
        changes["seed"] = args.seed
    return scn.replace(**changes).validate() if changes else scn


class Output:
    """Collects artifacts and writes them once at the end."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict[str, str] = {}
        self.report: list[str] = []

    def line(self, text: str = "") -> None:
        self.report.extend(text.split("\n"))

    def write(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.files["report.txt"] = "\n".join(self.report) + "\n"
        for name, text in self.files.items():
            (self.root / name).write_text(text, encoding="utf-8")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _scene(scn: Scenario) -> list[svg.Element]:
    els = [svg.curve_element(scn.outer_curve, label="outer")]
    if scn.inner_curve is not None:
        els.append(svg.curve_element(scn.inner_curve, "gray", label="inner"))
    return els


def _arc_row(arc) -> str:
    if arc.full:
        return "full"
    if arc.empty:
        return "empty"
    return f"{arc.lo!r} {arc.hi!r}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_trace(scn, args, out: Output) -> int:
    from .tracer import phase_point, trace

    st = scn.start
    p0 = phase_point(scn, st.boundary, st.s, st.theta, st.medium, st.time)
    tree = trace(scn, p0)
    out.files["events.csv"] = tree.to_csv()
    out.files["edges.csv"] = _csv(
        ["id", "medium", "src", "dst", "t0", "t1", "x0", "y0", "x1", "y1", "depth", "leaf"],
        [(e.id, e.medium, "" if e.src is None else e.src, "" if e.dst is None else e.dst, e.t0, e.t1,
          e.start[0], e.start[1], e.end[0], e.end[1], e.depth, e.leaf or "") for e in tree.edges])
    els = _scene(scn) + [svg.arc_element(scn.outer_curve, scn.gamma, label="Gamma")]
    colors = {1: "blue", 2: "green"}
    for e in tree.edges:
        if e.length > 0:
            els.append(svg.polyline_element([e.start, e.end], colors[e.medium], f"edge {e.id}"))
    out.files["tree.svg"] = svg.render_svg(els)
    leaves = {}
    for e in tree.leaves():
        leaves[str(e.leaf)] = leaves.get(str(e.leaf), 0) + 1
    out.line(f"events: {len(tree.nodes)}")
    out.line(f"edges: {len(tree.edges)}")
    for k in sorted(leaves):
        out.line(f"leaves {k}: {leaves[k]}")
    return EXIT_OK


def _construct(scn):
    from .regions import construct

    return construct(scn, strict=False)


def cmd_construct(scn, args, out: Output) -> int:
    from .regions import WitnessMismatch, witness_x02
    from .errors import DegenerateGeometry

    st = _construct(scn)
    out.line("\n".join(st.report_lines()))
    out.line(f"gamma1: {_arc_row(st.gamma1)}")
    out.line(f"gamma2: {_arc_row(st.gamma2)}")
    try:
        w = witness_x02(scn, st.gamma2)
        out.line(f"witness x0': {float(w[0])!r} {float(w[1])!r}")
    except (WitnessMismatch, DegenerateGeometry) as exc:
        out.line(f"witness x0': none ({exc})")
    out.files["history.csv"] = _csv(["iter", "g1_lo", "g1_hi", "g2_lo", "g2_hi"],
                                    [(n, g1.lo, g1.hi, g2.lo, g2.hi) for n, g1, g2 in st.history])
    els = _scene(scn)
    for _, g1, g2 in st.history:
        if not g1.empty:
            els.append(svg.arc_element(scn.outer_curve, g1, "red"))
        if not g2.empty:
            els.append(svg.arc_element(scn.inner_curve, g2, "orange"))
    out.files["construction.svg"] = svg.render_svg(els)
    return EXIT_UNDETERMINED if st.reason == "budget" else EXIT_OK


def cmd_check_ueg(scn, args, out: Output) -> int:
    from .escape import is_uniformly_escaping

    st = _construct(scn)
    prof = is_uniformly_escaping(scn, st.gamma2)
    out.files["escape.csv"] = prof.to_csv()
    out.line(f"gamma2: {_arc_row(st.gamma2)}")
    out.line(f"uniformly escaping: {str(prof.ueg).lower()}")
    out.line(f"samples: {len(prof.s)} spacing {prof.spacing!r}")
    out.line(f"violations: {len(prof.violations)}")
    out.line(f"stable under refinement: {str(prof.stable).lower()}")
    return EXIT_OK if prof.ueg else EXIT_UNDETERMINED


def _orbit_rows(orbs):
    return _csv(["orbit", "period", "length", "time", "mechanism", "vertex", "boundary", "x", "y"],
                [(i, o.period, o.length, o.time, o.mechanism, k, b, p[0], p[1])
                 for i, o in enumerate(orbs) for k, (b, p) in enumerate(zip(o.boundaries, o.points))])


def _orbit_svg(scn, gamma, orbs) -> str:
    els = _scene(scn)
    if not gamma.full:
        els.append(svg.arc_element(scn.outer_curve, gamma, label="Gamma"))
    for i, o in enumerate(orbs):
        els.append(svg.polyline_element(o.points, "purple", f"orbit {i}", closed=True))
    return svg.render_svg(els)


def cmd_check_trap(scn, args, out: Output) -> int:
    from .escape import check_thmtrap_hypothesis, find_trapped_rays

    g1 = scn.gamma
    orbs = find_trapped_rays(scn, g1, None, grid=args.grid)
    out.line(f"trapped orbits: {len(orbs)}")
    for i, o in enumerate(orbs):
        out.line(f"orbit {i}: period {o.period} length {o.length!r} mechanism {o.mechanism} "
                 f"residual {o.residual:.3e}")
    if scn.inner_curve is not None:
        st = _construct(scn)
        hv = check_thmtrap_hypothesis(scn, st.gamma1, st.gamma2)
        out.line(f"trap hypothesis holds: {str(hv.holds).lower()} ({hv.checked} rays, "
                 f"{len(hv.violations)} violations)")
    out.files["orbits.csv"] = _orbit_rows(orbs)
    out.files["orbits.svg"] = _orbit_svg(scn, g1, orbs)
    return EXIT_TRAPPED if orbs else EXIT_OK


def cmd_check_gcc(scn, args, out: Output) -> int:
    from .gcc import check_gcc_simple

    if scn.inner_curve is not None:
        raise UsageError("check-gcc is a single-medium check; remove the [inner] section")
    res = check_gcc_simple(scn.outer_curve, scn.gamma, scn.horizon, args.grid or scn.gcc_grid, scn.c1)
    out.line(f"gcc: {'pass' if res.passed else 'fail'}")
    if res.passed:
        out.line(f"max time: {res.max_time!r}")
        return EXIT_OK
    out.line(f"failing samples: {res.failures}")
    for w in res.witnesses:
        out.line(f"periodic witness: period {w['period']} s {w['s']!r} theta {w['theta']!r}")
    els = _scene(scn) + [svg.arc_element(scn.outer_curve, scn.gamma, label="Gamma")]
    for w in res.witnesses:
        els.append(svg.polyline_element(w["points"], "purple", f"period {w['period']}", closed=True))
    out.files["gcc.svg"] = svg.render_svg(els)
    return EXIT_TRAPPED if res.witnesses else EXIT_UNDETERMINED


def cmd_check_obs(scn, args, out: Output) -> int:
    from .gcc import check_observability

    rep = check_observability(scn, grid=args.grid)
    out.line(rep.summary())
    out.files["samples.csv"] = rep.rows()
    if rep.trapped:
        for i, o in enumerate(rep.trapped):
            out.line(f"orbit {i}: period {o.period} length {o.length!r}")
        out.files["orbits.csv"] = _orbit_rows(rep.trapped)
        out.files["trapped.svg"] = _orbit_svg(scn, scn.gamma, rep.trapped)
    return rep.exit_code


def cmd_ellipse(scn, args, out: Output) -> int:
    from . import ellipse_lab as el

    if scn.inner_curve is not None:
        raise UsageError("the ellipse lab needs a scenario without an [inner] section")
    ell = scn.outer_curve
    rng = np.random.default_rng(scn.seed)
    n_orb, n_b = args.grid or (200, 200)
    s = rng.random(n_orb)
    th = rng.uniform(0.05, math.pi - 0.05, n_orb)
    codes = el.orbit_classes(ell, s, th, n_b)
    changed = int((codes != codes[0]).any(axis=0).sum())
    out.line(f"caustic orbits: {n_orb} x {n_b} bounces, class changes: {changed}")
    out.files["caustics.csv"] = _csv(["s", "theta", "class"],
                                     [(a, b, str(el.code_name(c))) for a, b, c in zip(s, th, codes[0])])
    f1, _ = el.foci(ell)
    top = ell.point_at(0.25)
    run = el.focal_convergence(ell, top, 200)
    out.line(f"focal run from s=0.25: final |y| {abs(run.ys[-1]):.3e}")
    out.files["focal.csv"] = run.to_csv()
    found = el.search_both_sides(ell)
    els = [svg.curve_element(ell, label="ellipse"), svg.point_element(f1, "red", "F1")]
    if found is None:
        out.line("both-sides configuration: none found")
    else:
        x1, arc = found
        a, b = el.both_sides_gcc(ell, arc, scn.horizon, scn.gcc_grid)
        out.line(f"lemel arc: {_arc_row(arc)} x1 {float(x1[0])!r} {float(x1[1])!r}")
        out.line(f"gamma(x0) form: {el.is_gamma_x0_form(ell, arc) is not None}".lower())
        out.line(f"gcc on arc: {'pass' if a.passed else 'fail'}; on complement: "
                 f"{'n/a' if b is None else ('pass' if b.passed else 'fail')}")
        els.append(svg.arc_element(ell, arc, "red", label="Gamma"))
    out.files["ellipse.svg"] = svg.render_svg(els + [svg.polyline_element(run.points[:12], "blue", "focal")])
    return EXIT_OK


COMMANDS = {"trace": cmd_trace, "construct": cmd_construct, "check-ueg": cmd_check_ueg,
            "check-trap": cmd_check_trap, "check-gcc": cmd_check_gcc, "check-obs": cmd_check_obs,
            "ellipse": cmd_ellipse}


def run(command: str, scn: Scenario, out_dir, args=None) -> int:
    """Execute one subcommand and write its artifacts to ``out_dir``."""
    if args is None:
        args = argparse.Namespace(grid=None, depth=None, horizon=None, seed=None)
    out = Output(Path(out_dir))
    out.line(f"command: {command}")
    code = COMMANDS[command](scn, args, out)
    out.line(f"exit: {code}")
    out.files["scenario.cfg"] = dump_scenario(scn)
    out.write()
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn = apply_overrides(load_scenario(args.scenario), args)
        if args.command == "check-obs" and args.grid:
            scn = scn.replace(obs_grid=args.grid)
        code = run(args.command, scn, args.out, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RaysplitError as exc:
        print(f"error: {args.scenario}: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print((Path(args.out) / "report.txt").read_text(encoding="utf-8"), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())

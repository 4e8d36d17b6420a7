"""Command line interface: ``cartv <command> [options]``.

Every option may also come from a ``key = value`` file given with
``--config``; command-line flags override the file.  Exit status is 0 on
success, 1 on usage errors and 2 when a solve that should converge does not.
"""

from __future__ import annotations

import argparse
import ast
import logging
import sys
from pathlib import Path

from . import __version__
from .certify import verify_dual_conditions
from .core_ops import freq_range
from .experiments import CONDITIONS, ExperimentSpec, PhaseSpec, phase_transition, run_experiment
from .io import (
    read_kv,
    read_mask_csv,
    read_tvls,
    write_csv,
    write_kv,
    write_mask_csv,
    write_mask_pgm,
    write_pgm,
    write_support_csv,
    write_tvls,
)
from .phantoms import KINDS, make_phantom
from .sampling import (
    LineSamplingSpec,
    cartesian_line_set,
    draw_theorem_sampling,
    oriented_line_sampling,
    uniform_pointwise_mask,
    variable_density_mask,
)
from .solver import SolverConfig, error_metrics, measure, solve_tv
from .structure import gradient_supports

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2

MASK_MODES = ("theorem-lines", "deterministic-lines", "uniform-points", "variable-density",
              "oriented-lines-a", "oriented-lines-b")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _value(text: str):
    """Literal value when it parses as one, otherwise the raw string."""
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":")
        return tuple(range(int(lo), int(hi)))
    return tuple(int(v) for v in text.replace(",", " ").split())


def _params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        out[key.strip()] = _value(value.strip())
    return out


def _common(parser):
    parser.add_argument("--config", help="key = value file providing defaults for any option")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--n", type=int, default=64, help="image side length")
    parser.add_argument("-v", "--verbose", action="store_true")


def _solver_opts(parser):
    parser.add_argument("--max-iters", type=int, default=50000)
    parser.add_argument("--tol-feas", type=float, default=1e-9)
    parser.add_argument("--tol-change", type=float, default=1e-10)
    parser.add_argument("--step-primal", type=float)
    parser.add_argument("--step-dual", type=float)


def _sampling_opts(parser):
    parser.add_argument("--M1", type=int)
    parser.add_argument("--M2", type=int)
    parser.add_argument("--m1", type=int, default=0)
    parser.add_argument("--m2", type=int, default=0)
    parser.add_argument("--m", type=int, dest="m_points", help="pointwise budget")
    parser.add_argument("--M-random", type=int, default=16)
    parser.add_argument("--m-random", type=int, default=10)
    parser.add_argument("--M-low", type=int, default=4)


def _phantom_opts(parser, default="line-grid"):
    parser.add_argument("--kind", default=default, choices=KINDS)
    parser.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="phantom parameter, repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cartv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mask", help="draw a sampling set")
    _common(p)
    p.add_argument("--mode", default="theorem-lines", choices=MASK_MODES)
    _sampling_opts(p)

    p = sub.add_parser("phantom", help="generate a test image and its structure report")
    _common(p)
    _phantom_opts(p)

    p = sub.add_parser("solve", help="recover an image from sampled Fourier data")
    _common(p)
    p.add_argument("--image", required=True, help="ground-truth TVLS image to sample")
    p.add_argument("--mask", required=True, help="sampling set CSV written by 'mask'")
    p.add_argument("--delta", type=float, default=0.0)
    _solver_opts(p)

    p = sub.add_parser("certify", help="check the line-wise dual certificate conditions")
    _common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True, help="line-structured sampling set CSV")
    p.add_argument("--no-refine", action="store_true")

    p = sub.add_parser("experiment", help="run a seeded recovery experiment")
    _common(p)
    p.add_argument("--name", default="experiment")
    _phantom_opts(p)
    p.add_argument("--conditions", default="deterministic-lines",
                   help=f"comma-separated subset of {', '.join(CONDITIONS)}")
    _sampling_opts(p)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seeds", default=None, help="'0:10' or '1,2,5'; defaults to --seed")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--gating", default=None, help="comma-separated conditions that must converge")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-images", action="store_true")
    _solver_opts(p)

    p = sub.add_parser("phase", help="success-rate sweep over line budgets")
    _common(p)
    p.add_argument("--name", default="phase")
    _phantom_opts(p, default="random-piecewise")
    p.add_argument("--grid", default="", help="cells 'm1xm2' separated by ';', 'full' for the bandwidth")
    p.add_argument("--C", default="", help="comma-separated constants for theorem-budget cells")
    p.add_argument("--M1", type=int)
    p.add_argument("--M2", type=int)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seeds", default=None)
    p.add_argument("--workers", type=int, default=1)
    _solver_opts(p)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in _COMMANDS), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    try:
        values = read_kv(known.config)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    sub = parser._subparsers._group_actions[0].choices[command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, text in values.items():
        action = dests.get(key.replace("-", "_")) or dests.get(key)
        if action is None or action.dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for '{command}'")
        if action.dest == "param":
            defaults["param"] = [v.strip() for v in text.split(";") if v.strip()]
        elif action.const is True or action.const is False:
            defaults[action.dest] = text.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[action.dest] = action.type(text)
            except ValueError as exc:
                raise UsageError(f"bad value for {key!r}: {text!r}") from exc
        else:
            defaults[action.dest] = text
        # a value from the file satisfies a required flag
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters, tol_feas=args.tol_feas, tol_change=args.tol_change,
                        step_primal=args.step_primal, step_dual=args.step_dual)


def _seeds(args) -> tuple[int, ...]:
    return _int_list(args.seeds) if args.seeds else (args.seed,)


def _cmd_mask(args, out: Path) -> int:
    n = args.n
    mode = args.mode
    if mode in ("theorem-lines", "deterministic-lines"):
        if args.M1 is None or args.M2 is None:
            raise UsageError("--M1 and --M2 are required for line modes")
        omega = draw_theorem_sampling(LineSamplingSpec(n, args.M1, args.M2, args.m1, args.m2, args.seed,
                                                       deterministic=mode == "deterministic-lines"))
    elif mode in ("uniform-points", "variable-density"):
        m = args.m_points
        if m is None:
            if args.M1 is None or args.M2 is None:
                raise UsageError("give --m, or --M1 and --M2 to match a line budget")
            m = cartesian_line_set(freq_range(args.M1), freq_range(args.M2), n).m
        draw = uniform_pointwise_mask if mode == "uniform-points" else variable_density_mask
        omega = draw(n, m, args.seed)
    else:
        omega = oriented_line_sampling(n, args.M_random, args.m_random, args.M_low, args.seed,
                                       orientation=mode[-1])
    write_mask_csv(out / "mask.csv", omega)
    write_mask_pgm(out / "mask.pgm", omega)
    print(f"m = {omega.m} ({omega.m / n**2:.4f} of the grid)")
    return EXIT_OK


def _cmd_phantom(args, out: Path) -> int:
    ph = make_phantom(args.kind, args.n, args.seed, **_params(args.param))
    write_tvls(out / "phantom.tvls", ph.image)
    write_pgm(out / "phantom.pgm", ph.image)
    write_support_csv(out / "delta1.csv", ph.delta1)
    write_support_csv(out / "delta2.csv", ph.delta2)
    (out / "structure.txt").write_text(ph.structure.to_text())
    print(ph.structure.to_text(), end="")
    return EXIT_OK


def _cmd_solve(args, out: Path) -> int:
    x = read_tvls(args.image)
    omega = read_mask_csv(args.mask)
    if omega.n != x.shape[0]:
        raise UsageError(f"mask size {omega.n} does not match image size {x.shape[0]}")
    result = solve_tv(measure(x, omega, args.delta, args.seed), _solver_config(args))
    d1, d2 = gradient_supports(x)
    metrics = error_metrics(x, result.xhat, d1, d2)
    write_tvls(out / "recon.tvls", result.xhat)
    write_pgm(out / "recon.pgm", result.xhat)
    summary = {
        "iterations": result.iterations,
        "converged": result.converged,
        "feas_violation": result.feas_violation,
        "objective": result.objective,
        **metrics.as_dict(),
    }
    write_kv(out / "metrics.txt", summary)
    for key, value in summary.items():
        print(f"{key} = {value}")
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def _cmd_certify(args, out: Path) -> int:
    x = read_tvls(args.image)
    omega = read_mask_csv(args.mask)
    if omega.kind != "lines":
        raise UsageError("certification needs a line-structured sampling set")
    d1, d2 = gradient_supports(x)
    report = verify_dual_conditions(x, d1, d2, omega.omega1, omega.omega2, refine=not args.no_refine)
    write_csv(out / "certificate.csv", report.csv_rows())
    (out / "certificate.txt").write_text(report.summary_text())
    print(report.summary_text(), end="")
    return EXIT_OK


def _cmd_experiment(args, out: Path) -> int:
    conditions = tuple(c.strip() for c in args.conditions.split(",") if c.strip())
    gating = None if args.gating is None else tuple(c.strip() for c in args.gating.split(",") if c.strip())
    try:
        spec = ExperimentSpec(
            name=args.name, phantom=args.kind, phantom_params=_params(args.param), n=args.n,
            conditions=conditions, M1=args.M1, M2=args.M2, m1=args.m1, m2=args.m2,
            m_points=args.m_points, M_random=args.M_random, m_random=args.m_random, M_low=args.M_low,
            delta=args.delta, seeds=_seeds(args), solver=_solver_config(args), certify=args.certify,
            gating=gating, out_dir=str(out), workers=args.workers, write_images=not args.no_images,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = run_experiment(spec)
    failed = False
    for row in rows:
        print(f"seed={row['seed']} {row['condition']}: rel_err={row['rel_err']:.3e} "
              f"converged={row['converged']} success={row['success']}")
        failed |= row["gating"] and not row["converged"]
    return EXIT_NONCONVERGED if failed else EXIT_OK


def _grid(text: str) -> tuple:
    cells = []
    for cell in text.split(";"):
        cell = cell.strip()
        if not cell:
            continue
        a, sep, b = cell.partition("x")
        if not sep:
            raise UsageError(f"grid cells look like 'm1xm2', got {cell!r}")
        cells.append(tuple(v if v == "full" else int(v) for v in (a.strip(), b.strip())))
    return tuple(cells)


def _cmd_phase(args, out: Path) -> int:
    C_values = tuple(float(v) for v in args.C.replace(",", " ").split())
    try:
        spec = PhaseSpec(
            phantom=args.kind, phantom_params=_params(args.param), n=args.n, grid=_grid(args.grid),
            C_values=C_values, M1=args.M1, M2=args.M2, eps=args.eps, delta=args.delta,
            seeds=_seeds(args), solver=_solver_config(args), name=args.name, out_dir=str(out),
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for row in phase_transition(spec):
        print(f"{row['cell']}: m1={row['m1']} m2={row['m2']} success_rate={row['success_rate']:.2f} "
              f"budget=({row['budget_m1']:.1f}, {row['budget_m2']:.1f})")
    return EXIT_OK


_COMMANDS = {
    "mask": _cmd_mask,
    "phantom": _cmd_phantom,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "experiment": _cmd_experiment,
    "phase": _cmd_phase,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"cartv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"cartv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

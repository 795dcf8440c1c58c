"""Command-line entry point: ``python -m monopoisson <command> [options]``.

Every command writes a table (CSV by default, or JSON with an envelope
``{"command", "config", "data"}``) to ``--output`` or standard output.
Exit codes: 0 success, 1 numeric-domain error or failed verification,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import analytic, lambertw, moments, pathstats, verify
from .analytic import FinalKind, LaplaceMethod
from .curves import Branch, curve_eval
from .lambertw import DomainError
from .simulate import (DEFAULT_DS, DEFAULT_DT, DEFAULT_HORIZON, DEFAULT_SEED,
                       MonteCarloConfig, SimulationError, monte_carlo)

OUTPUT_DIR_ENV = "MONOPOISSON_OUTPUT_DIR"
_COMMON = ("command", "output", "format", "config")


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict[str, Any]
    output_path: str | None = None
    output_format: str = "csv"


class UsageError(Exception):
    pass


# --- formatting ---------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(table: Table, config: RunConfig) -> str:
    if config.output_format == "json":
        data = {k: _jsonable(v) for k, v in table.meta.items()}
        data["rows"] = [{c: _jsonable(v) for c, v in zip(table.columns, r)} for r in table.rows]
        envelope = {"command": config.command,
                    "config": {k: _jsonable(v) if not isinstance(v, list) else [_jsonable(x) for x in v]
                               for k, v in config.params.items()},
                    "data": data}
        return json.dumps(envelope, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in table.meta.items():
        buf.write(f"# {key}={_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# --- validation -------------------------------------------------------------------


def _positive(params, *names):
    for name in names:
        value = params[name]
        values = value if isinstance(value, list) else [value]
        for v in values:
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"--{name.replace('_', '-')} must be > 0, got {v}")


def _mc_config(p, horizon=None) -> MonteCarloConfig:
    _positive(p, "paths", "dt", "ds")
    h = p["horizon"] if horizon is None else horizon
    if not (math.isfinite(h) and h >= 0):
        raise DomainError(f"--horizon must be >= 0, got {h}")
    return MonteCarloConfig(n_paths=int(p["paths"]), dt=p["dt"], ds=p["ds"], horizon=h,
                            master_seed=int(p["seed"]))


# --- commands ---------------------------------------------------------------------


def cmd_wfun(p) -> Table:
    if p["cut"]:
        rows = []
        for x in p["cut"]:
            pt = lambertw.boundary_solve(x)
            rows.append([pt.x, pt.u, pt.v])
        return Table(["x", "u", "v"], rows)
    if not p["x"]:
        raise UsageError("wfun needs --x or --cut")
    rows = []
    for x in p["x"]:
        if not (-lambertw.INV_E * (1 + 1e-15) <= x <= 0):
            raise DomainError(f"--x must lie in [-1/e, 0], got {x}")
        rows.append([x, lambertw.w0_real(x), lambertw.wm1_real(x) if x < 0 else -math.inf])
    return Table(["x", "w0", "wm1"], rows)


def _support_grid(t, n):
    lo, hi = curve_eval(Branch.LOWER, t), curve_eval(Branch.UPPER, t)
    return np.linspace(lo, hi, n)


def cmd_density(p) -> Table:
    if p["t"] is None:
        raise UsageError("density needs --t")
    _positive(p, "t", "grid")
    t = p["t"]
    ys = _support_grid(t, int(p["grid"]))
    if p["kind"] == "y":
        dens = analytic.density_Y(t, ys)
        return Table(["y", "density"], [[y, d] for y, d in zip(ys, dens)],
                     {"atom_at_0": analytic.atom_Y(t)})
    dens = analytic.density_Z(t, ys)
    return Table(["z", "density"], [[y, d] for y, d in zip(ys, dens)])


def cmd_cdf(p) -> Table:
    _positive(p, "grid")
    n = int(p["grid"])
    kind = p["kind"]
    if kind in ("ginf", "j"):
        _positive(p, "tmax")
        fk = FinalKind.G_INF if kind == "ginf" else FinalKind.J
        ts = np.linspace(0.0, p["tmax"], n)
        return Table(["t", "cdf"], [[t, analytic.cdf_final(fk, t)] for t in ts])
    _positive(p, "t")
    t = p["t"]
    fn = {"y": analytic.cdf_Y, "z": analytic.cdf_Z, "y_positive": analytic.cdf_Y_positive}[kind]
    return Table(["x", "cdf"], [[x, fn(t, x)] for x in _support_grid(t, n)])


def cmd_moments(p) -> Table:
    ns = p["n"]
    for n in ns:
        if not 0 <= n <= moments.MAX_N:
            raise DomainError(f"--n must lie in [0, {moments.MAX_N}], got {n}")
    if p["coeffs"]:
        rows = [[n, k, int(c)] for n in ns for k, c in enumerate(moments.moment_poly(n).coeffs)]
        return Table(["n", "k", "coefficient_of_t^k/k!"], rows)
    for t in p["t"]:
        if not (math.isfinite(t) and t >= 0):
            raise DomainError(f"--t must be >= 0, got {t}")
    return Table(["n", "t", "moment"], [[n, t, moments.moment_eval(n, t)] for n in ns for t in p["t"]])


def cmd_laplace(p) -> Table:
    _positive(p, "p")
    kinds = list(FinalKind) if p["kind"] == "both" else [
        FinalKind.G_INF if p["kind"] == "ginf" else FinalKind.J]
    rows = []
    for kind in kinds:
        for s in p["p"]:
            quad = analytic.laplace(kind, s, LaplaceMethod.QUADRATURE)
            closed = analytic.laplace(kind, s, LaplaceMethod.CLOSED_FORM)
            rows.append([kind.value, s, quad, closed, abs(quad - closed)])
    return Table(["kind", "p", "quadrature", "closed_form", "abs_error"], rows)


def _path_rows(path):
    hits = np.zeros(len(path.times), dtype=bool)
    hits[path.level_hits] = True
    return path.times, path.y, hits


def cmd_simulate(p) -> Table:
    cfg = _mc_config(p)
    recs = monte_carlo(cfg, _path_rows)
    rows = [[i, t, y, h] for i, (ts, ys, hs) in enumerate(recs) for t, y, h in zip(ts, ys, hs)]
    return Table(["path", "t", "y", "is_level_hit"], rows)


def _levelset_record(deltas):
    def extract(path):
        stats = [pathstats.level_set_stats(path, d) for d in deltas]
        return path.s0, path.g_inf_realized, stats
    return extract


def cmd_levelset(p) -> Table:
    cfg = _mc_config(p)
    _positive(p, "delta")
    recs = monte_carlo(cfg, _levelset_record(p["delta"]))
    rows = [[i, s0, g, d, st.measure_estimate, st.min_hit, st.max_hit]
            for i, (s0, g, stats) in enumerate(recs) for d, st in zip(p["delta"], stats)]
    return Table(["path", "s0", "g_inf", "delta", "measure_estimate", "min_hit", "max_hit"], rows)


def cmd_localtime(p) -> Table:
    _positive(p, "t")
    t, level = p["t"], p["level"]
    cfg = _mc_config(p, horizon=max(p["horizon"] or t, t))
    correct = not p["no_jump_correction"]
    contrib = monte_carlo(cfg, lambda path: pathstats.local_time_contribution(path, t, level, correct))
    est = pathstats.summarize_local_time(contrib)
    ref = pathstats.local_time_reference(t, level)
    return Table(["t", "level", "estimate", "std_error", "reference", "n_paths"],
                 [[t, level, est.value, est.std_error, ref, est.n_paths]])


def cmd_poisson_limit(p) -> Table:
    _positive(p, "lam")
    tv = pathstats.poisson_limit_demo(pathstats.PoissonFamily(p["family"]), p["lam"], p["n"],
                                      seed=int(p["seed"]))
    return Table(["n", "tv"], [[n, d] for n, d in zip(p["n"], tv)])


def cmd_verify(p) -> Table:
    checks = verify.run_suite(p["suite"], seed=int(p["seed"]), n_paths=p["paths"])
    rows = [[c.name, c.value, c.target, c.tolerance, c.error, c.passed] for c in checks]
    return Table(["check", "value", "target", "tolerance", "error", "passed"], rows,
                 {"failed": sum(not c.passed for c in checks)})


COMMANDS = {
    "wfun": cmd_wfun, "density": cmd_density, "cdf": cmd_cdf, "moments": cmd_moments,
    "laplace": cmd_laplace, "simulate": cmd_simulate, "levelset": cmd_levelset,
    "localtime": cmd_localtime, "poisson-limit": cmd_poisson_limit, "verify": cmd_verify,
}


# --- parser --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _mc_args(sp, paths=10, horizon=DEFAULT_HORIZON):
    sp.add_argument("--paths", type=int, default=paths, help="number of paths")
    sp.add_argument("--dt", type=float, default=DEFAULT_DT, help="Y-clock grid step")
    sp.add_argument("--ds", type=float, default=DEFAULT_DS, help="K-clock grid step")
    sp.add_argument("--horizon", type=float, default=horizon)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV})")
    common.add_argument("--config", help="JSON file of option values; flags override it")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    parser = _Parser(prog="monopoisson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("wfun", parents=[common], help="real Lambert W branches or the branch cut")
    sp.add_argument("--x", type=float, nargs="+", default=[])
    sp.add_argument("--cut", type=float, nargs="+", default=[],
                    help="offsets x >= 0 for W-1(-exp(-1 + x)) = u + iv")

    sp = sub.add_parser("density", parents=[common], help="density of Y_t or Z_t + t")
    sp.add_argument("--t", type=float, default=None, help="time (required)")
    sp.add_argument("--grid", type=int, default=512)
    sp.add_argument("--kind", choices=("y", "z"), default="y")

    sp = sub.add_parser("cdf", parents=[common], help="distribution functions")
    sp.add_argument("--kind", choices=("y", "z", "y_positive", "ginf", "j"), default="y")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--tmax", type=float, default=10.0)
    sp.add_argument("--grid", type=int, default=256)

    sp = sub.add_parser("moments", parents=[common], help="moment polynomials of Z_t + t")
    sp.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, 4])
    sp.add_argument("--t", type=float, nargs="+", default=[1.0])
    sp.add_argument("--coeffs", action="store_true", help="print coefficients of t^k/k! instead")

    sp = sub.add_parser("laplace", parents=[common], help="Laplace transforms, quadrature vs closed form")
    sp.add_argument("--p", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    sp.add_argument("--kind", choices=("ginf", "j", "both"), default="both")

    sp = sub.add_parser("simulate", parents=[common], help="export simulated paths on the grid")
    _mc_args(sp)

    sp = sub.add_parser("levelset", parents=[common], help="level-set statistics per path")
    _mc_args(sp)
    sp.add_argument("--delta", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])

    sp = sub.add_parser("localtime", parents=[common], help="Monte Carlo local time at a level")
    _mc_args(sp, paths=1000, horizon=0.0)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--level", type=float, default=1.0)
    sp.add_argument("--no-jump-correction", action="store_true")

    sp = sub.add_parser("poisson-limit", parents=[common], help="TV distance to Poisson")
    sp.add_argument("--family", choices=[f.value for f in pathstats.PoissonFamily], default="bernoulli")
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000])

    sp = sub.add_parser("verify", parents=[common], help="run self-check suites")
    sp.add_argument("--suite", choices=verify.SUITES + ("all",), default="analytic")
    sp.add_argument("--paths", type=int, default=None, help="paths for the Monte Carlo suites")
    return parser


def parse(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest for a in sub._actions}  # noqa: SLF001
        unknown = set(overrides) - known - {"command"}
        if unknown:
            sub.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k: v for k, v in overrides.items() if k != "command"})
        args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in _COMMON}
    return RunConfig(args.command, params, args.output, args.format)


def _resolve_output(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    return os.path.join(base, path) if base and not os.path.isabs(path) else path


def dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = parse(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    try:
        table = COMMANDS[config.command](config.params)
    except UsageError as exc:
        print(f"monopoisson: usage error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, SimulationError, ValueError) as exc:
        print(f"monopoisson: error: {exc}", file=sys.stderr)
        return 1
    text = render(table, config)
    out = _resolve_output(config.output_path)
    if out is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if config.command == "verify" and table.meta.get("failed"):
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())

"""Command line front end: ``polypin run <experiment>`` and ``polypin render``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__

SEED_ENV = "POLYPIN_SEED"


class ConfigError(ValueError):
    pass


# --- options -------------------------------------------------------------------


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(s) for s in str(text).replace(",", " ").split())


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class Option:
    name: str
    kind: Callable
    default: object
    check: Callable | None = None
    what: str = ""
    is_flag: bool = False


SEED = Option("seed", int, None, _nonneg, "random seed (default: $POLYPIN_SEED or 0)")
REPLICAS = Option("replicas", int, 100, _positive, "number of independent replicas")
OUT = Option("out", str, "-", None, "CSV output path ('-' for stdout)")

STICK_OPTIONS = [
    Option("kind", str, "positive_cauchy", lambda v: v in ("positive_cauchy", "pareto", "exponential", "deterministic"),
           "stick length law"),
    Option("c", float, 1.0, _positive, "positive_cauchy tail constant"),
    Option("alpha", float, 0.5, _positive, "pareto tail exponent"),
    Option("scale", float, 1.0, _positive, "pareto scale"),
    Option("mean", float, 1.0, _positive, "exponential mean"),
    Option("length", float, 1.0, _positive, "deterministic length"),
]

COMMANDS: dict[str, list[Option]] = {
    "lines": [
        Option("n", float, 100.0, _positive, "domain size"),
        Option("lambda2", float, 1.0, _nonneg, "bulk intensity"),
        REPLICAS, SEED,
        Option("domain", str, "square", lambda v: v in ("square", "triangle"), "square (point-to-point) or triangle"),
        Option("boundary-births", _flag, False, None, "add the four boundary birth processes", True),
        Option("build-lines", _flag, False, None, "build broken lines and count them (slower)", True),
        Option("structured-out", str, "", None, "write replica 0 as structured text"),
        OUT,
    ],
    "influence": [
        Option("n", float, 20.0, _positive, "Triangle(n) size"),
        Option("lambda1", float, 0.5, _nonneg, "axis intensity"),
        Option("lambda2", float, 1.0, _nonneg, "bulk intensity"),
        REPLICAS, SEED,
        Option("structured-out", str, "", None, "write replica 0 (lines, paths, attractors) as structured text"),
        OUT,
    ],
    "pinning": [
        Option("n", float, 200.0, _positive, "Triangle(n) size"),
        Option("lambda1", float, 1.0, _nonneg, "axis intensity"),
        Option("lambda2", float, 1.0, _nonneg, "bulk intensity"),
        REPLICAS, SEED,
        Option("lambda1-max", float, 0.0, _nonneg, "couple runs by thinning from this intensity (0: off)"),
        Option("point-to-point", _flag, False, None, "use Square(n) corner to corner instead", True),
        Option("attractors", _flag, False, None, "compute attractors and the spanning indicator", True),
        OUT,
    ],
    "sticks": STICK_OPTIONS + [
        Option("lambda", float, 1.0, _nonneg, "seed intensity"),
        Option("T", float, 1e4, _positive, "window length"),
        REPLICAS, SEED,
        Option("bounce-bonus-mode", str, "all", lambda v: v in ("all", "first_flight"), "reinforced model bonus rule"),
        OUT,
    ],
    "lambda-c": STICK_OPTIONS + [
        Option("windows", _floats, (1e1, 1e2, 1e3, 1e4, 1e5), lambda v: len(v) >= 2 and all(w > 0 for w in v),
               "increasing window lengths, comma separated"),
        Option("replicas", int, 200, _positive, "replicas per intensity"),
        SEED,
        OUT,
    ],
}


def _norm(key: str) -> str:
    return key.strip().replace("_", "-")


def parse_config_text(text: str, command: str, source: str = "<config>", header: bool = False) -> dict:
    """``key = value`` lines; ``#`` starts a comment.

    With ``header`` the input is a CSV reproducibility header: only lines of the
    form ``# key = value`` before the first data line are read.
    """
    known = {o.name: o for o in COMMANDS[command]}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw
        if header:
            if not line.startswith("#"):
                break
            line = line[1:]
            if "=" not in line:
                continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = _norm(key), val.strip()
        if header and key in ("command", "version"):
            if key == "command" and val != command:
                raise ConfigError(f"{source}:{lineno}: header is for '{val}', not '{command}'")
            continue
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}' for '{command}'")
        try:
            values[key] = _convert(known[key], val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for '{key}': {exc}") from None
    return values


def _convert(opt: Option, val):
    if opt.kind is int and isinstance(val, str):
        f = float(val)
        if not f.is_integer():
            raise ValueError(f"expected an integer, got {val!r}")
        return int(f)
    return opt.kind(val)


def resolve(command: str, config: dict, cli: dict) -> dict:
    out = {}
    for opt in COMMANDS[command]:
        if opt.name in cli and cli[opt.name] is not None:
            val = cli[opt.name]
        elif opt.name in config:
            val = config[opt.name]
        elif opt.name == "seed":
            env = os.environ.get(SEED_ENV)
            try:
                val = int(env) if env not in (None, "") else 0
            except ValueError:
                raise ConfigError(f"{SEED_ENV}: not an integer: {env!r}") from None
        else:
            val = opt.default
        if opt.check is not None and not opt.check(val):
            raise ConfigError(f"invalid value for '{opt.name}': {val!r}")
        out[opt.name] = val
    return out


# --- CSV -------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return "nan" if math.isnan(f) else repr(f)
    return str(v)


def _header_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_cell(x) for x in v)
    return _cell(v)


def write_csv(path: str, command: str, params: dict, columns, rows, extra: dict | None = None) -> None:
    buf = io.StringIO()
    buf.write(f"# polypin {__version__}\n")
    buf.write(f"# command = {command}\n")
    for k, v in params.items():
        if k == "out":
            continue
        buf.write(f"# {k} = {_header_value(v)}\n")
    for k, v in (extra or {}).items():
        buf.write(f"# result {k}: {_header_value(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(c) for c in row])
    data = buf.getvalue()
    if path == "-":
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)


# --- commands --------------------------------------------------------------------


def _descriptor(p: dict):
    from .sticks import DistributionDescriptor as D

    kind = p["kind"]
    if kind == "positive_cauchy":
        return D.positive_cauchy(p["c"])
    if kind == "pareto":
        return D.pareto(p["alpha"], p["scale"])
    if kind == "exponential":
        return D.exponential(p["mean"])
    return D.deterministic(p["length"])


def cmd_lines(p: dict):
    from .geometry import Domain, RandomSource, sample_poisson_in_domain
    from .lines import build_broken_lines, chain_levels, chain_per_side, sample_boundary_births
    from .textio import write_document

    n = p["n"]
    d = Domain.square(n) if p["domain"] == "square" else Domain.triangle(n)
    source = RandomSource(p["seed"], "lines")
    rows = []
    means = []
    for r in range(p["replicas"]):
        rep = source.child(r)
        cfg = sample_poisson_in_domain(d, p["lambda2"], rep.child("interior").generator())
        births = sample_boundary_births(d, p["lambda2"], rep.child("boundary").generator(), p["boundary-births"])
        f = chain_levels(cfg.u, cfg.v)
        chain = int(f.max()) if len(f) else 0
        lines = ""
        if p["build-lines"] or (r == 0 and p["structured-out"]):
            ls = build_broken_lines(cfg, births, d)
            if p["build-lines"]:
                lines = len(ls)
            if r == 0 and p["structured-out"]:
                with open(p["structured-out"], "w", encoding="utf-8") as fh:
                    fh.write(write_document(domain=d, config=cfg, lineset=ls))
        cpn = chain_per_side(chain, d)
        means.append(cpn)
        rows.append((n, p["lambda2"], r, len(cfg), len(births), chain, lines, cpn))
    cols = ("n", "lambda2", "replica", "points", "boundary_births", "chain", "lines", "chain_per_n")
    m = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(len(means))) if len(means) > 1 else math.nan
    return cols, rows, {"mean_chain_per_n": m, "se": se}


def cmd_influence(p: dict):
    from .geometry import Domain, RandomSource, sample_poisson_in_domain, sample_poisson_on_axis
    from .influence import (INF, attractors_connected, augment_with_axis_points, augment_with_point,
                            build_attractors)
    from .lines import build_broken_lines, lis_oracle
    from .textio import write_document

    n = p["n"]
    d = Domain.triangle(n)
    source = RandomSource(p["seed"], "influence")
    rows = []
    for r in range(p["replicas"]):
        rep = source.child(r)
        cfg = sample_poisson_in_domain(d, p["lambda2"], rep.child("interior").generator())
        axis = sample_poisson_on_axis(p["lambda1"], (0.0, n), rep.child("axis").generator())
        ls = build_broken_lines(cfg, (), d)
        aug = augment_with_axis_points(ls, cfg, axis, mode="sequential")
        att = build_attractors(aug)
        con = attractors_connected(att, axis)
        pts = axis.points
        h0 = lis_oracle(cfg)
        prev = h0
        for k, x in enumerate(pts):
            tau = augment_with_point(ls, cfg, x)[3].tau
            ess_bulk = lis_oracle(cfg.union([x])) == h0 + 1
            cur = lis_oracle(cfg.union(pts[: k + 1]))
            ess_young = cur == prev + 1
            prev = cur
            a = att[k]
            n_conn = int(con.connected[k].sum())
            rows.append((n, p["lambda1"], p["lambda2"], r, k, x.t, "inf" if tau == INF else tau, a.t_hat,
                         a.ends_by_exit, ess_bulk, ess_young, n_conn))
        if r == 0 and p["structured-out"]:
            with open(p["structured-out"], "w", encoding="utf-8") as fh:
                fh.write(write_document(domain=d, config=cfg, axis=axis, lineset=aug.lineset,
                                        paths=aug.paths, attractors=att))
    cols = ("n", "lambda1", "lambda2", "replica", "index", "t", "tau", "t_hat", "ends_by_exit",
            "essential", "essential_given_younger", "connected_younger")
    return cols, rows, {}


def cmd_pinning(p: dict):
    from .geometry import RandomSource
    from .pinning import CSV_COLUMNS, pinning_rows, run_pinning_experiment

    lam_max = p["lambda1-max"] or None
    if lam_max is not None and lam_max < p["lambda1"]:
        raise ConfigError("lambda1-max must be >= lambda1")
    st = run_pinning_experiment(p["n"], p["lambda1"], p["lambda2"], p["replicas"],
                                RandomSource(p["seed"], "pinning"), lam_max, p["point-to-point"], p["attractors"])
    extra = {"mean_chain_per_n": st.mean_chain_per_n, "chain_per_n_se": st.chain_per_n_se,
             "essential_fraction": st.essential_fraction, "visit_density": st.visit_density,
             "spanning_rate": st.spanning_rate}
    return CSV_COLUMNS, list(pinning_rows(st)), extra


def cmd_sticks(p: dict):
    from .geometry import RandomSource
    from .sticks import sample_sticks, simulate_model1, simulate_model2

    d = _descriptor(p)
    source = RandomSource(p["seed"], "sticks")
    rows = []
    for r in range(p["replicas"]):
        gen = source.child(r).generator()
        s = sample_sticks(p["lambda"], d, p["T"], gen)
        m1 = simulate_model1(p["lambda"], d, p["T"], gen, sample=s)
        m2 = simulate_model2(p["lambda"], d, p["T"], gen, sample=s, bonus_mode=p["bounce-bonus-mode"], record=False)
        rows.append((p["lambda"], p["T"], r, m1.spans_window, m1.max_covered, m2.tagged_survives_to_T))
    rate = float(np.mean([row[3] for row in rows]))
    return ("lambda", "T", "replica", "spans_window", "max_covered", "tagged_survives"), rows, {"span_rate": rate}


def cmd_lambda_c(p: dict):
    from .geometry import RandomSource
    from .sticks import estimate_lambda_c

    d = _descriptor(p)
    est = estimate_lambda_c(d, p["windows"], p["replicas"], RandomSource(p["seed"], "lambda-c"))
    cols = ("lambda", "decay_exponent") + tuple(f"span_T{w:g}" for w in est.windows)
    rows = [(lam, s) + rates for lam, s, rates in zip(est.grid, est.decay_exponents, est.span_rates)]
    return cols, rows, {"lambda_c": est.estimate, "ci_low": est.ci[0], "ci_high": est.ci[1]}


RUNNERS = {"lines": cmd_lines, "influence": cmd_influence, "pinning": cmd_pinning,
           "sticks": cmd_sticks, "lambda-c": cmd_lambda_c}


def cmd_run(command: str, params: dict) -> int:
    cols, rows, extra = RUNNERS[command](params)
    write_csv(params["out"], command, params, cols, rows, extra)
    return 0


def cmd_render(inp: str, out: str) -> int:
    from .render import render_svg
    from .textio import parse_document

    with open(inp, encoding="utf-8") as fh:
        doc = parse_document(fh.read())
    svg = render_svg(doc)
    if out == "-":
        sys.stdout.write(svg)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(svg)
    return 0


# --- entry point -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polypin", description=__doc__)
    parser.add_argument("--version", action="version", version=f"polypin {__version__}")
    sub = parser.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run an experiment and write CSV")
    exps = run.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in COMMANDS.items():
        sp = exps.add_parser(name)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--from-header", help="reuse the parameters recorded in a CSV header")
        for o in opts:
            flag = f"--{o.name}"
            if o.is_flag:
                sp.add_argument(flag, dest=o.name, action="store_const", const=True, default=None, help=o.what)
            else:
                sp.add_argument(flag, dest=o.name, default=None, help=o.what, type=str)
    rd = sub.add_parser("render", help="render a structured text file to SVG")
    rd.add_argument("input")
    rd.add_argument("output")
    gd = sub.add_parser("golden", help="regenerate the frozen reference files")
    gd.add_argument("directory")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.action == "render":
            try:
                return cmd_render(args.input, args.output)
            except (OSError, ValueError) as exc:
                print(f"polypin: {exc}", file=sys.stderr)
                return 2
        if args.action == "golden":
            from .golden import write_goldens

            for path in write_goldens(args.directory):
                print(path)
            return 0
        command = args.command
        config: dict = {}
        for attr, header in (("config", False), ("from_header", True)):
            path = getattr(args, attr)
            if path:
                try:
                    with open(path, encoding="utf-8") as fh:
                        text = fh.read()
                except OSError as exc:
                    raise ConfigError(f"{path}: {exc.strerror}") from None
                config.update(parse_config_text(text, command, path, header))
        cli = {}
        known = {o.name: o for o in COMMANDS[command]}
        for name, opt in known.items():
            raw = getattr(args, name, None)
            if raw is None:
                continue
            try:
                cli[name] = _convert(opt, raw)
            except ValueError as exc:
                raise ConfigError(f"--{name}: {exc}") from None
        params = resolve(command, config, cli)
    except ConfigError as exc:
        print(f"polypin: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return cmd_run(command, params)
    except ConfigError as exc:
        print(f"polypin: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure of the experiment itself
        print(f"polypin: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

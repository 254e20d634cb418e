"""Command-line entry point: ``induced-matching <subcommand> [flags]``.

Flags may also come from a flat ``key=value`` file given with ``--config``;
flags on the command line win. Exit status: 0 on success (including checks
that report ``holds=false``), 1 on usage errors, 2 when a computation is
refused (size caps, regime preconditions).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import bound_checks, experiments
from .errors import DomainError, RefusalError
from .graph import GnpParams, read_graph, sample_gnp, sample_gnp_product, write_graph
from .logspace import format_float
from .moments import ModelParams, build_moment_table, second_moment_ratio, second_moment_ratio_exact
from .solvers import SOLVERS, solve

SUBCOMMANDS = ("gen", "solve", "moments", "ratio", "check", "experiment", "property")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _common(p: argparse.ArgumentParser, fmt: str) -> None:
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--format", choices=("json", "csv", "text"), default=fmt)
    p.add_argument("--out", help="output path (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="induced-matching", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="sample a G(n,p) graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sampler", choices=("direct", "product"), default="direct")
    _common(g, "text")

    s = sub.add_parser("solve", help="maximum induced matching of a sampled or given graph")
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--graph", help="read the graph from this edge-list file instead of sampling")
    s.add_argument("--solver", choices=SOLVERS, default="exact")
    s.add_argument("--time-budget", type=float, default=None)
    s.add_argument("--rounds", type=int, default=1000)
    _common(s, "json")

    m = sub.add_parser("moments", help="table of log a(l,s) and log b(l,s)")
    _model_flags(m)
    _common(m, "json")

    r = sub.add_parser("ratio", help="E[Y_k^2] / E[Y_k]^2")
    _model_flags(r)
    r.add_argument("--exact", type=_bool, nargs="?", const=True, default=False,
                   help="rational arithmetic (small n only)")
    _common(r, "text")

    c = sub.add_parser("check", help="numerical check of one inequality")
    c.add_argument("--check-name", choices=bound_checks.CHECKS + ("all",), required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", type=float)
    c.add_argument("--c", type=float, help="mean degree; alternative to --p")
    c.add_argument("--k", type=int)
    c.add_argument("--epsilon", type=float, default=0.1)
    c.add_argument("--lattice", default="200",
                   help="'full', points per axis (e.g. 200), or steps 'STEP_L,STEP_S'")
    c.add_argument("--report-worst", type=int, default=5)
    _common(c, "json")

    e = sub.add_parser("experiment", help="Monte Carlo over (n, p) cells")
    e.add_argument("--experiment", choices=experiments.EXPERIMENTS, default="distribution")
    e.add_argument("--n", type=_int_list, required=True, help="comma-separated")
    e.add_argument("--p", type=_float_list, required=True, help="comma-separated")
    e.add_argument("--epsilon0", type=float, default=0.35)
    e.add_argument("--samples", type=int, default=50)
    e.add_argument("--solver", choices=experiments.EXPERIMENT_SOLVERS, default="exact")
    e.add_argument("--time-budget", type=float, default=None)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--parallelism", type=int, default=1)
    e.add_argument("--timing", type=_bool, nargs="?", const=True, default=False)
    _common(e, "json")

    pr = sub.add_parser("property", help="first-moment and concentration property trials")
    pr.add_argument("--property", choices=("first_moment", "lipschitz", "certificate"), required=True)
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--p", type=float, required=True)
    pr.add_argument("--r", type=int, default=2, help="matching size for first_moment")
    pr.add_argument("--samples", type=int, default=500, help="samples or trials")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--parallelism", type=int, default=1)
    pr.add_argument("--timing", type=_bool, nargs="?", const=True, default=False)
    _common(pr, "json")
    return parser


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float, default=0.1)


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` comments and blank lines are ignored."""
    out = {}
    for num, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    path = _config_path(argv)
    command = next((tok for tok in argv if tok in SUBCOMMANDS), None)
    if path and command:
        values = read_config_file(path)
        sub = parser._subparsers._group_actions[0].choices[command]
        known = {a.dest for a in sub._actions} - {"help", "config"}
        for key in values:
            if key not in known:
                raise UsageError(f"{path}: unknown key {key!r} for {command}")
        # file values become defaults, so explicit flags still win; argparse
        # runs string defaults through each flag's type
        for action in sub._actions:
            if action.dest in values:
                action.required = False
        sub.set_defaults(**values)
    return parser.parse_args(argv)


def _resolved(args: argparse.Namespace) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in ("out", "verbose"):
            continue
        if isinstance(value, float):
            value = format_float(value)
        elif isinstance(value, list):
            value = [format_float(v) if isinstance(v, float) else v for v in value]
        out[key] = value
    return out


def _model(args) -> ModelParams:
    return ModelParams(args.n, args.p, args.epsilon, args.k)


def _lattice(spec: str, params: ModelParams, worst: int) -> bound_checks.CheckConfig:
    spec = str(spec).strip()
    if spec == "full":
        return bound_checks.CheckConfig(params, "full", worst)
    if "," in spec:
        a, b = (int(x) for x in spec.split(","))
        return bound_checks.CheckConfig(params, bound_checks.Lattice(a, b), worst)
    size = int(spec)
    if size < 2:
        raise UsageError("--lattice needs at least 2 points per axis")
    return bound_checks.CheckConfig.default(params, size, worst)


def _emit_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _echo_text(config: dict) -> str:
    return "".join(f"# {k}={json.dumps(v)}\n" for k, v in config.items())


def _cmd_gen(args, config) -> str:
    params = GnpParams(args.n, args.p, args.seed)
    g = sample_gnp(params) if args.sampler == "direct" else sample_gnp_product(params)
    if args.format == "json":
        return _emit_json({"config": config, "n": g.n, "m": g.edge_count, "edges": [list(e) for e in g.edges()]})
    if args.format == "csv":
        return "u,v\n" + "".join(f"{u},{v}\n" for u, v in g.edges())
    return _echo_text(config) + write_graph(g)


def _cmd_solve(args, config) -> str:
    if args.graph:
        g = read_graph(Path(args.graph).read_text())
    else:
        if args.n is None or args.p is None:
            raise UsageError("solve needs --graph or both --n and --p")
        g = sample_gnp(GnpParams(args.n, args.p, args.seed))
    res = solve(g, args.solver, args.time_budget, args.seed, args.rounds)
    if args.format == "json":
        return _emit_json({"config": config, "n": g.n, "m": g.edge_count, **res.to_json()})
    if args.format == "csv":
        pairs = " ".join(f"{u}-{v}" for u, v in res.witness.pairs)
        return f"size,optimal,nodes_explored,witness\n{res.size},{str(res.optimal).lower()},{res.nodes_explored},{pairs}\n"
    return _echo_text(config) + f"size {res.size}\noptimal {res.optimal}\nwitness {res.witness.to_json()}\n"


def _cmd_moments(args, config) -> str:
    table = build_moment_table(_model(args))
    if args.format == "csv":
        return table.to_csv()
    if args.format == "json":
        return _emit_json({"config": config, **table.to_json()})
    return _echo_text(config) + table.to_csv()


def _cmd_ratio(args, config) -> str:
    params = _model(args)
    if args.exact:
        frac = second_moment_ratio_exact(params.n, params.p, params.k)
        value, log_value, exact = float(frac), math.log(frac), f"{frac.numerator}/{frac.denominator}"
    else:
        lv = second_moment_ratio(params)
        value, log_value, exact = float(lv), lv.log_magnitude, None
    if args.format == "json":
        out = {"config": config, "k": params.k, "ratio": format_float(value), "log_ratio": format_float(log_value)}
        if exact:
            out["exact"] = exact
        return _emit_json(out)
    if args.format == "csv":
        return f"n,p,k,ratio,log_ratio\n{params.n},{format_float(params.p)},{params.k},{format_float(value)},{format_float(log_value)}\n"
    return f"{value:.8g}\n"


def _cmd_check(args, config) -> str:
    if (args.p is None) == (args.c is None):
        raise UsageError("check needs exactly one of --p and --c")
    names = bound_checks.CHECKS if args.check_name == "all" else (args.check_name,)
    reports = []
    for name in names:
        if name == "talagrand" and args.p is None:
            # c may exceed n here, which no p in (0, 1) represents
            reports.append(bound_checks.check_talagrand_arithmetic(n=args.n, c=args.c, epsilon=args.epsilon))
            continue
        p = args.p if args.p is not None else args.c / args.n
        params = ModelParams(args.n, p, args.epsilon, args.k)
        reports.append(bound_checks.run_check(name, _lattice(args.lattice, params, args.report_worst)))
    if args.format == "json":
        body = [r.to_json() for r in reports]
        return _emit_json({"config": config, "reports": body})
    if args.format == "csv":
        lines = ["check_name,holds,margin"]
        lines += [f"{r.check_name},{str(r.holds).lower()},{format_float(r.margin)}" for r in reports]
        return "\n".join(lines) + "\n"
    return _echo_text(config) + "\n".join(r.to_table() for r in reports)


def _cmd_experiment(args, config) -> str:
    cfg = experiments.ExperimentConfig(
        tuple(args.n), tuple(args.p), args.epsilon0, args.samples, args.solver,
        args.time_budget, args.seed, args.parallelism, args.timing,
    )
    report = experiments.run_experiment(args.experiment, cfg)
    text = _report_out(args, config, report)
    refused = report.verdicts.get("refused")
    if refused:
        for cell in refused:
            print(f"refused: n={cell['n']} p={format_float(cell['p'])}: {cell['reason']}", file=sys.stderr)
        return text, 2
    return text


def _cmd_property(args, config) -> str:
    if args.property == "first_moment":
        report = experiments.run_first_moment_mc(args.n, args.p, args.r, args.samples, args.seed, args.timing)
    elif args.property == "lipschitz":
        report = experiments.run_lipschitz_property(args.samples, args.n, args.p, args.seed,
                                                    args.parallelism, args.timing)
    else:
        report = experiments.run_certificate_property(args.samples, args.n, args.p, args.seed,
                                                      args.parallelism, args.timing)
    return _report_out(args, config, report)


def _report_out(args, config, report) -> str:
    if args.format == "csv":
        return report.to_csv()
    body = report.to_json()
    # parallelism only appears when timing is requested, so outputs stay
    # identical across worker counts
    if not args.timing:
        config = {k: v for k, v in config.items() if k != "parallelism"}
    if args.format == "json":
        return _emit_json({"config": config, **body})
    return _echo_text(config) + json.dumps(body["verdicts"], sort_keys=True) + "\n"


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "moments": _cmd_moments,
    "ratio": _cmd_ratio,
    "check": _cmd_check,
    "experiment": _cmd_experiment,
    "property": _cmd_property,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except OSError as exc:
        print(f"induced-matching: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    config = _resolved(args)
    try:
        result = _COMMANDS[args.subcommand](args, config)
    except RefusalError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DomainError, ValueError, OSError) as exc:
        print(f"induced-matching {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    # a partially refused experiment still writes what it computed
    text, code = result if isinstance(result, tuple) else (result, 0)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

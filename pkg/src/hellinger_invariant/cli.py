"""Command-line interface.

Exit codes:
  0  success
  2  configuration / usage error
  3  input file could not be parsed (or holds invalid prices)
  4  numerical failure
  5  I/O error
"""

import argparse
import io
import math
import os
import sys
from pathlib import Path

from . import __version__, report
from .density import resolve_bin_count
from .errors import ConfigError, DomainError, InvariantError, NumericalError, ParseError
from .market_data import SimulationSpec, load_prices, simulate_student_market, write_prices
from .markowitz import ridge_for
from .optimizer import OptimizerConfig, frontier_scan
from .sensitivity import PerturbationSpec, sensitivity_binning, sensitivity_perturbation
from .stats_core import sample_mean_cov

EXIT_OK, EXIT_CONFIG, EXIT_PARSE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


class InputError(Exception):
    """A market could not be loaded; wraps the underlying error."""


def parse_simulation(text, seed):
    """Parse ``dfs=4,3,3,2,T=810`` (``inf`` or ``normal`` for Gaussian columns)."""
    fields, key = {}, None
    for token in text.split(","):
        token = token.strip()
        if "=" in token:
            key, token = (s.strip() for s in token.split("=", 1))
            fields.setdefault(key, [])
        elif key is None:
            raise ConfigError(f"bad --simulate value {text!r}")
        if token:
            fields[key].append(token)
    unknown = set(fields) - {"dfs", "T"}
    if unknown or "dfs" not in fields:
        raise ConfigError(f"bad --simulate value {text!r}; expected dfs=<d1,...>,T=<obs>")
    dfs = []
    for d in fields["dfs"]:
        if d.lower() in ("inf", "normal"):
            dfs.append(math.inf)
        else:
            try:
                dfs.append(int(d))
            except ValueError:
                raise ConfigError(f"bad degree of freedom {d!r}") from None
    try:
        T = int(fields.get("T", ["810"])[0])
    except ValueError:
        raise ConfigError(f"bad observation count in {text!r}") from None
    try:
        return SimulationSpec(tuple(dfs), T, seed)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _bins_arg(value):
    if value == "auto":
        return value
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto' or an integer") from None
    if k < 2:
        raise argparse.ArgumentTypeError("bin count must be >= 2")
    return k


def _seed_arg(value):
    s = int(value)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", default=[], metavar="PATH",
                        help="price CSV with header date,<label1>,...")
    common.add_argument("--simulate", action="append", default=[], metavar="SPEC",
                        help="simulated market, e.g. dfs=4,3,3,2,T=810")
    common.add_argument("--seed", type=_seed_arg, default=0, help="root seed for every random stream")
    common.add_argument("--format", choices=["json", "csv", "table"], default=None,
                        help="report format (default: table; csv prices for simulate)")
    common.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--grid", type=int, default=50, help="number of target returns")
    opt.add_argument("--bins", type=_bins_arg, default="auto", help="'auto' (ceil sqrt T) or a count")
    opt.add_argument("--multistart", type=int, default=None,
                     help="starts per grid point (default: structured starts, at least n+2)")
    opt.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")

    p = argparse.ArgumentParser(
        prog="hellinger-invariant",
        description="Minimum squared Hellinger distance between long-only portfolios and "
                    "their frontier Gaussian, and its sensitivity.",
        epilog="exit codes: 0 ok; 2 config/usage; 3 input parse; 4 numerical failure; 5 I/O",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("invariant", parents=[common, opt], help="invariant per market (one column each)")
    sub.add_parser("simulate", parents=[common], help="write a simulated market as a price CSV")
    sp = sub.add_parser("sensitivity-perturb", parents=[common, opt], help="random data-edit sensitivity")
    sp.add_argument("--replications", type=int, default=1000)
    sp.add_argument("--fraction", type=float, default=0.05)
    sp.add_argument("--magnitude", type=float, default=0.05)
    sp.add_argument("--keep-changes", action="store_true", help="list every replication's change")
    sub.add_parser("sensitivity-bins", parents=[common, opt], help="bin count +/- 1 sensitivity")
    return p


def _markets(args):
    markets = []
    for path in args.input:
        try:
            data = load_prices(path)
        except FileNotFoundError as exc:
            raise FileNotFoundError(f"input file not found: {path}") from exc
        except (ParseError, DomainError) as exc:
            raise InputError(f"{path}: {exc}") from exc
        markets.append((Path(path).stem, data, {"input": str(path)}))
    for text in args.simulate:
        spec = parse_simulation(text, args.seed)
        data = simulate_student_market(spec)
        dfs = ["inf" if d == math.inf else d for d in spec.degrees_of_freedom]
        markets.append(("simulated", data, {"simulate": {"dfs": dfs, "T": spec.observations,
                                                         "seed": spec.seed}}))
    if not markets:
        raise ConfigError("give --input PATH or --simulate SPEC")
    if args.command != "invariant" and len(markets) != 1:
        raise ConfigError(f"{args.command} takes exactly one market")
    return markets


def _optimizer_config(args):
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    try:
        return OptimizerConfig(multistart_count=args.multistart, bin_count=args.bins, seed=args.seed)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _config_echo(args, sources, cfg=None, extra=None):
    out = {"command": args.command, "markets": sources, "seed": args.seed, "format": args.format}
    if cfg is not None:
        out["grid_size"] = args.grid
        out["optimizer"] = cfg.to_dict()
    if extra:
        out.update(extra)
    return out


def run_invariant(args):
    cfg = _optimizer_config(args)
    markets = _markets(args)
    results, sources = [], []
    for label, data, source in markets:
        rep = frontier_scan(data, args.grid, cfg, jobs=args.jobs, label=label)
        _, cov = sample_mean_cov(data)
        res = report.invariant_results(rep, ridge=ridge_for(cov))
        res["bin_count"] = rep.config_echo["bin_count"]
        res["grid_points"] = rep.config_echo["grid_points"]
        results.append(res)
        sources.append(dict(source, label=label, T=data.T, n=data.n, labels=list(data.labels)))
    doc = {"meta": report.meta(), "config": _config_echo(args, sources, cfg), "results": results}
    if args.format == "json":
        return report.dumps(doc)
    if args.format == "csv":
        return report.invariant_csv(results)
    return report.invariant_table(results)


def run_sensitivity(args):
    cfg = _optimizer_config(args)
    (label, data, source), = _markets(args)
    source = dict(source, label=label, T=data.T, n=data.n, labels=list(data.labels))
    if args.command == "sensitivity-perturb":
        try:
            spec = PerturbationSpec(args.fraction, args.magnitude, args.replications, args.seed)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        rep = sensitivity_perturbation(data, spec, args.grid, cfg, jobs=args.jobs,
                                       keep_changes=args.keep_changes)
        extra = {"perturbation": {"data_fraction": spec.data_fraction, "magnitude": spec.magnitude,
                                  "replications": spec.replications, "seed": spec.seed}}
    else:
        k = resolve_bin_count(args.bins, data.T)
        if k < 3:
            raise ConfigError("sensitivity-bins needs a bin count >= 3")
        rep = sensitivity_binning(data, k, args.grid, cfg, jobs=args.jobs)
        extra = {"baseline_bin_count": k}
    results = [report.sensitivity_results(label, rep)]
    doc = {"meta": report.meta(), "config": _config_echo(args, [source], cfg, extra), "results": results}
    if args.format == "json":
        return report.dumps(doc)
    if args.format == "csv":
        return report.sensitivity_csv(results)
    return report.sensitivity_table(results)


def run_simulate(args):
    markets = _markets(args)
    if args.input or len(markets) != 1:
        raise ConfigError("simulate takes exactly one --simulate SPEC")
    label, data, source = markets[0]
    if args.format == "csv":
        buf = io.StringIO()
        write_prices(data, buf)
        return buf.getvalue()
    mean, cov = sample_mean_cov(data)
    rows = []
    for j, name in enumerate(data.labels):
        col = data.returns[:, j]
        dev = col - mean[j]
        kurt = float((dev**4).mean() / (dev**2).mean() ** 2)
        rows.append({"label": name, "mean": float(mean[j]), "variance": float(cov[j, j]), "kurtosis": kurt})
    if args.format == "json":
        doc = {"meta": report.meta(), "config": _config_echo(args, [source]),
               "results": {"labels": list(data.labels), "summary": rows,
                           "returns": [list(map(float, r)) for r in data.returns]}}
        return report.dumps(doc)
    table = [["asset", "mean", "variance", "kurtosis"]]
    table += [[r["label"], repr(r["mean"]), repr(r["variance"]), repr(r["kurtosis"])] for r in rows]
    return report._grid(table)


COMMANDS = {
    "invariant": run_invariant,
    "simulate": run_simulate,
    "sensitivity-perturb": run_sensitivity,
    "sensitivity-bins": run_sensitivity,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "simulate" else "table"
    try:
        text = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalError, InvariantError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

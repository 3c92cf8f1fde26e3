"""
The ``claw`` command-line interface.

Subcommands
-----------
run
    The classical procedure on a CSV of statistics.
semisup
    The semi-supervised procedure with a null pool file.
simulate
    Replicated simulations of a built-in design.
aggregate
    e-BH on the weighted average of an e-value panel.

Exit codes are 0 on success, 2 for invalid input and 3
for internal numeric failures.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Dict, List, Optional, Sequence
import argparse
import csv
import json
import logging
import os
import sys

import numpy
import six

import pyclawfdr
from pyclawfdr.common import (
    NEG_INFINITY,
    CovariateKind,
    ClawError,
    ClawNumericError,
    ConfigError,
    MissingColumn,
    ParseError,
)
from pyclawfdr.configuration import config as package_config
from pyclawfdr.model import ClawConfig, Dataset, validate_dataset
from pyclawfdr.pipeline import StandardNormalNull, TabulatedNull, claw_run
from pyclawfdr.semisup import semisup_claw_run
from pyclawfdr.aggregate import aggregate_evalues, read_panel_csv
from pyclawfdr.mirror import ebh
from pyclawfdr import sim
from pyclawfdr.misc import (
    as_stream,
    format_float,
    get_default_args,
    get_keyword_docs,
    get_simple_logger,
    parse_assignment,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


#
# input files
#


def _float_cell(value, lineno, column):
    try:
        return float(value)
    except ValueError:
        raise ParseError("column %r: expected a number, got %r" % (column, value), line=lineno)


def read_units_csv(stream, require_calibration=True):
    # type: (Any, bool) -> Dataset
    """Read test units from a CSV file with a header row.

    The statistic is read from the ``t`` column and the
    calibration statistic from ``t_cal``. A column ``s``
    holds categorical covariates; columns ``s1``, ``s2``,
    ... hold real covariates. Other columns are ignored,
    so a per-unit report can be read back.
    """
    with as_stream(stream, mode="r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("the input file is empty", line=1)
        if "t" not in header:
            raise MissingColumn("input has no 't' column")
        if require_calibration and ("t_cal" not in header):
            raise MissingColumn("input has no 't_cal' column")
        real_columns = []
        d = 1
        while "s%d" % (d) in header:
            real_columns.append("s%d" % (d))
            d += 1
        if (not real_columns) and ("s" not in header):
            raise MissingColumn("input has no covariate column ('s' or 's1', 's2', ...)")
        index = dict((name, i) for i, name in enumerate(header))
        t, t_cal, s = [], [], []  # type: List[float], List[float], List[Any]
        for lineno, row in enumerate(reader, 2):
            if (len(row) == 0) or (row == [""]):
                continue
            if len(row) != len(header):
                raise ParseError(
                    "expected %d fields, got %d" % (len(header), len(row)), line=lineno
                )
            t.append(_float_cell(row[index["t"]], lineno, "t"))
            if "t_cal" in index:
                t_cal.append(_float_cell(row[index["t_cal"]], lineno, "t_cal"))
            if real_columns:
                s.append(tuple(_float_cell(row[index[c]], lineno, c) for c in real_columns))
            else:
                s.append(row[index["s"]].strip())
    if real_columns:
        covariates = numpy.array(s, dtype=float).reshape(len(s), len(real_columns))
        if len(real_columns) == 1:
            covariates = covariates[:, 0]
    else:
        covariates = s
    return Dataset.from_arrays(t, covariates, t_cal=t_cal if "t_cal" in index else None)


def read_null_pool(stream):
    """Read a single column of null samples, with an
    optional header."""
    values = []
    with as_stream(stream, mode="r", newline="") as f:
        for lineno, row in enumerate(csv.reader(f), 1):
            if (len(row) == 0) or (row == [""]):
                continue
            if len(row) != 1:
                raise ParseError("expected a single column, got %d" % (len(row)), line=lineno)
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError("non-numeric null sample %r" % (row[0]), line=lineno)
    return numpy.array(values, dtype=float)


def load_config(filename, seed=None):
    """Read a JSON run configuration. Returns the
    :class:`ClawConfig <pyclawfdr.model.ClawConfig>` and
    the null distribution named by its ``f0`` entry.

    The seed is taken from the first of: the `seed`
    argument, the CLAW_SEED environment setting, the file
    and 0.
    """
    data = {}  # type: Dict[str, Any]
    base = os.getcwd()
    if filename is not None:
        base = os.path.dirname(os.path.abspath(filename))
        with open(filename) as f:
            try:
                data = json.load(f)
            except ValueError as e:
                raise ParseError(
                    "invalid JSON: %s" % (getattr(e, "msg", e),), line=getattr(e, "lineno", None)
                )
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
    data = dict(data)
    f0_entry = data.pop("f0", "standard_normal")
    if seed is not None:
        data["seed"] = seed
    elif package_config.SEED is not None:
        data["seed"] = package_config.SEED
    data.setdefault("seed", 0)
    cfg = ClawConfig.from_dict(data)
    if f0_entry == "standard_normal":
        f0 = StandardNormalNull()
    elif isinstance(f0_entry, dict) and (set(f0_entry) == set(["table"])):
        path = f0_entry["table"]
        if not isinstance(path, six.string_types):
            raise ConfigError("config.f0.table", "expected a file name")
        f0 = TabulatedNull.from_csv(os.path.join(base, path))
        f0.source = path
    else:
        raise ConfigError(
            "config.f0", "expected \"standard_normal\" or {\"table\": <csv file>}"
        )
    return cfg, f0


#
# reports
#


class RunReport(object):
    """The per-unit rows and the scalar summary of a
    run.

    Parameters
    ----------
    data : :class:`Dataset <pyclawfdr.model.Dataset>`
        The validated data of the run, with the
        calibration statistics that were used.
    run : :class:`ClawRun <pyclawfdr.results.ClawRun>`
        The run.
    f0 : object, optional
        The null distribution, echoed in the summary.
        (default: None)
    """

    def __init__(self, data, run, f0=None):
        self.data = data
        self.run = run
        self.f0 = f0
        assert data.m == run.m

    def header(self):
        # type: () -> List[str]
        columns = ["index", "t"]
        if self.data.covariate_kind == CovariateKind.categorical:
            columns.append("s")
        else:
            columns.extend("s%d" % (c + 1) for c in range(self.data.covariate_dimension))
        columns.extend(["t_cal", "u", "u_cal", "evalue", "rejected"])
        return columns

    def write_csv(self, stream):
        """Write one row per unit, in input order."""
        d = self.run.decision
        rejected = numpy.zeros(self.data.m, dtype=bool)
        rejected[d.rejected] = True
        categorical = self.data.covariate_kind == CovariateKind.categorical
        with as_stream(stream, mode="w", newline="") as out:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(self.header())
            for i in range(self.data.m):
                row = [str(i), format_float(self.data.t[i])]
                if categorical:
                    row.append(str(self.data.covariates[i]))
                else:
                    row.extend(format_float(x) for x in self.data.covariates[i])
                row.extend(
                    [
                        format_float(self.data.t_cal[i]),
                        format_float(d.u[i]),
                        format_float(d.u_cal[i]),
                        format_float(d.evalues[i]),
                        "1" if rejected[i] else "0",
                    ]
                )
                writer.writerow(row)

    def to_dict(self):
        # type: () -> Dict[str, Any]
        run = self.run
        d = run.decision
        cfg = run.config.to_dict()
        if self.f0 is not None:
            cfg["f0"] = self.f0.describe()
        out = {
            "version": pyclawfdr.__version__,
            "seed": run.config.seed,
            "config": cfg,
            "m": run.m,
            "alpha": run.config.alpha,
            "n_rejected": d.n_rejected,
            "rejected": d.rejected.tolist(),
            "tau": None if d.tau == NEG_INFINITY else d.tau,
            "tau_is_neg_infinity": d.tau == NEG_INFINITY,
            "fdp_estimate": d.fdp_estimate,
            "mirror_count": d.mirror_count,
            "n_ties": 0 if d.diagnostics is None else len(d.diagnostics.ties),
        }
        bandwidth = getattr(run.estimator_state, "bandwidth", None)
        out["bandwidth"] = bandwidth
        return out

    def write_json(self, stream):
        with as_stream(stream) as out:
            json.dump(self.to_dict(), out, sort_keys=True, indent=2)
            out.write("\n")


def _write_report(report, out_dir, log):
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    report.write_csv(os.path.join(out_dir, "report.csv"))
    report.write_json(os.path.join(out_dir, "report.json"))
    d = report.run.decision
    log.info(
        "m=%d, %d rejection(s) at alpha=%g; report written to %s",
        report.run.m,
        d.n_rejected,
        report.run.config.alpha,
        out_dir,
    )


#
# subcommands
#


def cmd_run(args, log):
    cfg, f0 = load_config(args.config, seed=args.seed)
    data = validate_dataset(read_units_csv(args.input, require_calibration=True), cfg)
    run = claw_run(data, f0, cfg)
    _write_report(RunReport(data, run, f0=f0), args.out, log)
    return EXIT_OK


def cmd_semisup(args, log):
    cfg, _ = load_config(args.config, seed=args.seed)
    data = read_units_csv(args.input, require_calibration=False)
    pool = read_null_pool(args.null_pool)
    data = Dataset(data.units, null_pool=pool)
    run = semisup_claw_run(data, cfg)
    paired = validate_dataset(data.with_calibration(run.null_split.calibration))
    report = RunReport(paired, run)
    _write_report(report, args.out, log)
    manifest = dict(run.null_split.to_dict())
    manifest["pool_size"] = len(pool)
    manifest["seed"] = cfg.seed
    with open(os.path.join(args.out, "null_split.json"), "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")
    return EXIT_OK


def cmd_simulate(args, log):
    params = dict(parse_assignment(p) for p in args.param)
    spec = sim.GeneratorSpec(
        args.family,
        args.setting,
        params,
        full_null=args.full_null,
        null_pool_factor=args.null_pool_factor,
    )
    seed = args.seed
    if seed is None:
        seed = package_config.SEED if package_config.SEED is not None else 0
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    summary = sim.replicate(
        spec,
        methods,
        args.reps,
        master_seed=seed,
        workers=args.workers,
        alpha=args.alpha,
    )
    if args.out is not None:
        summary.write_csv(args.out)
    if args.json is not None:
        summary.write_json(args.json)
    summary.pprint(sys.stdout)
    return EXIT_OK


def cmd_aggregate(args, log):
    weights = None
    if args.weights is not None:
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError:
            raise ConfigError("weights", "expected a comma-separated list of numbers")
    panel = read_panel_csv(args.panel, weights=weights)
    ebar = aggregate_evalues(panel)
    rejected = ebh(ebar, args.alpha)
    result = {
        "alpha": args.alpha,
        "sources": panel.names,
        "weights": panel.weights.tolist(),
        "ebar": ebar.tolist(),
        "rejected": rejected.tolist(),
        "n_rejected": len(rejected),
    }
    with as_stream(args.out if args.out is not None else sys.stdout) as out:
        json.dump(result, out, sort_keys=True, indent=2)
        out.write("\n")
    return EXIT_OK


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, got %r" % (text,))
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1, got %d" % (value))
    return value


def _level(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a number, got %r" % (text,))
    if not (0 < value <= 1):
        raise argparse.ArgumentTypeError("must lie in (0, 1], got %r" % (value,))
    return value


def create_parser():
    # type: () -> argparse.ArgumentParser
    """Build the argument parser. Help texts and defaults
    of the simulation options are taken from
    :func:`pyclawfdr.sim.replicate`."""
    parser = argparse.ArgumentParser(
        prog="claw",
        description="Conformalized locally adaptive FDR control",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=pyclawfdr.__version__)
    parser.add_argument("--quiet", action="store_true", default=False,
                        help="Only report warnings and errors.")
    parser.add_argument("--log-filename", type=str, default=None,
                        help="Also write log output to this file.")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    for name, help_ in (
        ("run", "Run the procedure with a known null distribution."),
        ("semisup", "Run the procedure with a pool of labeled null samples."),
    ):
        p = sub.add_parser(name, help=help_,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("input", help="CSV file with columns t, t_cal and s (or s1, s2, ...).")
        if name == "semisup":
            p.add_argument("--null-pool", required=True,
                           help="CSV file with a single column of null samples.")
        p.add_argument("--config", default=None, help="JSON configuration file.")
        p.add_argument("--seed", type=int, default=None,
                       help="Overrides CLAW_SEED and the configuration file.")
        p.add_argument("--out", default=".", help="Output directory.")

    replicate_defaults = get_default_args(sim.replicate)
    replicate_docs = get_keyword_docs(sim.replicate.__doc__)
    p = sub.add_parser("simulate", help="Run replicated simulations.",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--family", required=True, choices=sim.FAMILIES,
                   help="The design family.")
    p.add_argument("--setting", required=True, help="The setting of the family.")
    p.add_argument("--param", action="append", default=[],
                   help="The swept parameter, as name=value.")
    p.add_argument("--reps", type=_positive_int, default=200,
                   help=replicate_docs["n_reps"]["doc"])
    p.add_argument("--alpha", type=_level, default=replicate_defaults["alpha"],
                   help=replicate_docs["alpha"]["doc"])
    p.add_argument("--methods", default="claw,bh",
                   help="Comma-separated method names (%s)." % (", ".join(sorted(sim.METHODS))))
    p.add_argument("--seed", type=int, default=None,
                   help=replicate_docs["master_seed"]["doc"])
    p.add_argument("--workers", type=_positive_int, default=replicate_defaults["workers"],
                   help=replicate_docs["workers"]["doc"])
    p.add_argument("--full-null", action="store_true", default=False,
                   help="Simulate without signals.")
    p.add_argument("--null-pool-factor", type=float, default=0.0,
                   help="Attach a null pool of this many times m samples.")
    p.add_argument("--out", default=None, help="Summary CSV file.")
    p.add_argument("--json", default=None, help="Summary JSON file.")

    p = sub.add_parser("aggregate", help="Aggregate an e-value panel.",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("panel", help="CSV file with one row per unit and one column per source.")
    p.add_argument("--weights", default=None,
                   help="Comma-separated positive source weights.")
    p.add_argument("--alpha", type=_level, default=0.05, help="The target FDR level.")
    p.add_argument("--out", default=None, help="Output JSON file (default: stdout).")
    return parser


_COMMANDS = {
    "run": cmd_run,
    "semisup": cmd_semisup,
    "simulate": cmd_simulate,
    "aggregate": cmd_aggregate,
}


def main(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    """Entry point of the ``claw`` command. Returns the
    exit code."""
    parser = create_parser()
    args = parser.parse_args(argv)
    log = get_simple_logger(
        level=logging.WARNING if args.quiet else logging.INFO,
        filename=args.log_filename,
        formatter=logging.Formatter("[%(levelname)s] %(message)s"),
    )
    try:
        return _COMMANDS[args.command](args, log)
    except ClawError as e:
        log.error("%s: %s", type(e).__name__, e)
        return EXIT_INPUT
    except (ClawNumericError, FloatingPointError) as e:
        log.error("numeric failure: %s", e)
        return EXIT_NUMERIC
    except (IOError, OSError) as e:
        log.error("%s", e)
        return EXIT_INPUT
    except ValueError as e:
        log.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma:nocover
    sys.exit(main())

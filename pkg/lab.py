"""Command-line front end: family enumeration, formula evaluation, lattice sampling and experiments."""

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import config
from admissible import Context, affine_family, classify, count_N, enumerate_admissible
from centered import CenteredFamily, enumerate_centered
from congruence import congruence_family, enumerate_congruence_rank1
from errors import ConfigError, ConfigParseError, ConfigTypeError, ParameterError, ResourceError, UsageError
from Experiments import ExperimentConfig, ExperimentKind, run_clt_trend, run_experiment
from lattice import enumerate_in_ball
from log_utils import configure_logging, verbosity_to_level
from moments import (
    Truncation,
    affine_main_term,
    affine_moment,
    centered_moment_finite,
    centered_moment_limit,
    congruence_main_term,
    congruence_moment,
    poisson_joint_moment,
)
from partitions import MainContext, enumerate_main_family, matrix_to_partition
from regions import RegionFamily
from samplers import Space, sample_lattice, substream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3
EXIT_RESOURCE = 4


# Value converters shared by flags and config files

def _int_list(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _fraction(text):
    return Fraction(str(text).strip())


def _fraction_list(text):
    return tuple(_fraction(x) for x in str(text).split(",") if x.strip())


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


KEY_TYPES = {
    "d": int,
    "k": int,
    "r": int,
    "u": int,
    "n": int,
    "q": int,
    "bound": int,
    "p_vec": _int_list,
    "volume": _fraction,
    "volumes": _fraction_list,
    "lambda": _fraction,
    "c": _fraction_list,
    "kvec": _int_list,
    "samples": int,
    "seed": int,
    "index": int,
    "prime": int,
    "t_grid": _fraction_list,
    "n_points": int,
    "levels": _fraction_list,
    "shells": _fraction_list,
    "dims": _int_list,
    "k_max": int,
    "u_max": int,
    "t_max": int,
    "entry_bound": int,
    "e_max": int,
    "ell_bound": int,
    "mc_samples": int,
    "main_only": _bool,
    "include_zero": _bool,
    "radius": float,
    "workers": int,
    "space": str,
    "family": str,
    "context": str,
    "format": str,
    "out": str,
    "check": _bool,
}

DEFAULTS = {
    "d": 10,
    "k": 2,
    "r": 1,
    "u": 1,
    "q": 3,
    "bound": config.DEFAULT_ENTRY_BOUND,
    "volume": Fraction(20),
    "lambda": Fraction(1),
    "samples": config.DEFAULT_SAMPLES,
    "seed": config.DEFAULT_SEED,
    "index": 0,
    "prime": config.DEFAULT_PRIME,
    "t_grid": tuple(Fraction(str(t)) for t in config.DEFAULT_T_GRID),
    "n_points": config.DEFAULT_N_POINTS,
    "levels": tuple(Fraction(v) for v in config.DEFAULT_LEVELS),
    "shells": (),
    "k_max": 2,
    "u_max": config.DEFAULT_U_MAX,
    "t_max": config.DEFAULT_T_MAX,
    "entry_bound": config.DEFAULT_ENTRY_BOUND,
    "e_max": config.DEFAULT_E_MAX,
    "ell_bound": config.DEFAULT_ELL_BOUND,
    "mc_samples": config.MC_SAMPLES,
    "main_only": False,
    "workers": config.DEFAULT_WORKERS,
    "space": Space.AFFINE.value,
    "family": "admissible",
    "format": config.DEFAULT_FORMAT,
    "check": False,
}


@dataclass
class CliConfig:
    """Resolved settings of one invocation: defaults < config file < flags."""

    subcommand: str
    values: dict = field(default_factory=dict)
    action: str = None  # experiment kind or moments operation
    output_format: str = config.DEFAULT_FORMAT
    out: str = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    def to_dict(self):
        data = {"subcommand": self.subcommand, "action": self.action, "format": self.output_format, "out": self.out}
        for key, value in sorted(self.values.items()):
            data[key] = _jsonable(value)
        return data


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, tuple):
        return [_jsonable(x) for x in value]
    return value


def _normalize_key(key):
    return key.strip().replace("-", "_")


def convert(key, raw):
    if key not in KEY_TYPES:
        raise ConfigTypeError(key, "unknown key")
    try:
        return KEY_TYPES[key](raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigTypeError(key, f"cannot read {raw!r}: {exc}") from exc


def load_config(path):
    """
    Parse a flat key = value file.

    Blank lines and lines starting with # are skipped; keys use the flag names
    with dashes or underscores.

    Raises:
        ConfigParseError: malformed line, with its line number.
        ConfigTypeError: value of the wrong type, with the key name.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, raw = text.partition("=")
        key = _normalize_key(key)
        raw = raw.strip()
        if not sep or not key or not raw or "=" in raw:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", number)
        values[key] = convert(key, raw)
    return values


# Argument parsing

def _flag_type(key):
    def parse(text):
        try:
            return KEY_TYPES[key](text)
        except (ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}: {exc}") from exc
    return parse


def _options_parser():
    options = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    for key in KEY_TYPES:
        if key in ("check", "main_only", "include_zero"):
            continue
        flag = "--" + key.replace("_", "-")
        options.add_argument(flag, dest=key, type=_flag_type(key), default=argparse.SUPPRESS)
    options.add_argument("--main-only", dest="main_only", action="store_true", default=argparse.SUPPRESS)
    options.add_argument("--include-zero", dest="include_zero", type=_flag_type("include_zero"),
                         default=argparse.SUPPRESS)
    options.add_argument("--check", dest="check", action="store_true", default=argparse.SUPPRESS,
                         help="exit 3 when an acceptance band fails")
    options.add_argument("--config", dest="config_path", default=None, help="flat key = value file")
    options.add_argument("-v", "--verbose", action="count", default=0)
    options.add_argument("--log-file", default=None)
    return options


def build_parser():
    options = _options_parser()
    parser = argparse.ArgumentParser(prog="lab", description="Rogers-type moment formulas lab", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=config.LAB_VERSION)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("enumerate", parents=[options], allow_abbrev=False, help="dump matrix families as JSON lines")
    moments = sub.add_parser("moments", parents=[options], allow_abbrev=False, help="evaluate moment formulas")
    group = moments.add_mutually_exclusive_group()
    for name in ("poisson", "main", "limit", "formula", "centered"):
        group.add_argument(f"--{name}", dest="action", action="store_const", const=name)
    sub.add_parser("sample", parents=[options], allow_abbrev=False, help="dump one sampled lattice")
    experiment = sub.add_parser("experiment", parents=[options], allow_abbrev=False,
                                help="run a Monte Carlo experiment")
    experiment.add_argument("kind", choices=[k.value for k in ExperimentKind] + ["trend"])
    return parser


def resolve(args):
    """Merge defaults, the optional config file, the seed environment variable and the flags."""
    values = dict(DEFAULTS)
    env_seed = os.environ.get(config.SEED_ENV_VAR)
    if env_seed:
        values["seed"] = convert("seed", env_seed)
    if args.config_path:
        values.update(load_config(args.config_path))
    for key in KEY_TYPES:
        if key in vars(args):
            values[key] = getattr(args, key)
    fmt = values.pop("format")
    out = values.pop("out", None)
    if fmt not in config.OUTPUT_FORMATS:
        raise UsageError(f"--format must be one of {', '.join(config.OUTPUT_FORMATS)}")
    action = getattr(args, "kind", None) or getattr(args, "action", None)
    return CliConfig(args.subcommand, values, action=action, output_format=fmt, out=out)


# Output

def _format_cell(value):
    if isinstance(value, float):
        return f"{value:.{config.TABLE_FLOAT_DIGITS}g}"
    return str(_jsonable(value))


def render(document, rows, fmt, lines=None):
    if fmt == "json":
        if lines is not None:
            return "".join(json.dumps(line) + "\n" for line in lines)
        return json.dumps(document, indent=2, default=str) + "\n"
    rows = rows or []
    headers = list(rows[0]) if rows else []
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=headers, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format_cell(value) for key, value in row.items()})
        return buffer.getvalue()
    cells = [[_format_cell(row[h]) for h in headers] for row in rows]
    widths = [max([len(h)] + [len(c[i]) for c in cells]) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    out.append("  ".join("-" * w for w in widths))
    out.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)
    return "\n".join(out) + "\n"


def emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _envelope(cli, payload):
    return {"version": config.LAB_VERSION, "config": cli.to_dict(), **payload}


# Subcommands

def _truncation(cli):
    return Truncation(
        u_max=cli.get("u_max"),
        t_max=cli.get("t_max"),
        entry_bound=cli.get("entry_bound"),
        e_max=cli.get("e_max"),
        ell_bound=cli.get("ell_bound"),
        main_only=cli.get("main_only"),
        mc_samples=cli.get("mc_samples"),
    )


def _matrix_rows(matrices):
    return [{"k": m.k, "r": m.r, "u": m.u, "rows": json.dumps([list(r) for r in m.entries])} for m in matrices]


def cmd_enumerate(cli):
    family = cli.get("family")
    k = cli.get("k")
    lines = []
    if family == "admissible":
        for D in enumerate_admissible(k, cli.get("r"), cli.get("u"), cli.get("bound")):
            lines.append(dict(D.to_dict(), count=count_N(D)))
    elif family == "main":
        context = MainContext(cli.get("context") or MainContext.AFFINE.value)
        for M in enumerate_main_family(k, context):
            lines.append(dict(M.to_dict(), partition=str(matrix_to_partition(M))))
    elif family == "affine":
        for member in affine_family(k, cli.get("d"), cli.get("u_max"), cli.get("entry_bound")):
            lines.append(dict(member.matrix.to_dict(), coefficient=str(member.coefficient),
                              origin=member.origin.value, klass=classify(member.matrix, Context.AFFINE).value))
    elif family == "rank1":
        for term in enumerate_congruence_rank1(k, cli.get("q"), cli.get("t_max"), cli.get("ell_bound"), cli.get("d")):
            lines.append(term.to_dict())
    elif family == "congruence":
        for member in congruence_family(k, cli.get("q"), cli.get("d"), cli.get("u_max"), cli.get("t_max"),
                                        cli.get("ell_bound"), cli.get("entry_bound"), cli.get("e_max")):
            lines.append(dict(member.matrix.to_dict(), coefficient=str(member.coefficient),
                              tail=member.tail, origin=member.origin.value))
    elif family in ("centered-affine", "centered-congruence"):
        centered_family = CenteredFamily.AFFINE if family == "centered-affine" else CenteredFamily.CONGRUENCE
        q = cli.get("q") if centered_family is CenteredFamily.CONGRUENCE else None
        for term in enumerate_centered(k, cli.get("n") or 1, cli.get("u"), cli.get("entry_bound"),
                                       centered_family, q=q, d=cli.get("d"), t_max=cli.get("t_max"),
                                       ell_bound=cli.get("ell_bound"), e_max=cli.get("e_max"),
                                       main_only=cli.get("main_only")):
            lines.append(term.to_dict())
    else:
        raise UsageError(f"unknown --family {family!r}; use admissible, main, affine, rank1, congruence, "
                         "centered-affine or centered-congruence")
    rows = [{"index": i, "matrix": json.dumps(line.get("rows", line.get("matrix"))), "u": line.get("u", "")}
            for i, line in enumerate(lines)]
    emit(render(None, rows, cli.output_format, lines=lines if cli.output_format == "json" else None), cli.out)
    return EXIT_OK


def _volumes(cli, k):
    volumes = cli.get("volumes")
    if volumes:
        if len(volumes) != k:
            raise ParameterError(f"--volumes has {len(volumes)} entries, expected k={k}")
        return list(volumes)
    return [cli.get("volume")] * k


def cmd_moments(cli):
    action = cli.action or "formula"
    k, d = cli.get("k"), cli.get("d")
    if action == "poisson":
        volumes = list(cli.get("volumes") or [cli.get("volume")])
        value = poisson_joint_moment(cli.get("lambda"), volumes)
        payload = {"operation": "poisson_joint_moment", "value": str(value), "float": float(value)}
    elif action == "main":
        volumes = _volumes(cli, k)
        if cli.get("space") == Space.CONGRUENCE.value:
            value = congruence_main_term(k, volumes, cli.get("q"))
        else:
            value = affine_main_term(k, volumes)
        payload = {"operation": "main_term", "value": str(value), "float": float(value)}
    elif action == "limit":
        value = centered_moment_limit(cli.get("c") or (Fraction(1),), cli.get("kvec") or (k,))
        payload = {"operation": "centered_moment_limit", "value": str(value), "float": float(value)}
    else:
        space = Space(cli.get("space"))
        regions = RegionFamily.balls(d, _volumes(cli, k))
        truncation = _truncation(cli)
        if action == "centered":
            family = CenteredFamily.CONGRUENCE if space is Space.CONGRUENCE else CenteredFamily.AFFINE
            q = cli.get("q") if space is Space.CONGRUENCE else None
            series = centered_moment_finite(k, d, regions, truncation, family=family, q=q)
        elif space is Space.CONGRUENCE:
            series = congruence_moment(k, d, cli.get("q"), regions, truncation)
        elif space is Space.AFFINE:
            series = affine_moment(k, d, regions, truncation)
        else:
            raise UsageError("moment formulas exist for --space affine or congruence")
        payload = dict(series.to_dict(), operation=action)
    rows = [{"operation": payload["operation"], "value": payload.get("float", payload["value"]),
             "residual": payload.get("residual", 0.0)}]
    emit(render(_envelope(cli, payload), rows, cli.output_format), cli.out)
    return EXIT_OK


def cmd_sample(cli):
    seed, index = cli.get("seed"), cli.get("index")
    rng = substream(seed, index)
    lattice = sample_lattice(cli.get("space"), cli.get("d"), rng, prime=cli.get("prime"),
                             p_vec=cli.get("p_vec"), q=cli.get("q"))
    lattice.provenance.update(seed=seed, index=index)
    radius = cli.get("radius")
    if radius is not None:
        cloud = enumerate_in_ball(lattice, radius, include_zero=cli.get("include_zero"))
        if cli.output_format == "csv":
            buffer = io.StringIO()
            cloud.write_csv(buffer)
            emit(buffer.getvalue(), cli.out)
            return EXIT_OK
        payload = {"lattice": lattice.to_dict(), "count": cloud.count, "norms": cloud.norms.tolist()}
    else:
        payload = {"lattice": lattice.to_dict()}
    rows = [{"row": i, "basis": json.dumps(row)} for i, row in enumerate(lattice.basis.tolist())]
    emit(render(_envelope(cli, payload), rows, cli.output_format), cli.out)
    return EXIT_OK


def experiment_config_from(cli, kind):
    space = Space(cli.get("space"))
    return ExperimentConfig(
        kind=kind,
        space=space,
        d=cli.get("d"),
        volume=cli.get("volume"),
        k_max=cli.get("k_max"),
        samples=cli.get("samples"),
        seed=cli.get("seed"),
        prime=cli.get("prime"),
        p_vec=cli.get("p_vec"),
        q=cli.get("q") if space is Space.CONGRUENCE else None,
        t_grid=cli.get("t_grid"),
        n_points=cli.get("n_points"),
        levels=cli.get("levels"),
        shells=cli.get("shells"),
        include_zero=cli.get("include_zero"),
        workers=cli.get("workers"),
        truncation=_truncation(cli),
    )


def cmd_experiment(cli):
    if cli.action == "trend":
        dims = cli.get("dims")
        if not dims:
            raise UsageError("experiment trend needs --dims, e.g. --dims 8,11,14")
        report = run_clt_trend(experiment_config_from(cli, ExperimentKind.CLT), dims)
    else:
        report = run_experiment(experiment_config_from(cli, ExperimentKind(cli.action)))
    document = _envelope(cli, {"report": report.to_dict()})
    emit(render(document, report.rows(), cli.output_format), cli.out)
    if cli.get("check") and not report.passed:
        failed = [name for name, c in report.checks.items() if not c["passed"] and not c["informational"]]
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


COMMANDS = {
    "enumerate": cmd_enumerate,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
}


def dispatch(argv=None):
    """Run one command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 2 for usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(verbosity_to_level(args.verbose), args.log_file)
    try:
        cli = resolve(args)
        logger.info("running %s %s", cli.subcommand, cli.action or "")
        return COMMANDS[cli.subcommand](cli)
    except (UsageError, ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(dispatch())

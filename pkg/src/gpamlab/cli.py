"""Command-line entry point.

Subcommands: noise, partition, enhance, solve, experiment, verify,
version.  Every run that writes files leaves a JSON manifest beside them
(full configuration, seed, partition hash when one is built, and the
package version), so outputs can be reproduced from the manifest alone.

Exit codes: 0 success and all verdicts pass, 1 a verdict failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path

from . import __version__
from .enhancement import enhance
from .experiments import (
    EXPERIMENTS,
    partition_hash,
    read_report_dir,
    rows_to_csv,
    write_report,
)
from .fieldio import (
    read_field,
    write_enhanced_pair,
    write_field,
    write_trajectory,
)
from .fields import TWO_PI, Grid
from .lp import build_partition, partition_dump_rows
from .noise import (
    MOLLIFIERS,
    mixed_constant,
    mollify,
    renorm_constant,
    sample_white_noise,
)
from .pde import NONLINEARITIES, SolveConfig, solve_classical


class ConfigError(Exception):
    """Bad configuration value; maps to exit code 2."""


def _write_manifest(path: Path, command: str, config: dict) -> None:
    payload = {"command": command, "config": config, "version": __version__}
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                    encoding="ascii")


def _manifest_beside(out: Path, command: str, config: dict) -> None:
    if out.is_dir():
        _write_manifest(out / "run.json", command, config)
    else:
        _write_manifest(out.with_name(out.name + ".run.json"),
                        command, config)


# ---------------------------------------------------------------------------
# value parsing for configs and overrides


def parse_range(text: str) -> list[int]:
    """Inclusive integer range 'a..b', or a comma list of integers."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            start, stop = int(lo), int(hi)
        except ValueError as err:
            raise ConfigError(f"bad range {text!r}") from err
        if stop < start:
            raise ConfigError(f"empty range {text!r}")
        return list(range(start, stop + 1))
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as err:
        raise ConfigError(f"bad range {text!r}") from err


def _parse_value(text: str):
    """key=value payloads: int, float, range, comma list, or string."""
    text = text.strip()
    if ".." in text:
        return parse_range(text)
    if "," in text:
        items = [_parse_value(tok) for tok in text.split(",")]
        return items
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out = {}
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = _parse_value(value)
    return out


def _experiment_kwargs(name: str, config: dict) -> dict:
    fn = EXPERIMENTS[name]
    allowed = set(inspect.signature(fn).parameters)
    kwargs = {}
    for key, value in config.items():
        if key not in allowed:
            raise ConfigError(
                f"unknown config key {key!r} for experiment {name}; "
                f"valid keys: {', '.join(sorted(allowed))}")
        if key in ("psis", "eps_list", "a_values", "n_range", "osc_levels") \
                and not isinstance(value, list):
            value = [value]
        kwargs[key] = value
    return kwargs


# ---------------------------------------------------------------------------
# subcommands


def _cmd_version(args) -> int:
    print(f"gpamlab {__version__}")
    return 0


def _cmd_noise(args) -> int:
    if args.mode == "sample":
        xi = sample_white_noise(Grid(args.n), args.seed, stream=args.stream)
        field = xi.field
        if args.psi is not None:
            if args.eps is None:
                raise ConfigError("--psi needs --eps")
            field = mollify(xi, MOLLIFIERS[args.psi], args.eps)
        if args.unit_density:
            field = TWO_PI * field
        out = Path(args.out)
        write_field(out, field)
        _manifest_beside(out, "noise sample", {
            "n": args.n, "seed": args.seed, "stream": args.stream,
            "psi": args.psi, "eps": args.eps,
            "unit_density": args.unit_density, "out": str(out)})
        return 0
    # constants table: one row per eps
    rows = []
    psi = MOLLIFIERS[args.psi or "sharp"]
    for eps in args.eps_values:
        if args.mixed:
            value = mixed_constant(psi, eps, k_cut=args.k_cut)
        else:
            value = renorm_constant(psi, eps, k_cut=args.k_cut)
        rows.append((eps, value))
    text = rows_to_csv(["eps", "constant"], rows)
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="ascii")
        _manifest_beside(out, "noise constants", {
            "psi": args.psi or "sharp", "eps": args.eps_values,
            "mixed": args.mixed, "k_cut": args.k_cut, "out": str(out)})
    else:
        sys.stdout.write(text)
    return 0


def _cmd_partition(args) -> int:
    part = build_partition(Grid(args.n))
    text = rows_to_csv(["j", "radius", "weight"],
                       partition_dump_rows(part))
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="ascii")
        _manifest_beside(out, "partition dump", {
            "n": args.n, "partition": partition_hash(part),
            "out": str(out)})
    else:
        sys.stdout.write(text)
    return 0


def _cmd_enhance(args) -> int:
    theta = read_field(args.infile)
    part = build_partition(theta.grid)
    pair = enhance(theta, args.c, part)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_enhanced_pair(out, pair, args.alpha)
    _manifest_beside(out, "enhance", {
        "in": args.infile, "c": args.c, "alpha": args.alpha,
        "partition": partition_hash(part), "out": str(out)})
    return 0


def _cmd_solve(args) -> int:
    u0 = read_field(args.u0)
    h = read_field(args.h)
    if args.f not in NONLINEARITIES:
        raise ConfigError(
            f"unknown nonlinearity {args.f!r}; "
            f"choose from {', '.join(sorted(NONLINEARITIES))}")
    try:
        cfg = SolveConfig(args.horizon, args.dt, scheme=args.scheme,
                          snap_every=args.snap_every)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    traj = solve_classical(u0, h, args.c, NONLINEARITIES[args.f], cfg)
    out = Path(args.out)
    write_trajectory(out, traj)
    _manifest_beside(out, "solve", {
        "u0": args.u0, "h": args.h, "c": args.c, "f": args.f,
        "horizon": args.horizon, "dt": args.dt, "scheme": args.scheme,
        "snap_every": args.snap_every, "out": str(out)})
    if traj.exploded:
        print(f"warning: solution exploded at t={traj.explosion_time}")
    return 0


def _cmd_experiment(args) -> int:
    name = args.name
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; "
            f"choose from {', '.join(sorted(EXPERIMENTS))}")
    config = read_config_file(args.config) if args.config else {}
    # command-line overrides win over the config file
    if args.alpha is not None:
        config["alpha"] = args.alpha
    if args.n is not None:
        config["n_range"] = parse_range(args.n)
    if args.grid is not None:
        config["grid_n"] = args.grid
    if args.samples is not None:
        config["samples"] = args.samples
    if args.seed is not None:
        config["seed"] = args.seed
    if args.jobs is not None:
        config["jobs"] = args.jobs
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set wants key=value, got {item!r}")
        config[key.strip()] = _parse_value(value)
    kwargs = _experiment_kwargs(name, config)
    try:
        report = EXPERIMENTS[name](**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"experiment {name} rejected config: {err}") from err
    outdir = Path(args.out)
    write_report(report, outdir)
    for line in report.verdict_lines():
        print(line)
    print(f"report written to {outdir}")
    return 0 if report.passed else 1


def _cmd_verify(args) -> int:
    outdir = Path(args.dir)
    try:
        report = read_report_dir(outdir)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot verify {outdir}: {err}") from err
    recomputed = "\n".join(report.verdict_lines()) + "\n"
    stored_path = outdir / "verdict.txt"
    stored = stored_path.read_text(encoding="ascii") if stored_path.is_file() \
        else None
    sys.stdout.write(recomputed)
    if stored is not None and stored != recomputed:
        print("stored verdict.txt does not match the recomputed verdict")
        return 1
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpamlab",
        description="Spectral laboratory for renormalized noise "
                    "enhancements and the renormalized heat equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("version", help="print the package version")

    p = sub.add_parser("noise", help="sample noise or tabulate constants")
    noise_sub = p.add_subparsers(dest="mode", required=True)
    ps = noise_sub.add_parser("sample", help="write one noise field file")
    ps.add_argument("--n", type=int, required=True, help="grid size")
    ps.add_argument("--seed", type=int, required=True)
    ps.add_argument("--stream", type=int, default=0)
    ps.add_argument("--psi", choices=sorted(MOLLIFIERS), default=None,
                    help="mollify with this profile (needs --eps)")
    ps.add_argument("--eps", type=float, default=None)
    ps.add_argument("--unit-density", action="store_true",
                    help="scale so lattice constants are resonance budgets")
    ps.add_argument("--out", required=True)
    pc = noise_sub.add_parser("constants",
                              help="renormalization constants per eps")
    pc.add_argument("--psi", choices=sorted(MOLLIFIERS), default="sharp")
    pc.add_argument("--eps", dest="eps_values", type=float, nargs="+",
                    required=True)
    pc.add_argument("--mixed", action="store_true",
                    help="first-power sum instead of the squared one")
    pc.add_argument("--k-cut", type=int, default=None)
    pc.add_argument("--out", default=None)

    p = sub.add_parser("partition", help="dump the dyadic partition")
    part_sub = p.add_subparsers(dest="mode", required=True)
    pd = part_sub.add_parser("dump", help="weights along mode sweeps")
    pd.add_argument("--n", type=int, required=True)
    pd.add_argument("--out", default=None)

    p = sub.add_parser("enhance", help="lift a field file to an enhanced pair")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--c", type=float, required=True,
                   help="renormalization constant to subtract")
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="march the renormalized equation")
    p.add_argument("--u0", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--f", default="identity")
    p.add_argument("--horizon", "--T", dest="horizon", type=float,
                   required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--scheme", choices=("etd1", "etd2rk", "picard"),
                   default="etd2rk")
    p.add_argument("--snap-every", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("experiment", help="run one experiment")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", default=None, help="flat key=value file")
    p.add_argument("--out", default="out")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n", default=None,
                   help="level range, e.g. 3..8 or 3,5,7")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="any other experiment parameter")

    p = sub.add_parser("verify",
                       help="recompute verdicts from a stored report")
    p.add_argument("--dir", required=True)

    return parser


_DISPATCH = {
    "version": _cmd_version,
    "noise": _cmd_noise,
    "partition": _cmd_partition,
    "enhance": _cmd_enhance,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors and 0 on --help
        return int(err.code or 0)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

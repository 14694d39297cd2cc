"""Command-line front end: ``dualcnot <subcommand> [flags]``.

Exit codes: 0 success, 2 usage error, 3 numerical-validity error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError, DomainError, NumericalValidityError
from .noise import GadmParams
from .protocol import Direction, ProtocolConfig
from .states import QubitParams
from . import sweeps

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

ANGLE_KEYS = ("theta_a", "phi_a", "theta_b", "phi_b", "theta_aux", "phi_aux")
COMMON_DEFAULTS = {
    "theta_a": 0.0,
    "phi_a": 0.0,
    "theta_b": 0.0,
    "phi_b": 0.0,
    "theta_aux": 0.0,
    "phi_aux": 0.0,
    "eta": None,
    "p": None,
    "direction": "auto",
    "grid": 51,
    "out": None,
    "format": "csv",
    "seed": 0,
    "shots": 10_000,
    "degrees": False,
}
# noise sweeps start from the configuration where the noiseless circuit is exact
COMMAND_DEFAULTS = {
    "sweep-noise": {"theta_a": math.pi, "theta_b": math.pi, "theta_aux": math.pi},
}
COMMANDS = ("run", "sweep-aux", "sweep-initial", "sweep-noise", "compare", "trajectory")


class UsageError(Exception):
    pass


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("input state (radians unless --degrees; default 0)")
    for key in ANGLE_KEYS:
        g.add_argument("--" + key.replace("_", "-"), type=float, dest=key)
    g.add_argument("--degrees", action="store_true", help="read every angle in degrees")
    n = p.add_argument_group("noise (run/trajectory; off unless --eta is given)")
    n.add_argument("--eta", type=float, help="GAD strength in [0, 1]")
    n.add_argument("--p", type=float, help="GAD thermal mixing in [0, 1] (default 1 when --eta is set)")
    o = p.add_argument_group("output")
    o.add_argument("--direction", choices=[d.value for d in Direction], help="target direction (default auto)")
    o.add_argument("--grid", type=int, help="points per sweep axis, at least 2 (default 51)")
    o.add_argument("--out", help="write to this file instead of stdout")
    o.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    o.add_argument("--seed", type=int, help="trajectory seed (default 0)")
    o.add_argument("--shots", type=int, help="trajectory shots, at least 1 (default 10000)")
    o.add_argument("--config", help="JSON file with the same keys as the flags; flags win")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="dualcnot", description="Dual non-local CNOT simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "one configuration: circuit and closed-form infidelity, overlaps, cost counters",
        "sweep-aux": "grid over theta_aux and phi_aux",
        "sweep-initial": "grid over theta_a and theta_b",
        "sweep-noise": "grid over eta and p with the noisy Bell channel (inputs default to theta_a=theta_b=theta_aux=pi)",
        "compare": "circuit vs closed forms over a theta_a/theta_b grid; JSON report plus summary on stderr",
        "trajectory": "sampled measurement outcomes, one seeded generator per shot",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    valid = set(COMMON_DEFAULTS)
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in valid:
            raise UsageError(f"unknown config key {key!r}")
        out[k] = value
    return out


def resolve_options(command: str, flags: dict) -> dict:
    """Merge built-in defaults, the config file and explicit flags, in that order."""
    user = _load_config(flags["config"]) if "config" in flags else {}
    user.update({k: v for k, v in flags.items() if k not in ("config", "command")})
    # built-in defaults are already in radians
    if user.get("degrees"):
        for k in ANGLE_KEYS:
            if k in user:
                user[k] = math.radians(float(user[k]))
    opts = dict(COMMON_DEFAULTS)
    opts.update(COMMAND_DEFAULTS.get(command, {}))
    opts.update(user)
    return opts


def config_from_options(opts: dict, *, allow_noise: bool = True) -> ProtocolConfig:
    try:
        alice = QubitParams(opts["theta_a"], opts["phi_a"])
        bob = QubitParams(opts["theta_b"], opts["phi_b"])
        aux = QubitParams(opts["theta_aux"], opts["phi_aux"])
        noise = None
        if allow_noise and opts["eta"] is not None:
            noise = GadmParams(opts["eta"], 1.0 if opts["p"] is None else opts["p"])
        elif opts["p"] is not None and opts["eta"] is None and allow_noise:
            raise UsageError("--p needs --eta")
        return ProtocolConfig(alice, bob, aux, noise=noise)
    except (DomainError, ConfigError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _check_counts(opts: dict) -> None:
    if int(opts["grid"]) < sweeps.MIN_GRID:
        raise UsageError(f"--grid must be at least {sweeps.MIN_GRID}")
    if int(opts["shots"]) < 1:
        raise UsageError("--shots must be at least 1")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def execute(command: str, opts: dict) -> tuple[str, str]:
    """Run one subcommand; returns ``(output, stderr_summary)``."""
    _check_counts(opts)
    fmt, n, direction = opts["format"], int(opts["grid"]), Direction(opts["direction"])
    if command == "run":
        cfg = config_from_options(opts)
        rec = sweeps.single_run(cfg, direction)
        if fmt == "json":
            return sweeps.dump_json(rec), ""
        flat = {k: v for k, v in rec.items() if k != "final_state"}
        return sweeps.format_csv(tuple(flat), [tuple(flat.values())]), ""
    if command in ("sweep-aux", "sweep-initial", "sweep-noise"):
        cfg = config_from_options(opts, allow_noise=False)
        fn = {"sweep-aux": sweeps.sweep_aux, "sweep-initial": sweeps.sweep_initial, "sweep-noise": sweeps.sweep_noise}
        table = fn[command](cfg, n, direction)
        return (table.to_json() if fmt == "json" else table.to_csv()), ""
    if command == "compare":
        cfg = config_from_options(opts, allow_noise=False)
        report = sweeps.compare(cfg, n, direction)
        if fmt == "json":
            text = sweeps.dump_json(report)
        else:
            text = sweeps.format_csv(sweeps.COMPARE_COLUMNS, [tuple(r.values()) for r in report["points"]])
        return text, sweeps.compare_summary(report)
    if command == "trajectory":
        cfg = config_from_options(opts)
        res = sweeps.trajectory(cfg, int(opts["shots"]), int(opts["seed"]), direction)
        summary = sweeps.dump_json(res.summary())
        if fmt == "json":
            return sweeps.dump_json({"summary": res.summary(), "shots": res.shots.records()}), ""
        return res.shots.to_csv(), summary
    raise UsageError(f"unknown command {command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns)
    command = flags.pop("command")
    try:
        opts = resolve_options(command, flags)
        out, summary = execute(command, opts)
    except UsageError as exc:
        print(f"dualcnot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalValidityError as exc:
        print(f"dualcnot: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"dualcnot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(out, opts["out"])
    if summary:
        sys.stderr.write(summary)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

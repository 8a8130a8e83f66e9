"""Command line entry point.

    slipstokes solve        [key=value ...] [--config FILE]
    slipstokes converge     ...
    slipstokes halfdisk     ...
    slipstokes manufactured ...

Parameters may be given as ``key=value`` tokens, as ``--key value`` flags, or
in a file of ``key=value`` lines (``#`` starts a comment).  Later sources
override earlier ones: file, then flags and tokens in command-line order.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .assembly import ALPHA_MAX, ProblemData
from .friction import UzawaConfig, fixed_point_residual

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

COMMANDS = ("solve", "converge", "halfdisk", "manufactured")

# applied unless the key is given explicitly
COMMAND_DEFAULTS = {
    "halfdisk": {"kappa": 0.1, "rho": 0.1, "levels": 3},
    "manufactured": {"levels": 4},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "solve"
    divisions: int = 16
    start_divisions: int = 4
    levels: int = 5
    mu: float = 1.0
    kappa: float = 0.3
    alpha1: float = 1e-2
    alpha2: float = 1e-2
    rho: float = 0.4
    tol: float = 1e-5
    max_iterations: int = 20000
    manufactured: str = "smooth"
    output: str = "output"
    export_fields: bool = True
    warm_start: bool = True

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError("command must be one of {}".format(", ".join(COMMANDS)))
        for name in ("divisions", "start_divisions", "levels", "mu", "kappa", "alpha1", "alpha2",
                     "rho", "tol", "max_iterations"):
            if not getattr(self, name) > 0:
                raise ConfigError("{} must be > 0".format(name))
        for name in ("alpha1", "alpha2"):
            if getattr(self, name) > ALPHA_MAX:
                raise ConfigError("{} must be <= {}".format(name, ALPHA_MAX))
        if self.command == "converge" and self.levels < 2:
            raise ConfigError("levels must be >= 2 for converge")
        return self

    def problem_data(self) -> ProblemData:
        return ProblemData(mu=self.mu, kappa=self.kappa, alpha1=self.alpha1, alpha2=self.alpha2)

    def uzawa(self) -> UzawaConfig:
        return UzawaConfig(rho=self.rho, tol=self.tol, max_iterations=self.max_iterations)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _coerce(key, raw, where):
    if key not in _FIELDS:
        raise ConfigError("unknown key '{}' ({})".format(key, where))
    kind = _FIELDS[key].type
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return low in ("1", "true", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError("cannot parse {}={!r} ({})".format(key, raw, where)) from None


def read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("cannot read config file {}: {}".format(path, exc.strerror)) from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key=value at {}:{}".format(path, lineno))
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = _coerce(key, raw, "{}:{}".format(path, lineno))
    return values


def parse_config(argv=None, config_file=None) -> RunConfig:
    """Build a validated :class:`RunConfig` from tokens and an optional file."""
    argv = list(argv or [])
    values = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    if argv and argv[0] in COMMANDS:
        values["command"] = argv.pop(0)
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--"):
            key = tok[2:]
            if "=" in key:
                key, raw = key.split("=", 1)
                key = key.replace("-", "_")
            else:
                key = key.replace("-", "_")
                if i + 1 >= len(argv):
                    raise ConfigError("flag {} needs a value".format(tok))
                i += 1
                raw = argv[i]
            values[key] = _coerce(key, raw, "flag {}".format(tok))
        elif "=" in tok:
            key, raw = tok.split("=", 1)
            values[key] = _coerce(key, raw, "argument {}".format(i + 1))
        else:
            raise ConfigError("unexpected argument {!r}".format(tok))
        i += 1
    for key, val in COMMAND_DEFAULTS.get(values.get("command", "solve"), {}).items():
        values.setdefault(key, val)
    return RunConfig(**values).validate()


def _run(cfg: RunConfig) -> int:
    from . import study
    from .exports import export_fields
    from .mesh import generate_square
    from .friction import uzawa_solve

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    data = cfg.problem_data()
    config = cfg.uzawa()

    if cfg.command == "solve":
        res = uzawa_solve(generate_square(cfg.divisions), None, data, config)
        print("iterations={} converged={} relative_change={:.3e} fixed_point_residual={:.3e}".format(
            res.iterations, res.converged, res.relative_change, fixed_point_residual(res, data, cfg.rho)))
        if cfg.export_fields:
            export_fields(res, data, out, stem="square")
        return EXIT_OK if res.converged else EXIT_NOT_CONVERGED

    if cfg.command == "converge":
        rep = study.run_square_study(cfg.levels, data, config, cfg.start_divisions, cfg.warm_start,
                                     output_dir=out if cfg.export_fields else None)
        rep.to_csv(out / "convergence.csv")
        for name in rep.error_columns:
            print("{}: errors {} rates {}".format(name, rep.column(name)[1:], rep.rates(name)))
        return EXIT_OK if all(r["converged"] for r in rep.rows) else EXIT_NOT_CONVERGED

    if cfg.command == "halfdisk":
        demo = study.run_halfdisk_demo(cfg.levels, data, config, cfg.warm_start,
                                       output_dir=out if cfg.export_fields else None)
        for lev, un, lt in zip(demo.levels, demo.arc_normal_velocity, demo.max_tangential_multiplier):
            print("level {}: max arc |u.n| = {:.3e}, max |lambda_t| = {:.6f}".format(lev, un, lt))
        return EXIT_OK if all(s.converged for s in demo.solutions) else EXIT_NOT_CONVERGED

    rep = study.run_manufactured_linear_check(cfg.levels, cfg.start_divisions, cfg.manufactured, data)
    rep.to_csv(out / "manufactured.csv")
    for name in rep.error_columns:
        print("{}: errors {} rates {}".format(name, rep.column(name), rep.rates(name)))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slipstokes", description="Stabilised P1-P1-P0 Stokes solver with Tresca slip.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file of key=value lines")
    parser.add_argument("-v", "--verbose", action="store_true")
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = parse_config([args.command] + rest, args.config)
    except (ConfigError, TypeError) as exc:
        print("config error: {}".format(exc), file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _run(cfg)
    except OSError as exc:
        print("I/O error: {}".format(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

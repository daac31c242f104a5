"""conc-lab: run one bound-vs-oracle experiment and emit a report.

Usage::

    conc-lab expander-tail --lambda 1/4 --mu 1/2 --steps 14 --eps 1/2 --seed 7

Common flags: --config FILE (key=value lines, # comments; command-line
flags override file values), --seed, --trials, --output PATH (default
stdout), --format csv|json, --parallelism, --budget (also via the
CONC_LAB_BUDGET environment variable), --timing (records wall times in
the report, waiving byte-reproducibility).  Exit status is 0 iff no
verdict is "violated" and no row errored.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .experiments import (
    ENUM_BUDGET,
    REGISTRY,
    RunConfig,
    parse_param,
    run_experiment,
)
from .reporting import emit_report
from .rng import DEFAULT_SEED

_COMMON_KEYS = ("seed", "trials", "output", "format", "parallelism", "budget")


def build_parser() -> argparse.ArgumentParser:
    epilog_lines = ["experiments (bound vs oracle):"]
    for name in sorted(REGISTRY):
        epilog_lines.append(f"  {name:18s} {REGISTRY[name].pairing}")
    parser = argparse.ArgumentParser(
        prog="conc-lab",
        description="Tail-bound laboratory: evaluate a bound and check it "
        "against its exact or Monte Carlo oracle.",
        epilog="\n".join(epilog_lines),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="experiment")
    for name in sorted(REGISTRY):
        exp = REGISTRY[name]
        sp = sub.add_parser(name, help=exp.pairing)
        for spec in exp.params:
            sp.add_argument(f"--{spec.name}", dest=spec.name, metavar=spec.kind.upper(),
                            help=spec.help)
        sp.add_argument("--config", help="key=value config file; flags override")
        sp.add_argument("--seed", help=f"master seed (default {DEFAULT_SEED})")
        sp.add_argument("--trials", help="Monte Carlo trials (default 10000)")
        sp.add_argument("--output", help="report path, '-' for stdout (default '-')")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        help="report format (default csv)")
        sp.add_argument("--parallelism", help="concurrent rows (default 1)")
        sp.add_argument("--budget", help="enumeration budget (default "
                        f"{ENUM_BUDGET} or CONC_LAB_BUDGET)")
        sp.add_argument("--timing", action="store_true", default=None,
                        help="write measured wall times (waives byte-reproducibility)")
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    return values


def _parse_common(name: str, raw: str):
    if name in ("seed", "trials", "parallelism", "budget"):
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"--{name}: expected an integer, got {raw!r}") from exc
        if name != "seed" and value < 1:
            raise ValueError(f"--{name}: must be >= 1, got {raw}")
        return value
    if name == "format":
        if raw not in ("csv", "json"):
            raise ValueError(f"--format: must be csv or json, got {raw!r}")
        return raw
    if name == "timing":
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"timing: expected a boolean, got {raw!r}")
    return raw


def parse_config(argv: Sequence[str]) -> RunConfig:
    """argv (without the program name) -> validated RunConfig.

    Precedence: command-line flag, then config-file value, then default.
    Unknown config-file keys and malformed values are rejected with the
    valid range in the message.
    """
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.error("an experiment id is required (see --help)")
    exp = REGISTRY[ns.command]
    file_values: dict[str, str] = {}
    if ns.config:
        file_values = _read_config_file(ns.config)
        known = {spec.name for spec in exp.params} | set(_COMMON_KEYS) | {"timing"}
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise ValueError(
                f"unknown config key(s) {', '.join(unknown)}; valid keys: "
                f"{', '.join(sorted(known))}"
            )

    params = {}
    for spec in exp.params:
        raw = getattr(ns, spec.name)
        if raw is None:
            raw = file_values.get(spec.name)
        if raw is None:
            if spec.required:
                raise ValueError(
                    f"missing required parameter --{spec.name} ({spec.help}); "
                    f"pass it as a flag or config-file key"
                )
            params[spec.name] = spec.default
        else:
            params[spec.name] = parse_param(spec, str(raw))

    def common(name: str, default):
        raw = getattr(ns, "fmt" if name == "format" else name, None)
        if raw is None:
            raw = file_values.get(name)
        if raw is None:
            return default
        if isinstance(raw, bool):
            return raw
        return _parse_common(name, str(raw))

    env_budget = os.environ.get("CONC_LAB_BUDGET")
    default_budget = int(env_budget) if env_budget else ENUM_BUDGET
    return RunConfig(
        command=ns.command,
        params=params,
        seed=common("seed", DEFAULT_SEED),
        trials=common("trials", 10000),
        output=common("output", "-"),
        fmt=common("format", "csv"),
        parallelism=common("parallelism", 1),
        budget=common("budget", default_budget),
        timing=bool(common("timing", False)),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = parse_config(argv)
    except ValueError as exc:
        print(f"conc-lab: {exc}", file=sys.stderr)
        return 2
    try:
        rows, failed = run_experiment(config)
    except ValueError as exc:
        print(f"conc-lab: {exc}", file=sys.stderr)
        return 2
    text = emit_report(rows, config.fmt, config.output, include_timing=config.timing)
    if config.output == "-":
        sys.stdout.write(text)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

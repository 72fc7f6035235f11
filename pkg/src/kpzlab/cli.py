"""Command-line front end.

Every subcommand resolves one experiment driver: defaults come from the
driver's config table, a ``--config`` file of flat KEY=VALUE lines may
override them, and repeatable ``--set KEY=VALUE`` flags beat the file.
``--print-config`` shows the effective configuration without running
anything.  Reports are printed as text and, with ``--out``, written as
``report.json`` plus one CSV per table; identical configurations produce
byte-identical report.json files regardless of ``--threads``.

Exit status: 0 when every flagged check passes, 1 on a failed check or a
compute error, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import experiments
from .experiments import acceptance_suite, effective_config

RUNNERS = {
    **experiments.SECTIONS,
    "field": experiments.run_field,
    "deviation": experiments.run_deviation,
    "steadiness": experiments.run_steadiness,
}

# subcommand -> driver section
SUBCOMMANDS = {
    "field": "field",
    "weight": "weight",
    "polymer": "shear",
    "profile": "profile",
    "twin-peaks": "twin_peaks",
    "brownianity": "brownianity",
    "deviation": "deviation",
    "cliffs": "cliffs",
    "steadiness": "steadiness",
    "slender": "slender",
    "oracle-gue": "oracle_gue",
    "oracle-brownian": "oracle_brownian",
    "exponents": "exponents",
}


def _env_threads() -> int | None:
    raw = os.environ.get("KPZLAB_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"kpzlab: KPZLAB_THREADS={raw!r} is not an integer")
    if n < 1:
        raise SystemExit(f"kpzlab: KPZLAB_THREADS must be >= 1, got {n}")
    return n


def _split_kv(text: str, where: str) -> tuple[str, str]:
    if "=" not in text:
        raise ValueError(f"{where}: expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError(f"{where}: empty key in {text!r}")
    return key, value.strip()


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, value = _split_kv(line, f"{path}:{lineno}")
            out[key] = value
    return out


def _coerce(section: str, key: str, value: str):
    """Parse a raw string against the type of the section's default."""
    defaults = experiments.CONFIGS[section]
    if key not in defaults:
        raise ValueError(f"unknown config key {key!r} for this subcommand")
    ref = defaults[key]
    if isinstance(ref, bool):
        raise ValueError(f"key {key!r} is not settable")
    if isinstance(ref, int):
        return int(value)
    if isinstance(ref, float):
        return float(value)
    if isinstance(ref, tuple):
        parts = [p for p in value.replace(",", " ").split() if p]
        if not parts:
            raise ValueError(f"key {key!r} needs at least one number")
        return tuple(float(p) for p in parts)
    return value


def _gather_overrides(section: str, args) -> tuple[dict, int | None, int | None]:
    """Merge config file and --set pairs; returns (overrides, seed, threads)."""
    raw: dict[str, str] = {}
    if args.config:
        raw.update(_read_config_file(args.config))
    for item in args.set or []:
        key, value = _split_kv(item, "--set")
        raw[key] = value
    seed = threads = None
    if "seed" in raw:
        seed = int(raw.pop("seed"))
    if "threads" in raw:
        threads = int(raw.pop("threads"))
    overrides = {k: _coerce(section, k, v) for k, v in raw.items()}
    return overrides, seed, threads


def _resolve_run_params(args, cfg_seed, cfg_threads) -> tuple[int, int]:
    seed = args.seed if args.seed is not None else (cfg_seed if cfg_seed is not None else 0)
    if args.threads is not None:
        threads = args.threads
    elif cfg_threads is not None:
        threads = cfg_threads
    else:
        threads = _env_threads() or 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return seed, threads


def _emit(report, out_dir: str | None) -> None:
    sys.stdout.write(report.to_text())
    if out_dir:
        report.write(out_dir)


def _run_subcommand(args) -> int:
    section = SUBCOMMANDS[args.command]
    try:
        overrides, cfg_seed, cfg_threads = _gather_overrides(section, args)
        seed, threads = _resolve_run_params(args, cfg_seed, cfg_threads)
        effective = effective_config(section, overrides)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"kpzlab {args.command}: {exc}\n")
        return 2
    if args.print_config:
        payload = {"seed": seed, **effective}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    t0 = time.perf_counter()
    try:
        report = RUNNERS[section](seed=seed, threads=threads, **overrides)
    except Exception as exc:  # noqa: BLE001 - the boundary turns failures into status 1
        sys.stderr.write(f"kpzlab {args.command}: {type(exc).__name__}: {exc}\n")
        return 1
    report.wall_clock = time.perf_counter() - t0
    _emit(report, args.out)
    return 0 if report.passed() else 1


def _run_acceptance(args) -> int:
    try:
        seed, threads = _resolve_run_params(args, None, None)
    except ValueError as exc:
        sys.stderr.write(f"kpzlab acceptance-suite: {exc}\n")
        return 2
    if args.print_config:
        wanted = (experiments.FULL_CRITERIA if args.profile == "full"
                  else experiments.QUICK_CRITERIA)
        sections = []
        for c in wanted:
            sec = experiments.CRITERION_SECTIONS[c]
            if sec not in sections:
                sections.append(sec)
        payload = {"profile": args.profile, "seed": seed,
                   "sections": {sec: effective_config(sec) for sec in sections}}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0

    def progress(section: str) -> None:
        sys.stderr.write(f"[acceptance] {section} ...\n")
        sys.stderr.flush()

    t0 = time.perf_counter()
    try:
        report, verdicts = acceptance_suite(args.profile, seed=seed,
                                            threads=threads, progress=progress)
    except Exception as exc:  # noqa: BLE001 - the boundary turns failures into status 1
        sys.stderr.write(f"kpzlab acceptance-suite: {type(exc).__name__}: {exc}\n")
        return 1
    report.wall_clock = time.perf_counter() - t0
    for criterion, ok in verdicts.items():
        sys.stdout.write(f"{criterion} {'PASS' if ok else 'FAIL'}\n")
    overall = all(verdicts.values())
    sys.stdout.write(f"overall {'PASS' if overall else 'FAIL'} "
                     f"({sum(verdicts.values())}/{len(verdicts)} criteria, "
                     f"{report.wall_clock:.1f}s)\n")
    if args.out:
        report.write(args.out)
    return 0 if overall else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpzlab",
        description="Monte Carlo laboratory for last passage percolation "
                    "over Brownian noise.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default KPZLAB_THREADS or 1)")
    common.add_argument("--out", default=None, metavar="DIR",
                        help="write report.json and CSV tables here")
    common.add_argument("--print-config", action="store_true",
                        help="show the effective configuration and exit")

    tunable = argparse.ArgumentParser(add_help=False, parents=[common])
    tunable.add_argument("--config", default=None, metavar="FILE",
                         help="flat KEY=VALUE overrides, one per line")
    tunable.add_argument("--set", action="append", metavar="KEY=VALUE",
                         help="single override; beats --config")

    briefs = {
        "field": "sample a noise environment and describe it",
        "weight": "unit-route weight statistics against the spectral oracle",
        "polymer": "departure-point shear law of the tilted route",
        "profile": "routed weight profile: decomposition and argmax checks",
        "twin-peaks": "near-touch frequencies of the routed profile",
        "brownianity": "local increment law of the drift-adjusted profile",
        "deviation": "early-height transversal deviation frequency",
        "cliffs": "cliff census of the corner geodesic",
        "steadiness": "horizontal conservation and steady-segment census",
        "slender": "tube-constrained route shortfall across widths",
        "oracle-gue": "corner energies against the spectral ensemble",
        "oracle-brownian": "conditioned-bridge oracle self-checks",
        "exponents": "growth exponents over dyadic durations",
    }
    for name, section in SUBCOMMANDS.items():
        sp = sub.add_parser(name, parents=[tunable], help=briefs[name],
                            description=f"{briefs[name]} (driver: {section})")
        sp.set_defaults(func=_run_subcommand)

    accept = sub.add_parser(
        "acceptance-suite", parents=[common],
        help="run the acceptance criteria and print one verdict per line")
    accept.add_argument("--profile", choices=("full", "quick"), default="full",
                        help="quick runs A1-A5 only")
    accept.set_defaults(func=_run_acceptance)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

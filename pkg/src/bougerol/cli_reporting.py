"""Command-line entry point: run registered verifications, write JSON
reports, export raw samples, and re-render stored reports.

Seed precedence is environment variable BOUGEROL_MASTER_SEED, then config
file, then --seed flag. Reports are deterministic for a given (config,
seed) up to the timestamp and runtime fields, independent of worker count:
worker threads only decide which tests run concurrently, never how any
test draws its randomness.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from bougerol import verifications as vf

__all__ = [
    "RunConfig",
    "parse_cli",
    "run_suite",
    "write_report",
    "render_summary",
    "main",
]

DEFAULT_MASTER_SEED = 7
SEED_ENV_VAR = "BOUGEROL_MASTER_SEED"
_VERSION = "0.1.0"

_CONFIG_KEYS = {
    "master_seed", "tests", "n", "dt", "alpha", "workers", "out",
    "dump_samples", "negative_control", "overrides",
}


@dataclass
class RunConfig:
    """Resolved settings for one suite run.

    n, dt, and alpha are global overrides applied to every selected test
    when set; `overrides` maps a test name to finer-grained parameter
    overrides that win over the global ones. The replicate chunk size is a
    fixed module constant of the verification layer, so reports never
    depend on the worker count."""

    master_seed: int = DEFAULT_MASTER_SEED
    tests: list = field(default_factory=vf.registry_names)
    n: int = None
    dt: float = None
    alpha: float = None
    workers: int = 1
    out: str = "bougerol_report.json"
    dump_samples: str = None
    negative_control: bool = False
    overrides: dict = field(default_factory=dict)


class UsageError(ValueError):
    pass


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise UsageError(
            f"unknown config keys {sorted(unknown)}; known: {sorted(_CONFIG_KEYS)}"
        )
    return raw


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bougerol-verify",
        description="Monte-Carlo verification suite for hyperbolic "
        "Brownian identities in law",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="enumerate registered tests with anchors")
    run = sub.add_parser("verify", help="run one registered test or all")
    run.add_argument("target", help="registered test name, or 'all'")
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--n", type=int, default=None, help="replicate count override")
    run.add_argument("--dt", type=float, default=None, help="time-step override")
    run.add_argument("--alpha", type=float, default=None, help="KS level override")
    run.add_argument("--out", default=None, help="JSON report path")
    run.add_argument(
        "--dump-samples", default=None, metavar="DIR",
        help="write one CSV of raw sample columns per test",
    )
    run.add_argument("--config", default=None, help="JSON config file")
    run.add_argument("--workers", type=int, default=None, help="concurrent tests")
    run.add_argument(
        "--negative-control", action="store_true",
        help="run the perturbed variants that must reject",
    )
    rep = sub.add_parser("report", help="re-render a stored JSON report")
    rep.add_argument("path", help="report file to render")
    return parser


def parse_cli(argv):
    """Parse arguments into (command, payload): payload is a RunConfig for
    'verify', None for 'list', and the report path for 'report'.

    Raises UsageError for unknown tests or malformed values; argparse
    itself exits with code 2 on malformed flags.
    """
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        return "list", None
    if args.command == "report":
        return "report", args.path

    config = RunConfig()
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            config.master_seed = int(env_seed)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}")
    if args.config is not None:
        for key, val in _load_config_file(args.config).items():
            setattr(config, key, val)
    for key in ("n", "dt", "alpha", "workers", "out", "dump_samples"):
        val = getattr(args, key.replace("-", "_"))
        if val is not None:
            setattr(config, key, val)
    if args.seed is not None:
        config.master_seed = args.seed
    if args.negative_control:
        config.negative_control = True

    known = vf.registry_names()
    if args.target != "all":
        if args.target not in known:
            raise UsageError(
                f"unknown test {args.target!r}; known: {', '.join(known)}"
            )
        config.tests = [args.target]
    else:
        config.tests = [t for t in known if t in config.tests] or known
    bad = [t for t in config.tests if t not in known]
    if bad:
        raise UsageError(f"unknown tests in config: {bad}")
    if config.workers < 1:
        raise UsageError("workers must be at least 1")
    for name, ov in config.overrides.items():
        if name not in known:
            raise UsageError(f"override for unknown test {name!r}")
        if not isinstance(ov, dict):
            raise UsageError(f"override for {name!r} must be an object")
    return "verify", config


def _test_overrides(config: RunConfig, name: str) -> dict:
    ov = {}
    for key in ("n", "dt", "alpha"):
        val = getattr(config, key)
        if val is not None:
            ov[key] = val
    ov.update(config.overrides.get(name, {}))
    return ov


def write_report(reports, path, master_seed, suite_verdict) -> None:
    """Persist the suite as one JSON document with stable key order.

    Floats serialize through repr, which is exact round-trip decimal, so
    no precision is lost."""
    doc = {
        "version": _VERSION,
        "master_seed": master_seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "tests": [r.to_dict() for r in reports],
        "suite_verdict": suite_verdict,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _dump_samples(report, dirpath: str, suffix: str = "") -> None:
    cols = report.samples or {}
    if not cols:
        return
    os.makedirs(dirpath, exist_ok=True)
    names = list(cols)
    length = max(len(cols[k]) for k in names)
    path = os.path.join(dirpath, f"{report.test_name}{suffix}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(length):
            writer.writerow(
                [repr(float(cols[k][i])) if i < len(cols[k]) else ""
                 for k in names]
            )


def render_summary(doc: dict) -> str:
    """One line per test plus the suite verdict, built purely from the
    report document so the 'report' command reproduces it exactly."""
    lines = []
    for t in doc["tests"]:
        n_pass = sum(1 for v in t["verdicts"] if v["passed"])
        status = "PASS" if t["passed"] else "FAIL"
        lines.append(
            f"{status}  {t['test_name']}  [{t['anchor']}]  "
            f"{n_pass}/{len(t['verdicts'])} checks"
        )
    sv = doc["suite_verdict"]
    lines.append(
        f"suite: {sv['verdict']} (seed {doc['master_seed']}, "
        f"version {doc['version']})"
    )
    return "\n".join(lines)


def run_suite(config: RunConfig) -> int:
    """Run the selected tests under the suite rule and write the report.

    At most one first-pass statistical failure earns a rerun on a fresh
    derived seed; a clean rerun keeps the suite green, anything more is
    red. Negative-control runs skip the rerun rule: every control is
    expected to reject, so the exit code is 1 whenever any test fails."""
    names = list(config.tests)

    def run_one(name, rerun=False):
        return vf.run_registered(
            name,
            config.master_seed,
            overrides=_test_overrides(config, name),
            negative_control=config.negative_control,
            rerun=rerun,
        )

    if config.workers == 1:
        reports = [run_one(name) for name in names]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(run_one, names))

    failures = [n for n, r in zip(names, reports) if not r.passed()]
    suite_verdict = {
        "verdict": "green" if not failures else "red",
        "first_pass_failures": failures,
        "rerun": None,
    }
    if not config.negative_control and len(failures) == 1:
        rerun_report = run_one(failures[0], rerun=True)
        reports.append(rerun_report)
        suite_verdict["rerun"] = {
            "test": failures[0],
            "passed": rerun_report.passed(),
        }
        if rerun_report.passed():
            suite_verdict["verdict"] = "green"

    try:
        write_report(reports, config.out, config.master_seed, suite_verdict)
        if config.dump_samples:
            seen = set()
            for r in reports:
                suffix = "-rerun" if r.test_name in seen else ""
                seen.add(r.test_name)
                _dump_samples(r, config.dump_samples, suffix)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3

    doc = {
        "version": _VERSION,
        "master_seed": config.master_seed,
        "tests": [r.to_dict() for r in reports],
        "suite_verdict": suite_verdict,
    }
    print(render_summary(doc))
    return 0 if suite_verdict["verdict"] == "green" else 1


def _render_stored(path: str) -> int:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    print(render_summary(doc))
    return 0


def main(argv=None) -> int:
    try:
        command, payload = parse_cli(
            sys.argv[1:] if argv is None else argv
        )
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    if command == "list":
        for entry in vf.REGISTRY:
            print(f"{entry.name:28s} {entry.anchor}")
        return 0
    if command == "report":
        return _render_stored(payload)
    return run_suite(payload)


if __name__ == "__main__":
    sys.exit(main())

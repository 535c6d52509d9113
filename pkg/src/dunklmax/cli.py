"""Command-line entry point: ``dunklmax describe | run | report``.

Exit status: 0 when every hard check passed, 1 on usage or configuration
errors, 2 when at least one numerical check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from typing import List, Optional, Sequence

import yaml

from .suites import SUITES, STATEMENTS, Check, ConfigError, RunConfig, SuiteResult, run_suites

log = logging.getLogger("dunklmax")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
CHECK_COLUMNS = ["suite", "check", "statement", "params", "value", "bound", "pass"]
CONSTANT_COLUMNS = ["suite", "name", "params", "grid_size", "radius_count", "value"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML file with RunConfig fields; flags override it")
    p.add_argument("--kappa", type=float, nargs="+", help="multiplicities (one value is broadcast over dim)")
    p.add_argument("--dim", type=int)
    p.add_argument("--grid-size", type=int, dest="grid_size", help="nodes per axis")
    p.add_argument("--half-width", type=float, dest="half_width", help="domain half-width L")
    p.add_argument("--quad-order", type=int, dest="quad_order", help="Jacobi rule order for product-formula checks")
    p.add_argument("--radius-count", type=int, dest="radius_count")
    p.add_argument("--r-min", type=float, dest="r_min")
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--mollify-t", type=float, dest="mollify_t", help="heat mollification of ball indicators")
    p.add_argument("--suite", action="append", dest="suites", help=f"repeatable; one of {', '.join(SUITES)}")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="cap on worker threads for parameter sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dunklmax", description="Numerical verification suites for Dunkl maximal operators.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    d = sub.add_parser("describe", help="print the resolved configuration and planned suites")
    _add_config_args(d)
    r = sub.add_parser("run", help="run the selected suites and write the report files")
    _add_config_args(r)
    rep = sub.add_parser("report", help="re-render the summary of a previous run")
    rep.add_argument("directory")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a mapping")
        data.update(loaded)
    for name in RunConfig.field_names():
        v = getattr(args, name, None)
        if v is not None:
            data[name] = v
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def describe(cfg: RunConfig) -> str:
    lines = ["resolved configuration:"]
    lines += ["  " + ln for ln in yaml.safe_dump(cfg.to_dict(), sort_keys=True).splitlines()]
    lines.append(f"suites ({len(cfg.suites)}):")
    for s in cfg.suites:
        lines.append(f"  {s}: {STATEMENTS[s]}")
    return "\n".join(lines) + "\n"


def _num(v: float) -> str:
    return f"{v:.10e}"


def checks_csv(results: Sequence[SuiteResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHECK_COLUMNS)
    for res in results:
        for c in res.checks:
            w.writerow([c.suite, c.name, c.statement, c.params, _num(c.value), _num(c.bound), "pass" if c.passed else "FAIL"])
    return buf.getvalue()


def constants_csv(results: Sequence[SuiteResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONSTANT_COLUMNS)
    for res in results:
        for c in res.constants:
            w.writerow([c.suite, c.name, c.params, c.grid_size, c.radius_count, _num(c.value)])
    return buf.getvalue()


def read_checks(path: str) -> List[Check]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(CHECK_COLUMNS) - set(rows[0]):
        raise ConfigError(f"{path} is not a checks.csv file")
    return [
        Check(r["suite"], r["check"], r["params"], float(r["value"]), float(r["bound"]), r["pass"] == "pass", r["statement"])
        for r in rows
    ]


def summary_text(checks: Sequence[Check], header: str = "") -> str:
    lines = [header.rstrip()] if header else []
    suites = []
    for c in checks:
        if c.suite not in suites:
            suites.append(c.suite)
    for s in suites:
        mine = [c for c in checks if c.suite == s]
        ok = all(c.passed for c in mine)
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {s}: {sum(c.passed for c in mine)}/{len(mine)} checks")
        for c in mine:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"    {mark} {c.name} [{c.params}] value={_num(c.value)} bound={_num(c.bound)}")
    overall = all(c.passed for c in checks)
    lines.append(f"overall: {'PASS' if overall else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_reports(cfg: RunConfig, results: Sequence[SuiteResult]) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    checks = [c for r in results for c in r.checks]
    files = {
        "checks.csv": checks_csv(results),
        "constants.csv": constants_csv(results),
        "config.yaml": yaml.safe_dump(cfg.to_dict(), sort_keys=True),
        "summary.txt": summary_text(checks, describe(cfg)),
    }
    for name, text in files.items():
        with open(os.path.join(cfg.output_dir, name), "w") as fh:
            fh.write(text)
    return files["summary.txt"]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        if args.command is None:
            raise UsageError("a subcommand is required: describe, run or report")
        if args.command == "report":
            path = os.path.join(args.directory, "checks.csv")
            if not os.path.exists(path):
                raise ConfigError(f"no checks.csv in {args.directory}")
            checks = read_checks(path)
            sys.stdout.write(summary_text(checks))
            return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
        cfg = load_config(args)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    if args.command == "describe":
        sys.stdout.write(describe(cfg))
        return EXIT_OK
    log.info("running suites: %s", ", ".join(cfg.suites))
    results = run_suites(cfg)
    sys.stdout.write(write_reports(cfg, results))
    failed = [c for r in results for c in r.checks if not c.passed]
    for c in failed:
        sys.stderr.write(f"failed: {c.suite}/{c.name} [{c.params}] value={_num(c.value)} bound={_num(c.bound)}\n")
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

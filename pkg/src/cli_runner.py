"""
Command-line front end: provision a world, run scenario files, run the built-in
attack suite, and dump wire messages. Exit codes are 0 on success, 1 on a failed
assertion, violated claim or I/O error, and 2 on an unusable scenario or config.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

from logging_config import enable_console, simnet_logger
from src.crypto_suite import SuiteManager
from src.errors import ScenarioError, ScenarioParseError
from src.settings import Settings
from src.simnet import load_scenario, provision_default, run_attack_suite, run_scenario
from src.wire_codec import annotate

EXIT_OK, EXIT_FAILED, EXIT_UNUSABLE = 0, 1, 2


@dataclass(frozen=True)
class CliConfig:
    command: str
    scenario_path: Optional[str] = None
    seed: Optional[int] = None
    output_path: Optional[str] = None
    verbosity: int = 0
    suite: Optional[str] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        return cls(
            command=args.command,
            scenario_path=getattr(args, "scenario", None),
            seed=args.seed,
            output_path=args.out or os.environ.get("PVKIT_OUT") or None,
            verbosity=args.verbose,
            suite=getattr(args, "suite", None),
        )


def _emit(text: str, output_path: Optional[str]) -> None:
    if output_path is None:
        print(text)
        return
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text if text.endswith("\n") else text + "\n")


# === Commands ===
def cmd_provision(config: CliConfig, settings: Settings) -> int:
    out_dir = config.output_path or "world"
    try:
        written = provision_default(settings, config.seed).save(out_dir)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: cannot write {out_dir}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for path in written:
        print(path)
    return EXIT_OK


def cmd_run(config: CliConfig, settings: Settings) -> int:
    if config.scenario_path is None:
        print("error: run needs --scenario PATH", file=sys.stderr)
        return EXIT_UNUSABLE
    try:
        scenario = load_scenario(config.scenario_path)
        result = run_scenario(scenario, settings, config.seed)
    except ScenarioParseError as exc:
        print(f"error: {config.scenario_path}: {exc}", file=sys.stderr)
        return EXIT_UNUSABLE
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNUSABLE
    except OSError as exc:
        print(f"error: cannot read {config.scenario_path}: {exc}", file=sys.stderr)
        return EXIT_UNUSABLE

    try:
        _emit(result.trace.to_text(), config.output_path)
    except OSError as exc:
        print(f"error: cannot write trace: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for failure in result.failures:
        print(f"FAIL {failure}", file=sys.stderr)
    status = "passed" if result.passed else "failed"
    print(f"{scenario.source}: {result.checked} expectation(s) checked, {status}", file=sys.stderr)
    simnet_logger.info(f"scenario {scenario.source} {status}")
    return EXIT_OK if result.passed else EXIT_FAILED


def cmd_attack_suite(config: CliConfig, settings: Settings) -> int:
    suite = config.suite or settings.suite
    if suite not in SuiteManager.available():
        print(f"error: unknown crypto suite {suite!r}", file=sys.stderr)
        return EXIT_UNUSABLE
    seed = settings.seed if config.seed is None else config.seed
    report = run_attack_suite(suite, seed, settings)
    try:
        _emit(report.to_text(), config.output_path)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK if report.all_upheld else EXIT_FAILED


def cmd_dump(config: CliConfig, settings: Settings) -> int:
    if config.scenario_path is None:
        print("error: dump needs a message file", file=sys.stderr)
        return EXIT_UNUSABLE
    try:
        with open(config.scenario_path, "rb") as f:
            data = f.read()
        _emit(annotate(data), config.output_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


HANDLERS: Dict[str, Callable[[CliConfig, Settings], int]] = {
    "provision": cmd_provision,
    "run": cmd_run,
    "attack-suite": cmd_attack_suite,
    "dump": cmd_dump,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="DRBG seed (config value, else 0)")
    common.add_argument("--out", default=None, help="output path (falls back to $PVKIT_OUT)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr; repeat for debug")

    parser = argparse.ArgumentParser(prog="pvkit", description="Passport/Visa roaming authentication toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("provision", parents=[common], help="write keys, certificates and a smart card")
    run = sub.add_parser("run", parents=[common], help="run a scenario file")
    run.add_argument("--scenario", required=True, metavar="PATH")
    attack = sub.add_parser("attack-suite", parents=[common], help="run the four adversary families")
    attack.add_argument("--suite", default=None, help="crypto suite to run under (e.g. unauthenticated)")
    dump = sub.add_parser("dump", parents=[common], help="annotated hex dump of a wire message")
    dump.add_argument("scenario", metavar="FILE")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = CliConfig.from_args(args)
    enable_console(config.verbosity)
    try:
        settings = Settings.load()
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_UNUSABLE
    if config.seed is not None:
        settings = replace(settings, seed=config.seed)
    simnet_logger.debug(f"settings: {settings.describe()}")
    return HANDLERS[config.command](config, settings)

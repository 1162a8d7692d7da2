"""
WaveSheet command-line front end

Usage:
    python app.py run --config data/standard.cfg --out runs/standard
    python app.py check --config data/standard.cfg
    python app.py selftest [suite]
    python app.py resume runs/standard/checkpoint_00000100.txt
    python app.py --selftest green          # flag forms of the subcommands
    python app.py --resume PATH
"""

from typing import Any, Dict, List, Optional
import argparse
import json
import logging
import sys

from dotenv import load_dotenv

from evaluation.acceptance_suite import AcceptanceSuite
from simulation_pipeline import SimulationPipeline

load_dotenv()

logger = logging.getLogger("wavesheet.app")

EXIT_CODES = {"ok": 0, "other": 1, "config": 2, "gate": 3, "solver_failure": 4}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavesheet",
        description="Periodic gravity-capillary water waves over a bottom and obstacles",
    )
    parser.add_argument("command", nargs="?", choices=["run", "check", "selftest", "resume"], default=None)
    parser.add_argument("target", nargs="?", default=None,
                        help="suite name for selftest, checkpoint path for resume")
    parser.add_argument("--config", help="configuration file (sectioned key = value)")
    parser.add_argument("--out", help="output directory (overrides WAVESHEET_OUTPUT_DIR and [output] directory)")
    parser.add_argument("--mode", choices=["full", "model"], help="full Fredholm solve or model equations")
    parser.add_argument("--damping", choices=["on", "off"], help="switch the damping window on or off")
    parser.add_argument("--selftest", nargs="?", const="", default=None, metavar="SUITE",
                        help="run the self-test suites (all when SUITE is omitted)")
    parser.add_argument("--resume", metavar="PATH", help="continue from a checkpoint file")
    parser.add_argument("--n", type=int, default=None, help="grid size for the N-dependent self-tests")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    overrides: Dict[str, Dict[str, Any]] = {}
    if args.mode:
        overrides.setdefault("numerics", {})["solver_mode"] = args.mode
    if args.damping:
        overrides.setdefault("damping", {})["enabled"] = args.damping == "on"
    return overrides


def _report_failure(kind: str, stage: str, detail: Any) -> int:
    module = None
    if isinstance(detail, dict):
        # integration failures nest the error record one level down
        module = detail.get("module") or (detail.get("detail") or {}).get("module")
    print(json.dumps({"status": "failed", "reason": kind, "stage": stage, "module": module,
                      "detail": detail}, default=str))
    return EXIT_CODES.get(kind, 1)


def run_selftests(suite: Optional[str], n: Optional[int]) -> int:
    evaluator = AcceptanceSuite(n=n)
    try:
        results = evaluator.run(suite or None)
    except KeyError as e:
        print(f"❌ {e.args[0]}")
        print(f"Available suites: {', '.join(evaluator.suites)}")
        return EXIT_CODES["config"]

    for result in results:
        mark = "✅" if result["passed"] else "❌"
        print(f"{mark} {result['name']:<15} {result['elapsed']:7.2f}s  {json.dumps(result['metrics'], default=str)}")
    passed = sum(r["passed"] for r in results)
    print(f"\n📊 Passed: {passed}/{len(results)}")
    return EXIT_CODES["ok"] if passed == len(results) else EXIT_CODES["other"]


def run_pipeline(args: argparse.Namespace, check_only: bool = False, resume_path: Optional[str] = None) -> int:
    state = SimulationPipeline().process(
        config_path=args.config,
        overrides=_overrides(args),
        resume_path=resume_path,
        output_dir=args.out,
        check_only=check_only,
    )
    failure = state.get("failure")
    if failure:
        return _report_failure(failure["kind"], failure["stage"], failure["detail"])

    if check_only:
        print(json.dumps({"status": "ok", "check": state["stage_status"]}))
    else:
        trajectory = state["trajectory"]
        print(json.dumps({
            "status": "ok",
            "records": len(trajectory.records),
            "final_time": trajectory.records[-1].time,
            "outputs": state["outputs"],
        }))
    return EXIT_CODES["ok"]


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, and return the process exit status"""
    args = build_parser().parse_args(argv)
    command = args.command
    if args.selftest is not None:
        command, args.target = "selftest", args.selftest or args.target
    elif args.resume:
        command, args.target = "resume", args.resume
    command = command or "run"

    try:
        if command == "selftest":
            return run_selftests(args.target, args.n)
        if command == "check":
            return run_pipeline(args, check_only=True)
        if command == "resume":
            if not args.target:
                return _report_failure("config", "Configuration", "resume needs a checkpoint path")
            return run_pipeline(args, resume_path=args.target)
        return run_pipeline(args)
    except Exception as e:
        logger.exception("unexpected failure")
        return _report_failure("other", command, {"type": type(e).__name__, "message": str(e)})


if __name__ == "__main__":
    sys.exit(main())

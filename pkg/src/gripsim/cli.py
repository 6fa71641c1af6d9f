"""Command-line surface.

    gripsim run --scenario FILE --out TRACE.csv [--figure [PATH]]
    gripsim emg synth [--profile FILE] --out-dir DIR [--figure [PATH]]
    gripsim emg classify --traces DIR --baseline DIR [--figure [PATH]]
    gripsim serve [--host H] [--port N] [--event-log-dir DIR]

Exit codes: 0 success, 2 validation error, 3 runtime simulation fault.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

from . import __version__
from .gateway import DEFAULT_PORT, PORT_ENV_VAR, serve
from .harness import SimulationFault, run_scenario, write_trace
from .hbridge import IndeterminateLogicLevel
from .plant import NonFiniteState
from .scenario import IoFailure, MalformedScenario, load_scenario, _parse_emg_profile
from . import sensors

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_FIGURE_SENTINEL = "__default__"


def _figure_path(value: str | None, default: Path) -> Path | None:
    if value is None:
        return None
    if value == _FIGURE_SENTINEL:
        return default
    return Path(value)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    out_path = Path(args.out)
    figure = _figure_path(args.figure, out_path.with_suffix(".png"))
    if figure is None:
        n = write_trace(run_scenario(scenario), out_path)
    else:
        records = list(run_scenario(scenario))
        n = write_trace(records, out_path)
        from . import report

        report.render_trace_figure(
            records, figure, title=scenario.name, tick_period_us=scenario.tick_period_us
        )
        print(f"figure written to {figure}")
    print(f"{n} ticks written to {out_path}")
    return EXIT_OK


def _load_profile(path: str | None) -> sensors.EmgProfile:
    if path is None:
        return sensors.EmgProfile()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read profile file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedScenario("<root>", f"invalid JSON: {exc}") from exc
    return _parse_emg_profile(data, path="")


def _cmd_emg_synth(args: argparse.Namespace) -> int:
    profile = _load_profile(args.profile)
    out_dir = Path(args.out_dir)
    traces = sensors.synthesize_profile_set(profile)
    for condition, by_pos in traces.items():
        cond_dir = out_dir / condition.value.lower()
        cond_dir.mkdir(parents=True, exist_ok=True)
        for pos, trace in by_pos.items():
            sensors.write_emg_trace(cond_dir / f"{pos.value}.csv", trace)
    print(f"8 traces written under {out_dir}")
    figure = _figure_path(args.figure, out_dir / "emg_traces.png")
    if figure is not None:
        from . import report

        report.render_emg_figure(traces, figure)
        print(f"figure written to {figure}")
    return EXIT_OK


def _cmd_emg_classify(args: argparse.Namespace) -> int:
    if args.tolerance_ratio < 0 or not 0 < args.drop_ratio:
        raise MalformedScenario("drop_ratio", "ratios must be positive")
    try:
        traces = sensors.load_trace_dir(args.traces)
        baseline = sensors.load_trace_dir(args.baseline)
    except (OSError, ValueError) as exc:
        raise IoFailure(str(exc)) from exc
    features = {pos: sensors.trace_features(tr) for pos, tr in traces.items()}
    base_features = {pos: sensors.trace_features(tr) for pos, tr in baseline.items()}
    decision = sensors.classify_stress(
        features, base_features, args.drop_ratio, args.tolerance_ratio
    )
    ratios = {}
    print("position  rms_uv     baseline_uv  ratio")
    for pos in sensors.Position:
        rms = features[pos].rms_uv
        base = base_features[pos].rms_uv
        ratio = rms / base if base else float("nan")
        ratios[pos] = ratio
        print(f"{pos.value:<9} {rms:<10.3f} {base:<12.3f} {ratio:.4f}")
    print(decision.value)
    figure = _figure_path(args.figure, Path(args.traces) / "classification.png")
    if figure is not None:
        from . import report

        report.render_classification_figure(
            ratios, args.drop_ratio, args.tolerance_ratio, decision, figure
        )
        print(f"figure written to {figure}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    try:
        asyncio.run(serve(args.host, args.port, event_log_dir=args.event_log_dir))
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gripsim",
        description="Firmware-in-the-loop simulator for a strain-controlled prosthetic gripper",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file and write a trace CSV")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument("--out", required=True, help="output trace CSV path")
    run_p.add_argument(
        "--figure", nargs="?", const=_FIGURE_SENTINEL, default=None, metavar="PATH",
        help="also render a trace figure (default: next to the CSV)",
    )
    run_p.set_defaults(func=_cmd_run)

    emg_p = sub.add_parser("emg", help="EMG analysis tools")
    emg_sub = emg_p.add_subparsers(dest="emg_command", required=True)

    synth_p = emg_sub.add_parser("synth", help="synthesize the profile's trace set")
    synth_p.add_argument("--profile", default=None, help="profile JSON (default: reference profile)")
    synth_p.add_argument("--out-dir", required=True, help="directory for relaxed/ and stressed/ traces")
    synth_p.add_argument(
        "--figure", nargs="?", const=_FIGURE_SENTINEL, default=None, metavar="PATH",
        help="also render the trace grid figure",
    )
    synth_p.set_defaults(func=_cmd_emg_synth)

    cls_p = emg_sub.add_parser("classify", help="classify a trace set against a baseline")
    cls_p.add_argument("--traces", required=True, help="directory with S1..S4 traces to classify")
    cls_p.add_argument("--baseline", required=True, help="directory with S1..S4 baseline traces")
    cls_p.add_argument("--drop-ratio", type=float, default=sensors.DEFAULT_DROP_RATIO)
    cls_p.add_argument("--tolerance-ratio", type=float, default=sensors.DEFAULT_TOLERANCE_RATIO)
    cls_p.add_argument(
        "--figure", nargs="?", const=_FIGURE_SENTINEL, default=None, metavar="PATH",
        help="also render the RMS-ratio figure",
    )
    cls_p.set_defaults(func=_cmd_emg_classify)

    serve_p = sub.add_parser("serve", help="run the live operator gateway")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument(
        "--port", type=int,
        default=int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT)),
        help=f"TCP port (default {DEFAULT_PORT}, or ${PORT_ENV_VAR})",
    )
    serve_p.add_argument("--event-log-dir", default=None, help="write per-session event logs here")
    serve_p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedScenario as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (
        SimulationFault,
        NonFiniteState,
        IndeterminateLogicLevel,
        IoFailure,
        sensors.DegenerateBaseline,
        sensors.InvalidThresholds,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface tying the modules together.

Every command prints one machine-readable summary JSON object on stdout;
files land under --out-dir. Exit codes: 0 success (for monitor: verdict
accepted/definitely-true), 1 rejected/false or domain error, 2 unknown
verdict, 64 usage errors, 65 spec diagnostics, 66 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dsl, rural, traceio
from .errors import ScenarioError
from .formulas import Verdict3
from .logic import encode_logical, enumerate_scenarios, sample_abstract, binary_scenarios
from .logical import invert, realize, sample, Found
from .monitoring import Verdict, monitor_prefix, monitor_word_report

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is >= 64
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _fail(code: int, error: str, **extra) -> int:
    _emit({"error": error, **extra})
    return code


def _load_spec(path: str) -> dsl.ResolvedSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(str(exc)) from exc
    result = dsl.parse(text)
    if not result.ok:
        raise dsl.ResolutionError(result.diagnostics)
    return dsl.resolve(result.document)


def _cmd_validate(args) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(EX_NOINPUT, "io", detail=str(exc))
    result = dsl.parse(text)
    if not result.ok:
        _emit(
            {
                "ok": False,
                "diagnostics": [d.render() for d in result.diagnostics],
            }
        )
        return EX_DATAERR
    try:
        spec = dsl.resolve(result.document)
    except dsl.ResolutionError as exc:
        _emit({"ok": False, "diagnostics": [d.render() for d in exc.diagnostics]})
        return EX_DATAERR
    _emit(
        {
            "ok": True,
            "schemas": sorted(spec.schemas),
            "logicals": sorted(spec.logicals),
            "abstracts": sorted(spec.abstracts),
            "fixtures": sorted(spec.fixtures),
        }
    )
    return 0


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_sample_logical(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.logicals:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.logicals[args.scenario]
    dist = spec.distributions.get(args.scenario)
    out = _out_dir(args)
    draws = sample(scenario, dist, args.count, args.seed)
    manifest = {"seed": args.seed, "samples": []}
    axis_names = [a.name for a in scenario.space.axes]
    for i, (x, traj) in enumerate(draws):
        name = f"sample-{i:05d}.csv"
        traceio.write_trace(traj, out / name)
        manifest["samples"].append(
            {"x": dict(zip(axis_names, x)), "trace": name}
        )
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True) + "\n", encoding="utf-8"
    )
    _emit({"count": len(draws), "manifest": str(out / "manifest.json"), "seed": args.seed})
    return 0


def _cmd_sample_abstract(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.abstracts:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.abstracts[args.scenario]
    out = _out_dir(args)
    traces = sample_abstract(scenario, args.count, args.strategy, args.seed)
    names = []
    for i, traj in enumerate(traces):
        name = f"sample-{i:05d}.csv"
        traceio.write_trace(traj, out / name)
        names.append(name)
    (out / "manifest.json").write_text(
        json.dumps({"seed": args.seed, "strategy": args.strategy, "samples": names}, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    _emit({"count": len(traces), "seed": args.seed, "strategy": args.strategy})
    return 0


def _cmd_enumerate(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.abstracts:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.abstracts[args.scenario]
    out = _out_dir(args)
    leaves = enumerate_scenarios(scenario)
    names = []
    for i, traj in enumerate(leaves):
        name = f"scenario-{i:05d}.csv"
        traceio.write_trace(traj, out / name)
        names.append(name)
    (out / "index.json").write_text(
        json.dumps({"scenarios": names}, sort_keys=True) + "\n", encoding="utf-8"
    )
    _emit({"count": len(leaves), "index": str(out / "index.json")})
    return 0


def _first_false_step(trace, scenario):
    """Index of the first prefix whose three-valued verdict is FALSE."""
    from .monitoring import monitor_stream

    mon = monitor_stream(scenario)
    for i, scene in enumerate(trace.samples):
        if mon.step(scene) is Verdict3.FALSE:
            return i
    return None


def _cmd_monitor(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.abstracts:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.abstracts[args.scenario]
    try:
        trace = traceio.read_trace(args.trace, schema=scenario.instance.schema)
    except OSError as exc:
        return _fail(EX_NOINPUT, "io", detail=str(exc))
    full = scenario.instance.full_length()
    if len(trace.samples) == full:
        report = monitor_word_report(trace, scenario)
        violation = report.violation_index
        if report.verdict is not Verdict.ACCEPTED and violation is None:
            violation = _first_false_step(trace, scenario)
        _emit(
            {
                "verdict": report.verdict.value,
                "first_violation_time": None
                if violation is None
                else violation * scenario.instance.step,
                "reason": report.reason,
            }
        )
        return 0 if report.verdict is Verdict.ACCEPTED else 1
    verdict = monitor_prefix(trace, scenario)
    _emit({"verdict": verdict.value, "fed": len(trace.samples), "full_length": full})
    if verdict is Verdict3.TRUE:
        return 0
    if verdict is Verdict3.FALSE:
        return 1
    return 2


def _cmd_invert(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.logicals:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.logicals[args.scenario]
    try:
        trace = traceio.read_trace(args.trace)
    except OSError as exc:
        return _fail(EX_NOINPUT, "io", detail=str(exc))
    result = invert(scenario, trace, args.tol)
    axis_names = [a.name for a in scenario.space.axes]
    if isinstance(result, Found):
        _emit(
            {
                "found": True,
                "x": dict(zip(axis_names, result.x)),
                "residual": result.residual,
            }
        )
    else:
        _emit(
            {
                "found": False,
                "best_x": dict(zip(axis_names, result.best_x)),
                "best_residual": result.best_residual,
            }
        )
    return 0


def _cmd_encode_logical(args) -> int:
    spec = _load_spec(args.spec)
    if args.scenario not in spec.logicals:
        return _fail(1, "UnknownScenario", scenario=args.scenario)
    scenario = spec.logicals[args.scenario]
    instance = encode_logical(scenario)
    from .formulas import TrueFormula
    from .logic import AbstractScenario

    leaves = enumerate_scenarios(AbstractScenario(TrueFormula(), (), instance))
    import itertools

    xs = sorted(itertools.product(*(a.values for a in scenario.space.axes)))
    realized = sorted(realize(scenario, x).sort_key() for x in xs)
    match = realized == sorted(t.sort_key() for t in leaves)
    _emit({"match": match, "x_count": len(xs), "scenario_count": len(leaves)})
    return 0 if match else 1


def _cmd_demo_complexity(args) -> int:
    scenario = binary_scenarios(args.n)
    leaves = enumerate_scenarios(scenario)
    _emit({"n": args.n, "leaves": len(leaves)})
    return 0


def _cmd_count_rural(args) -> int:
    closed = rural.count_lower_bound(args.n, args.m)
    payload = {"n": args.n, "m": args.m, "closed_form": closed}
    if closed <= 1_000_000:
        payload["enumerated"] = len(rural.enumerate_choices(args.n, args.m))
    _emit(payload)
    return 0


def _cmd_synth_rural(args) -> int:
    cfg = rural.RuralConfig(n=args.n, m=args.m)
    grid = rural.suggested_grid(cfg)
    choices = rural.enumerate_choices(args.n, args.m)
    if args.limit is not None:
        choices = choices[: args.limit]
    out = _out_dir(args)
    scenario = rural.rural_formula(cfg, grid)
    from .monitoring import monitor_word

    names = []
    accepted = 0
    for i, choice in enumerate(choices):
        traj = rural.synthesize(choice, cfg, grid)
        name = f"choice-{i:05d}.csv"
        traceio.write_trace(traj, out / name)
        if monitor_word(traj, scenario) is Verdict.ACCEPTED:
            accepted += 1
        names.append(name)
    (out / "manifest.json").write_text(
        json.dumps({"n": args.n, "m": args.m, "traces": names}, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _emit({"n": args.n, "m": args.m, "synthesized": len(names), "accepted": accepted})
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="scenkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and resolve a spec file")
    p.add_argument("spec")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("sample-logical", help="push-forward sampling of a logical scenario")
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sample_logical)

    p = sub.add_parser("sample-abstract", help="sample concrete scenarios from an abstract one")
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument(
        "--strategy",
        choices=("uniform-leaf", "uniform-branch", "rejection"),
        required=True,
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sample_abstract)

    p = sub.add_parser("enumerate", help="enumerate an abstract scenario's set")
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("monitor", help="decide membership of a trace")
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(func=_cmd_monitor)

    p = sub.add_parser("invert", help="inverse-image analysis of a trace")
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--tol", type=float, required=True)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser(
        "encode-logical", help="encode a finite logical scenario and verify set equality"
    )
    p.add_argument("spec")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=_cmd_encode_logical)

    p = sub.add_parser("demo-spec-complexity", help="binary branching scenario counts")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_demo_complexity)

    p = sub.add_parser("count-rural", help="rural overtaking choice counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=_cmd_count_rural)

    p = sub.add_parser("synth-rural", help="synthesize rural overtaking trajectories")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=_cmd_synth_rural)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(EX_NOINPUT, "io", detail=str(exc))
    except dsl.ResolutionError as exc:
        _emit({"ok": False, "diagnostics": [d.render() for d in exc.diagnostics]})
        return EX_DATAERR
    except ScenarioError as exc:
        return _fail(1, type(exc).__name__, detail=str(exc))


if __name__ == "__main__":
    sys.exit(main())

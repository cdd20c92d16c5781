from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from causal_friendliness import __version__
from causal_friendliness.adapters import behavior_file, spec_file
from causal_friendliness.core import campaigns
from causal_friendliness.core.causal import EJPD_IMPLICATION, NRC_IMPLICATION, implication_ledger, lemma1_check
from causal_friendliness.core.config import settings
from causal_friendliness.core.errors import NumericalInvariantError, UsageError
from causal_friendliness.core.logging import configure_logging
from causal_friendliness.core.models import BehaviorTable, CampaignResult, RunReport
from causal_friendliness.core.polytope import (
    boxworld_construction,
    chsh,
    membership,
    signalling_check,
    tsirelson_search,
    white_noise_visibility,
)
from causal_friendliness.core.tensor import DensityMatrix, partial_trace
from causal_friendliness.core.wigner import (
    channel_correlator,
    correlators,
    lab_isometry,
    lab_map_f,
    nst_check,
    ots_check,
    record_from_forward,
    record_from_reverse,
    run_forward,
    run_reverse,
)
from causal_friendliness.storage.reports import dump_report, render_json, render_text, report_schema

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
DEFAULT_SPEC = "paper_optimal"
# APE first: it is the predicate the construction gives up
BOXWORLD_LEDGER = ("APE", "NRC", "ATOE", "EJPD", "AOE", EJPD_IMPLICATION, NRC_IMPLICATION)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _correlator_dict(behavior: BehaviorTable) -> Dict[str, float]:
    e = correlators(behavior)
    return {f"E{x}{y}": float(e[x, y]) for x in (0, 1) for y in (0, 1)}


def _tol(args: argparse.Namespace, fallback: Optional[float] = None) -> float:
    if args.tol is not None:
        return args.tol
    return fallback if fallback is not None else settings.tolerance


def _campaign_row(c: CampaignResult) -> Dict[str, Any]:
    return {"campaign": c.name, "samples": c.samples, "pass": c.passes, "fail": c.failures,
            "vacuous": c.vacuous, "max_deviation": c.max_deviation}


# ----------------------------- commands ---------------------------------

def cmd_simulate(args: argparse.Namespace) -> RunReport:
    spec = spec_file.load_spec(args.spec or DEFAULT_SPEC)
    config = spec.scenario()
    tol = _tol(args, spec.tolerance)

    forward = run_forward(config)
    reverse = run_reverse(config)
    shown = reverse if args.reverse else forward

    # the dilation circuit against sequential Lüders measurements
    oracle = np.array([[channel_correlator(n, m, config.input_state) for m in config.second_side()]
                       for n in config.first_side()])
    oracle_gap = float(np.abs(oracle - correlators(forward)).max())
    if oracle_gap > 1e-9:
        raise NumericalInvariantError(f"circuit and channel correlators disagree by {oracle_gap:.3e}")

    ots = ots_check(record_from_forward(forward), record_from_reverse(reverse))
    return RunReport(
        command="simulate",
        tool_version=__version__,
        config={
            "spec": spec.source,
            "input_state": spec.input_state,
            "direction": "reverse" if args.reverse else "forward",
            **{p: getattr(config, p).as_array().tolist() for p in spec_file.PARTIES},
            "tolerance": tol,
        },
        seed=args.seed if args.seed is not None else spec.seed,
        correlators=_correlator_dict(shown),
        chsh=chsh(shown),
        membership=membership(shown, tol),
        signalling=nst_check(config),
        assumptions=[ots],
        details={"oracle_max_deviation": oracle_gap},
    )


def cmd_membership(args: argparse.Namespace) -> RunReport:
    if not args.behavior:
        raise UsageError("membership needs --behavior PATH (or a bundled name: uniform, quantum_optimal, pr_box)")
    behavior = behavior_file.load_behavior(args.behavior)
    tol = _tol(args)
    return RunReport(
        command="membership",
        tool_version=__version__,
        config={"behavior": args.behavior, "tolerance": tol},
        correlators=_correlator_dict(behavior),
        chsh=chsh(behavior),
        membership=membership(behavior, tol),
        signalling=signalling_check(behavior),
        details={"white_noise_visibility": white_noise_visibility(behavior)},
    )


def cmd_lemmas(args: argparse.Namespace) -> RunReport:
    samples = settings.samples if args.samples is None else args.samples
    seed = settings.seed if args.seed is None else args.seed
    tol = _tol(args)

    results: List[CampaignResult] = campaigns.lemma_campaign(samples, seed, tol)
    results.append(campaigns.opem_campaign(samples, seed, tol))
    results.append(campaigns.cf_polytope_campaign(samples, seed, tol))
    results.append(campaigns.setting_leak_campaign(samples, seed, tol))

    fwd, rev = campaigns.nrc_without_ats_pair()
    witness = lemma1_check(fwd, rev, tol).model_copy(update={"name": "NRC without ATS"})

    counterexamples = [ce.model_dump(mode="json") for c in results for ce in c.counterexamples]
    return RunReport(
        command="lemmas",
        tool_version=__version__,
        config={"samples": samples, "tolerance": tol},
        seed=seed,
        assumptions=[witness],
        details={"campaigns": [_campaign_row(c) for c in results], "counterexamples": counterexamples},
    )


def cmd_boxworld(args: argparse.Namespace) -> RunReport:
    tol = _tol(args)
    model, behavior = boxworld_construction()
    bundle = model.to_bundle()
    ledger = implication_ledger(bundle, tol=tol)
    return RunReport(
        command="boxworld",
        tool_version=__version__,
        config={"tolerance": tol},
        correlators=_correlator_dict(behavior),
        chsh=chsh(behavior),
        membership=membership(behavior, tol),
        signalling=signalling_check(behavior),
        assumptions=[ledger[name] for name in BOXWORLD_LEDGER],
        details={
            "pcd": "all weight on (c,d) = (x,y)",
            "a_response": model.a_response.tolist(),
            "b_response": model.b_response.tolist(),
        },
    )


def cmd_sweep(args: argparse.Namespace) -> RunReport:
    grid = settings.grid if args.grid is None else args.grid
    refine = settings.refine if args.refine is None else args.refine
    if grid < 8:
        raise UsageError(f"--grid must be at least 8, got {grid}")
    if refine < 0:
        raise UsageError(f"--refine must be nonnegative, got {refine}")
    state = DensityMatrix.maximally_mixed()
    result = tsirelson_search(state, grid, refine, parameterization=args.parameterization)
    config = result.as_config(state)
    behavior = run_forward(config)
    charlie, alice = config.first_side()
    debbie, bob = config.second_side()
    return RunReport(
        command="sweep",
        tool_version=__version__,
        config={"grid": grid, "refine": refine, "parameterization": args.parameterization},
        seed=args.seed,
        correlators=_correlator_dict(behavior),
        chsh=result.best_s,
        details={
            "settings": [{"party": p, "x": v.x, "y": v.y, "z": v.z}
                         for p, v in zip(("charlie", "alice", "debbie", "bob"), result.settings)],
            "angles": list(result.angles),
            "first_side_overlap": abs(charlie.dot(alice)),
            "second_side_overlap": abs(debbie.dot(bob)),
            "gap_to_tsirelson": 2 * math.sqrt(2) - result.best_s,
            "steps": len(result.history) - 1,
        },
    )


def cmd_wigner_demo(args: argparse.Namespace) -> RunReport:
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    psi = lab_isometry() @ plus
    lab = lab_map_f(DensityMatrix.from_vector(plus))
    system = partial_trace(lab, (2, 2, 2), keep=0)
    gap = float(np.abs(system.matrix - DensityMatrix.maximally_mixed().matrix).max())

    labels = ["↑", "↓"]
    amplitudes = [
        {"basis": "|" + "".join(labels[(k >> s) & 1] for s in (2, 1, 0)) + "⟩", "re": float(a.real), "im": float(a.imag)}
        for k, a in enumerate(psi) if abs(a) > 0
    ]
    return RunReport(
        command="wigner-demo",
        tool_version=__version__,
        details={
            "lab_amplitudes": amplitudes,
            "reduced_system_state": [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in system.matrix],
            "distance_to_maximally_mixed": gap,
            "probabilistic_mixture": gap <= 1e-12,
        },
    )


COMMANDS = {
    "simulate": cmd_simulate,
    "membership": cmd_membership,
    "lemmas": cmd_lemmas,
    "boxworld": cmd_boxworld,
    "sweep": cmd_sweep,
    "wigner-demo": cmd_wigner_demo,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--output", metavar="PATH", help="also write the JSON report to PATH")
    common.add_argument("--tol", type=float, help="absolute tolerance (default CF_TOLERANCE)")
    common.add_argument("--seed", type=int, help="master seed (default CF_SEED)")

    parser = _Parser(prog="causal-friendliness", description="Timelike Wigner's Friend and Causal Friendliness toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="run the circuit for a spec file")
    p.add_argument("--spec", metavar="PATH", help=f"spec file or bundled name (default {DEFAULT_SPEC})")
    p.add_argument("--reverse", action="store_true", help="report the reversed-order experiment")

    p = sub.add_parser("membership", parents=[common], help="LP membership of a behavior JSON")
    p.add_argument("--behavior", metavar="PATH", help="behavior file or bundled name")

    p = sub.add_parser("lemmas", parents=[common], help="seeded property campaigns")
    p.add_argument("--samples", type=int, help="samples per campaign (default CF_SAMPLES)")

    sub.add_parser("boxworld", parents=[common], help="context-dependent model reaching S = 4")

    p = sub.add_parser("sweep", parents=[common], help="search for the maximal quantum S")
    p.add_argument("--grid", type=int, help="angles per party on the coarse grid (default CF_GRID)")
    p.add_argument("--refine", type=int, help="refinement sweeps (default CF_REFINE)")
    p.add_argument("--parameterization", choices=("plane", "sphere"), default="plane")

    sub.add_parser("wigner-demo", parents=[common], help="the friend's lab as one quantum system")
    sub.add_parser("schema", help="print the JSON Schema of --json reports")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "schema":
            sys.stdout.write(json.dumps(report_schema(), indent=2) + "\n")
            return EXIT_OK
        if getattr(args, "samples", None) is not None and args.samples < 0:
            raise UsageError(f"--samples must be nonnegative, got {args.samples}")
        if args.tol is not None and not args.tol > 0:
            raise UsageError(f"--tol must be positive, got {args.tol}")
        report = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalInvariantError as e:
        log.error("numerical invariant violated: %s", e)
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    sys.stdout.write(render_json(report) + "\n" if args.json else render_text(report))
    if args.output:
        dump_report(report, args.output)

    if args.command == "lemmas" and any(row["fail"] for row in report.details["campaigns"]):
        log.error("a campaign produced conclusion failures; see counterexamples")
        return EXIT_NUMERICAL
    return EXIT_OK


def main() -> None:
    configure_logging(getattr(logging, settings.log_level.upper(), logging.INFO), json_output=settings.log_json)
    raise SystemExit(run())


if __name__ == "__main__":
    main()

"""Command line front end: ``marcjscc info|check|bound|optimize|simulate``.

Exit codes: 0 success (whatever the verdicts), 1 internal error, 2 usage or
invalid setting, 3 pmf normalization error, 4 malformed scenario syntax,
5 unknown preset, 6 scenario schema error, 7 command does not apply to the
scenario, 8 search or simulation budget exceeded, 9 scenario file not found.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import distopt
from .codingsim import (
    DEFAULT_SEED,
    SimBudgetError,
    SimConfig,
    SimConfigError,
    run_thm2_sim,
    run_uncoded_cpm_somarc,
)
from .feasibility import Scheme, check, somarc_terms
from .infotheory import PmfError, VariableError, conditional_entropy, conditional_mutual_information
from .network import ChainError, InputChainIndependent, InputChainThm2, assemble_joint
from .report import Report, emit
from .scenario import (
    EXIT_BUDGET,
    EXIT_INTERNAL,
    EXIT_MISMATCH,
    EXIT_NORMALIZATION,
    EXIT_USAGE,
    ScenarioError,
    parse_scenario,
)

DEFAULT_SCENARIO = "somarc-eq3"
COMMANDS = ("info", "check", "bound", "optimize", "simulate")
DEFAULT_FAMILY = {
    distopt.Objective.MIN_MARGIN_THM1: "thm1",
    distopt.Objective.MIN_MARGIN_THM2: "thm2",
    distopt.Objective.SOMARC_BOUND: "product",
}
FAMILY_SCHEME = {"thm1": "thm1", "thm2": "thm2", "separation": "separation", "product": "thm1"}


class Mismatch(Exception):
    """The command cannot run on this scenario."""


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=DEFAULT_SCENARIO,
                        help="YAML scenario file or built-in preset name (default: somarc-eq3)")
    common.add_argument("--format", choices=("text", "structured", "csv"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--include-timing", action="store_true",
                        help="add wall-clock time to the report (breaks byte-identical reruns)")
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--restarts", type=int, default=6)
    search.add_argument("--iters", type=int, default=150)
    search.add_argument("--grid-step", type=float, default=None,
                        help="exhaustive grid with this step instead of local search")

    p = argparse.ArgumentParser(prog="marcjscc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="entropies and mutual informations of the scenario")
    c = sub.add_parser("check", parents=[common, search], help="evaluate sufficient conditions")
    c.add_argument("--scheme", action="append", choices=[s.value for s in Scheme if s is not Scheme.PROP1],
                   help="repeatable; defaults to the chain's own family")
    b = sub.add_parser("bound", parents=[common, search], help="sum-rate bound for a semi-orthogonal channel")
    b.add_argument("--optimize", action="store_true", help="maximize the bound over product inputs")
    o = sub.add_parser("optimize", parents=[common, search], help="search input chains")
    o.add_argument("--objective", choices=[x.value for x in distopt.Objective], default=None)
    o.add_argument("--family", choices=[f.value for f in distopt.Family], default=None)
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo simulation of the coding scheme")
    s.add_argument("--uncoded-cpm", action="store_true", help="uncoded X1=S1, X2=S2 transmission")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--blocks", type=int, default=None)
    s.add_argument("--rate1", type=float, default=None)
    s.add_argument("--rate2", type=float, default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--network", choices=("marc", "mabrc"), default=None)
    s.add_argument("--typicality", choices=("per-tuple", "strong"), default=None)
    s.add_argument("--trace", default=None, metavar="PATH", help="write the per-block decoding trace CSV here")
    return p


# ------------------------------------------------------------------ commands


def _scenario_model(sc) -> distopt.Scenario:
    if sc.channel is None:
        raise Mismatch("scenario has no channel")
    return distopt.Scenario(sc.source, sc.channel, sc.v_sizes, sc.name)


def _search(objective, family, sc, args) -> distopt.OptResult:
    model = _scenario_model(sc)
    if args.grid_step is not None:
        return distopt.grid_scan(objective, model, family, step=args.grid_step)
    return distopt.optimize(objective, model, family, restarts=args.restarts, iters=args.iters,
                            seed=args.seed, workers=args.workers)


def _chain(sc, args):
    if sc.chain is not None:
        return sc.chain
    if sc.chain_request is not None:
        req = sc.chain_request
        res = _search(req["objective"], req["family"], sc, args)
        return distopt.to_chain(res.best_chain, _scenario_model(sc))
    raise Mismatch("scenario has no input chain")


def _joint(sc, chain):
    if sc.channel is None:
        raise Mismatch("scenario has no channel")
    return assemble_joint(sc.source, chain, sc.channel)


def cmd_info(sc, args) -> dict:
    p = sc.source.pmf
    H = lambda a, b=(): conditional_entropy(p, a, b)
    ent = {
        "H(S1)": H("S1"),
        "H(S2)": H("S2"),
        "H(S1,S2)": H(("S1", "S2")),
        "H(S1|S2)": H("S1", "S2"),
        "H(S2|S1)": H("S2", "S1"),
        "H(S1,S2|W)": H(("S1", "S2"), "W"),
        "H(S1,S2|W3)": H(("S1", "S2"), "W3"),
        "H(S1|S2,W3)": H("S1", ("S2", "W3")),
        "H(S2|S1,W3)": H("S2", ("S1", "W3")),
    }
    out = {"entropies": ent}
    if sc.channel is not None and (sc.chain is not None or sc.chain_request is not None):
        j = _joint(sc, _chain(sc, args))
        I = lambda a, b, c=(): conditional_mutual_information(j, a, b, c)
        out["information"] = {
            "I(X1,X2,X3;Y)": I(("X1", "X2", "X3"), "Y"),
            "I(X1,X2;Y3|X3)": I(("X1", "X2"), "Y3", "X3"),
            "I(S1,S2;Y)": I(("S1", "S2"), "Y"),
            "I(S1,S2;Y3)": I(("S1", "S2"), "Y3"),
        }
    return out


def _report_conditions(rep) -> dict:
    return {
        "scheme": rep.scheme.value,
        "overall": rep.overall,
        "min_margin_bits": rep.min_margin_bits,
        "conditions": [
            {"id": c.id, "lhs": c.lhs, "rhs": c.rhs, "lhs_bits": c.lhs_bits, "rhs_bits": c.rhs_bits,
             "margin_bits": c.margin_bits, "satisfied": c.satisfied, "boundary": c.boundary}
            for c in rep.conditions
        ],
    }


def cmd_check(sc, args) -> dict:
    chain = _chain(sc, args)
    schemes = args.scheme or [FAMILY_SCHEME.get(getattr(chain, "family", "thm2"), "thm2")]
    joint = _joint(sc, chain)
    return {"schemes": [_report_conditions(check(joint, s)) for s in schemes]}


def _short(x: float) -> str:
    return f"{x:.5f}".rstrip("0").rstrip(".")


def cmd_bound(sc, args) -> dict:
    model = _scenario_model(sc)
    if not sc.channel.somarc:
        raise Mismatch("the sum-rate bound needs a semi-orthogonal channel (somarc: true)")
    if args.optimize or args.grid_step is not None:
        res = _search(distopt.Objective.SOMARC_BOUND, distopt.Family.PRODUCT, sc, args)
        chain = distopt.to_chain(res.best_chain, model)
        method = "grid" if args.grid_step is not None else "optimize"
    elif isinstance(sc.chain, InputChainIndependent):
        chain, method = sc.chain, "scenario chain"
    else:
        n1, n2, n3 = sc.channel.input_sizes
        chain = InputChainIndependent.product(np.full(n1, 1 / n1), np.full(n2, 1 / n2), np.full(n3, 1 / n3))
        method = "uniform inputs"
    joint = _joint(sc, chain)
    first, second = somarc_terms(joint)
    bound = min(first, second)
    h = conditional_entropy(sc.source.pmf, ("S1", "S2"))
    if h > bound:
        verdict = f"separation infeasible: H = {_short(h)} > {_short(bound)}"
    else:
        verdict = f"separation not ruled out: H = {_short(h)} <= {_short(bound)}"
    px = joint.probs.sum(axis=tuple(i for i, n in enumerate(joint.names) if n not in ("X1", "X2", "X3")))
    return {
        "method": method,
        "H(S1,S2)": h,
        "bound_bits": bound,
        "cut_relay_bits": first,
        "cut_destination_bits": second,
        "gap_bits": h - bound,
        "inputs": {
            "p(X1)": px.sum(axis=(1, 2)).tolist(),
            "p(X2)": px.sum(axis=(0, 2)).tolist(),
            "p(X3)": px.sum(axis=(0, 1)).tolist(),
        },
        "verdict": verdict,
    }


def cmd_optimize(sc, args) -> dict:
    req = sc.chain_request or {}
    objective = distopt.Objective(args.objective or req.get("objective", "min_margin_thm2"))
    family = args.family or req.get("family") or DEFAULT_FAMILY[objective]
    res = _search(objective, family, sc, args)
    model = _scenario_model(sc)
    names, blocks, it = {}, list(res.best_chain.blocks), 0
    for fname, shape, _ in distopt.layout(res.best_chain.family, model):
        k = int(np.prod(shape, dtype=int))
        names[fname] = [b.tolist() for b in blocks[it:it + k]]
        it += k
    out = {
        "objective": objective.value,
        "family": distopt.Family(family).value,
        "method": "grid" if args.grid_step is not None else "optimize",
        "best_value_bits": res.best_value_bits,
        "evaluations": res.evaluations,
        "trace": list(res.trace),
        "best_chain": names,
    }
    if res.best_chain.family in (distopt.Family.THM1, distopt.Family.SEPARATION):
        # no cardinality bound is known for V1, V2; the search is capped at these sizes
        out["v_sizes_cap"] = list(model.v_sizes)
    return out


def cmd_simulate(sc, args) -> dict:
    sim = sc.sim
    pick = lambda flag, key, default: flag if flag is not None else sim.get(key, default)
    seed = args.seed
    if args.uncoded_cpm:
        if sc.channel is None:
            raise Mismatch("scenario has no channel")
        trials = pick(args.trials, "trials", 100000)
        if trials < 1:
            raise SimConfigError("trials must be >= 1")
        rep = run_uncoded_cpm_somarc(trials, seed, sc.source, sc.channel)
        return {"scheme": "uncoded-cpm", "trials": trials, "seed": seed, "session_errors": rep.session_errors,
                "session_error_rate": rep.session_error_rate, "relay_block_error_rate": 0.0,
                "dest_block_error_rate": rep.dest_block_error_rate, "wilson_interval": list(rep.wilson_interval)}
    chain = _chain(sc, args)
    if not isinstance(chain, InputChainThm2):
        raise Mismatch("simulation needs a thm2 chain p(x1|s1) p(x2|s2) p(x3|s1,s2)")
    if sc.channel is None:
        raise Mismatch("scenario has no channel")
    cfg = SimConfig(
        n=pick(args.n, "n", 8), B=pick(args.blocks, "blocks", 2),
        R1=float(pick(args.rate1, "rate1", 1.0)), R2=float(pick(args.rate2, "rate2", 1.0)),
        epsilon=float(pick(args.epsilon, "epsilon", 0.25)), trials=pick(args.trials, "trials", 200), seed=seed,
        network=pick(args.network, "network", "marc"), typicality=pick(args.typicality, "typicality", "per-tuple"),
        workers=args.workers, trace=args.trace is not None,
    )
    rep = run_thm2_sim(sc.source, sc.channel, chain, cfg)
    if args.trace is not None:
        with open(args.trace, "w") as fh:
            fh.write(rep.trace_csv())
    return {
        "scheme": "thm2", "n": cfg.n, "blocks": cfg.B, "rate1": cfg.R1, "rate2": cfg.R2, "epsilon": cfg.epsilon,
        "network": cfg.network, "typicality": cfg.typicality, "bins": [cfg.bins1, cfg.bins2],
        "trials": cfg.trials, "seed": seed, "session_errors": rep.session_errors,
        "session_error_rate": rep.session_error_rate, "relay_block_error_rate": rep.relay_block_error_rate,
        "dest_block_error_rate": rep.dest_block_error_rate, "wilson_interval": list(rep.wilson_interval),
    }


HANDLERS = {"info": cmd_info, "check": cmd_check, "bound": cmd_bound, "optimize": cmd_optimize,
            "simulate": cmd_simulate}


def run_command(cmd: str, scenario, args: argparse.Namespace) -> Report:
    start = time.perf_counter()
    results = HANDLERS[cmd](scenario, args)
    options = {k: v for k, v in sorted(vars(args).items())
               if k not in ("command", "format", "include_timing", "workers", "trace")}
    rep = Report(command=cmd, options=options, scenario={"name": scenario.name, "digest": scenario.digest},
                 results=results)
    if args.include_timing:
        rep.timing_s = time.perf_counter() - start
    return rep


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ScenarioError):
        return exc.exit_code
    if isinstance(exc, (Mismatch, ChainError, VariableError, distopt.IncompatibleFamily)):
        return EXIT_MISMATCH
    if isinstance(exc, (SimBudgetError, distopt.GridTooLarge)):
        return EXIT_BUDGET
    if isinstance(exc, SimConfigError):
        return EXIT_USAGE
    if isinstance(exc, PmfError):
        return EXIT_NORMALIZATION
    if isinstance(exc, ValueError):
        return EXIT_USAGE
    return EXIT_INTERNAL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sc = parse_scenario(args.scenario)
        rep = run_command(args.command, sc, args)
        sys.stdout.write(emit(rep, args.format))
    except Exception as exc:  # every failure maps to a documented exit code
        code = _exit_code(exc)
        sys.stderr.write(f"marcjscc: error: {exc}\n")
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())

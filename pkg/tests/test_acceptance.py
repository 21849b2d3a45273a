"""One test per acceptance criterion; each records a PASS/FAIL line in the summary."""
import json
import os
import time

import numpy as np

from marcjscc.cli import main
from marcjscc.codingsim import SimConfig, run_thm2_sim
from marcjscc.distopt import Scenario, grid_scan, optimize
from marcjscc.feasibility import check_crbc, check_mac_cover, check_thm1, check_thm2
from marcjscc.infotheory import (
    JointPmf,
    Kernel,
    Variable,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
    split_variable,
)
from marcjscc.network import (
    ChannelModel,
    InputChainIndependent,
    InputChainThm2,
    assemble_joint,
    crbc_specialize,
    input_marginal_chain,
    somarc_example,
)
from marcjscc.presets import erasure_scenario

from _strategies import random_chain, random_channel, random_source

NAMES = ("A", "B", "C", "D", "E")


def _cli_json(capsys, *argv):
    code = main(list(argv) + ["--format", "structured"])
    out = capsys.readouterr().out
    assert code == 0
    return out


def test_criterion_1_separation_gap(capsys, verdict):
    t0 = time.perf_counter()
    res = json.loads(_cli_json(capsys, "bound", "--optimize", "--scenario", "somarc-eq3"))["results"]
    elapsed = time.perf_counter() - t0
    h, bound, gap = res["H(S1,S2)"], res["bound_bits"], res["gap_bits"]
    ok = (abs(h - 1.5849625007) <= 1e-9 and abs(bound - 1.5) <= 1e-3 and abs(gap - 0.0849625) <= 1e-3
          and elapsed < 10 and res["verdict"].startswith("separation infeasible"))
    verdict(1, ok, f"H={h:.10f} bound={bound:.6f} gap={gap:.6f} time={elapsed:.2f}s")


def test_criterion_2_uncoded_cpm(capsys, verdict):
    t0 = time.perf_counter()
    res = json.loads(_cli_json(capsys, "simulate", "--uncoded-cpm", "--trials", "1000000"))["results"]
    elapsed = time.perf_counter() - t0
    ok = res["trials"] == 10**6 and res["session_errors"] == 0 and elapsed < 5
    verdict(2, ok, f"errors={res['session_errors']} of {res['trials']} time={elapsed:.2f}s")


def _random_joint(rng):
    k = int(rng.integers(3, 6))
    sizes = [int(s) for s in rng.integers(1, 5, size=k)]
    p = rng.dirichlet(np.full(int(np.prod(sizes)), 0.7))
    if rng.random() < 0.5:
        p[rng.random(p.size) < 0.4] = 0.0
        if p.sum() == 0:
            p[0] = 1.0
        p /= p.sum()
    return JointPmf([Variable(NAMES[i], s) for i, s in enumerate(sizes)], p.reshape(sizes))


def test_criterion_3_information_identities(verdict):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        p = _random_joint(rng)
        a, b, c, *rest = p.names
        h_ab = entropy(p, [a, b])
        checks = [
            h_ab - entropy(p, [a]) - conditional_entropy(p, b, a),  # chain rule for entropy
            mutual_information(p, a, (b, c))
            - mutual_information(p, a, b) - conditional_mutual_information(p, a, c, b),  # chain rule for MI
            mutual_information(p, a, b) - mutual_information(p, b, a),
            conditional_mutual_information(p, a, b, [c] + rest) - conditional_mutual_information(p, b, a, [c] + rest),
        ]
        worst = max(worst, max(abs(x) for x in checks))
        # nonnegativity and conditioning reduces entropy, as signed slack
        worst = max(worst, -min(0.0, mutual_information(p, a, b)),
                    -min(0.0, conditional_mutual_information(p, a, b, c)),
                    -min(0.0, entropy(p, [a]) - conditional_entropy(p, a, (b, c))))
    verdict(3, worst <= 1e-10, f"100 pmfs, worst violation {worst:.2e}")


def test_criterion_4_mac_reduction(verdict):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        sizes = (int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(1, 3)), 1)
        src = random_source(rng, sizes)
        xs = (int(rng.integers(2, 4)), int(rng.integers(2, 4)), 1)
        ch = random_channel(rng, xs, (2, int(rng.integers(2, 5))))
        j = assemble_joint(src, random_chain(rng, "thm1", src, xs=xs, v=(1, 1)), ch)
        mac = check_mac_cover(j).margins
        relay = [check_thm1(j)[cid].margin_bits for cid in ("2a", "2b", "2c")]
        worst = max(worst, max(abs(m - r) for m, r in zip(mac, relay)))
    verdict(4, worst <= 1e-12, f"50 instances, max |margin difference| {worst:.2e}")


def test_criterion_5_crbc_dominance(verdict):
    rng = np.random.default_rng(5)
    worst = -np.inf
    for _ in range(200):
        src, ch = crbc_specialize(random_source(rng, (int(rng.integers(2, 4)), 1, 2, 2)),
                                  random_channel(rng, (2, 1, 2), (3, 2)))
        n1 = src.var("S1").alphabet_size
        chain = InputChainThm2(rng.dirichlet(np.ones(2), size=n1), np.ones((1, 1)),
                               rng.dirichlet(np.ones(2), size=n1)[:, None, :])
        cpm = assemble_joint(src, chain, ch)
        r10 = check_crbc(cpm, "eq10")
        r9 = check_crbc(assemble_joint(src, input_marginal_chain(cpm), ch), "eq9")
        worst = max(worst, r10["10a"].rhs_bits - r9["9a"].rhs_bits, r10["10b"].rhs_bits - r9["9b"].rhs_bits)
    verdict(5, worst <= 1e-10, f"200 instances, max RHS(10) - RHS(9) = {worst:.2e}")


def test_criterion_6_deterministic_function(verdict):
    rng = np.random.default_rng(6)
    src, ch = somarc_example()
    worst = 0.0
    for _ in range(100):
        chain = InputChainIndependent.product(*(rng.dirichlet(np.full(2, 0.6)) for _ in range(3)))
        j = split_variable(assemble_joint(src, chain, ch), "Y")
        diff = mutual_information(j, ("X1", "X2"), ("Y3", "YS")) - mutual_information(j, ("X1", "X2"), "YS")
        worst = max(worst, abs(diff))
    verdict(6, worst <= 1e-10, f"100 product inputs, max |difference| {worst:.2e}")


def _random_somarc_channel(rng):
    yr, ys = Variable("YR", 2), Variable("YS", 3)
    p_yr = rng.dirichlet(np.ones(2))
    p_ysy3 = rng.dirichlet(np.ones(6), size=(2, 2)).reshape(2, 2, 3, 2)
    table = (p_yr[None, None, :, None, None] * p_ysy3[:, :, None, :, :]).reshape(2, 2, 1, 6, 2)
    inputs = [Variable("X1", 2), Variable("X2", 2), Variable("X3", 1)]
    outputs = [Variable("Y", 6, components=(yr, ys)), Variable("Y3", 2)]
    return ChannelModel(Kernel(inputs, outputs, table), somarc=True)


def test_criterion_7_optimizer_vs_grid(verdict):
    rng = np.random.default_rng(7)
    worst = np.inf
    for k in range(20):
        if k % 2:
            sc, obj, fam = Scenario(*somarc_example()[:1], _random_somarc_channel(rng)), "somarc_bound", "product"
        else:
            src = random_source(rng, (2, 1, 2, 2))
            sc, obj, fam = Scenario(src, random_channel(rng, (2, 1, 1), (2, 2))), "min_margin_thm2", "thm2"
        grid = grid_scan(obj, sc, fam, step=0.05).best_value_bits
        opt = optimize(obj, sc, fam, restarts=3, iters=100, seed=k).best_value_bits
        worst = min(worst, opt - grid)
    somarc = grid_scan("somarc_bound", Scenario(*somarc_example()), "product", step=0.05).best_value_bits
    ok = worst >= -1e-6 and somarc >= 1.499
    verdict(7, ok, f"min(optimize - grid) over 20 = {worst:.2e}, somarc grid = {somarc:.6f}")


def _median_errors(kind, n, seeds=range(5), trials=200):
    src, ch, chain, (r1, r2) = erasure_scenario(kind)
    rates = []
    for seed in seeds:
        cfg = SimConfig(n=n, B=2, R1=r1, R2=r2, epsilon=0.25, trials=trials, seed=seed, network="mabrc")
        rates.append(run_thm2_sim(src, ch, chain, cfg).session_error_rate)
    return float(np.median(rates)), rates


def test_criterion_8_simulator_trend(verdict):
    t0 = time.perf_counter()
    margins = {}
    for kind in ("feasible", "infeasible"):
        src, ch, chain, _ = erasure_scenario(kind)
        margins[kind] = check_thm2(assemble_joint(src, chain, ch))
    ns = (6, 10, 14)
    feas = [_median_errors("feasible", n)[0] for n in ns]
    infeas = [min(_median_errors("infeasible", n, trials=200)[1]) for n in ns]
    elapsed = time.perf_counter() - t0
    ok = (min(margins["feasible"].margins) >= 0.2 and margins["infeasible"]["5f"].margin_bits <= -0.2
          and all(a >= b for a, b in zip(feas, feas[1:])) and min(infeas) >= 0.3 and elapsed < 600)
    verdict(8, ok, f"feasible medians {feas}, infeasible minima {infeas}, time={elapsed:.0f}s")


def test_criterion_9_reproducibility(capsys, verdict):
    many = str(max(2, os.cpu_count() or 1))
    commands = [
        ("info",),
        ("check", "--scheme", "thm1", "--scheme", "thm2"),
        ("bound", "--optimize", "--restarts", "2", "--iters", "40"),
        ("optimize", "--objective", "somarc_bound", "--restarts", "2", "--iters", "40"),
        ("simulate", "--scenario", "perfect-somarc", "--trials", "20", "--n", "6"),
        ("simulate", "--uncoded-cpm", "--trials", "20000"),
    ]
    mismatched = []
    for cmd in commands:
        runs = [_cli_json(capsys, *cmd, "--seed", "11", "--workers", w) for w in ("1", "1", many)]
        if len(set(runs)) != 1:
            mismatched.append(cmd[0])
    verdict(9, not mismatched, f"{len(commands)} commands x 3 runs (workers 1, 1, {many}); mismatches {mismatched}")

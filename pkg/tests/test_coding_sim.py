import itertools
import math

import numpy as np
import pytest
from scipy.stats import chisquare, multinomial

from marcjscc.codingsim import (
    Codebooks,
    SimBudgetError,
    SimConfig,
    SimConfigError,
    cpm_decoder_table,
    cpm_is_zero_error,
    is_jointly_typical,
    run_thm2_sim,
    run_uncoded_cpm_somarc,
    sequence_ids,
    sw_rate_hint,
    wilson_interval,
)
from marcjscc.infotheory import JointPmf, Variable, marginalize, point_mass
from marcjscc.network import InputChainThm1, InputChainThm2, SourceModel, identity_cpm_chain, somarc_example
from marcjscc.presets import erasure_channel, perfect_network, somarc_source, tagged_chain

SOMARC_PMF = marginalize(somarc_source().pmf, ("S1", "S2"))


def point_source():
    return SourceModel.from_table({"S1": 2, "S2": 2}, [((0, 0, 0, 0), 1.0)])


# ------------------------------------------------------------------ typicality


def test_all_a_sequence_vs_point_mass():
    ref = point_mass([Variable("A", 3), Variable("B", 2)], (2, 1))
    for eps in (1e-9, 0.1, 5.0):
        assert is_jointly_typical((np.full(9, 2), np.ones(9, int)), ref, eps)


def test_zero_probability_tuple_is_never_typical():
    s1 = np.array([0, 0, 1, 1])
    s2 = np.array([0, 1, 1, 0])  # (1, 0) has no mass
    assert not is_jointly_typical((s1, s2), SOMARC_PMF, 100.0, normalize=False)


def test_typicality_tolerance_modes():
    ref = JointPmf([Variable("A", 2)], [0.5, 0.5])
    seq = np.array([0] * 6 + [1] * 4)  # deviation 0.1
    assert not is_jointly_typical((seq,), ref, 0.15)  # tol 0.075
    assert is_jointly_typical((seq,), ref, 0.15, normalize=False)


def test_typicality_length_mismatch():
    with pytest.raises(ValueError):
        is_jointly_typical((np.zeros(3, int), np.zeros(4, int)), SOMARC_PMF, 0.2)
    with pytest.raises(ValueError):
        is_jointly_typical((np.zeros(3, int),), SOMARC_PMF, 0.2)


def _exact_acceptance(n, eps):
    # enumerate type classes over the three support cells
    p = np.array([1 / 3, 1 / 3, 1 / 3])
    tol = eps / 4
    total = 0.0
    for k0 in range(n + 1):
        for k1 in range(n + 1 - k0):
            counts = (k0, k1, n - k0 - k1)
            if all(abs(c / n - q) <= tol + 1e-12 for c, q in zip(counts, p)):
                total += multinomial.pmf(counts, n, p)
    return total


def test_acceptance_probability_matches_multinomial():
    n, eps, draws = 12, 0.2, 10_000
    rng = np.random.default_rng(12)
    sample = SOMARC_PMF.sample(rng, n * draws).reshape(draws, n, 2)
    hits = sum(is_jointly_typical((row[:, 0], row[:, 1]), SOMARC_PMF, eps) for row in sample)
    assert hits / draws == pytest.approx(_exact_acceptance(n, eps), abs=0.02)


# ------------------------------------------------------------------ codebooks


def test_sequence_ids_are_exact_and_distinct():
    seqs = np.array(list(itertools.product(range(3), repeat=4)))
    ids = sequence_ids(seqs, 3)
    assert len(set(ids.tolist())) == 81


def test_codeword_letter_marginals():
    rng = np.random.default_rng(4)
    chain = InputChainThm2(np.array([[0.2, 0.5, 0.3], [0.7, 0.1, 0.2]]), np.full((2, 2), 0.5), np.ones((2, 2, 1)))
    cb = Codebooks(99, chain, (2, 2), (16, 16), n=10)
    seqs = rng.integers(0, 2, size=(10_000, 10))
    u = rng.integers(0, 16, size=10_000)
    x = cb.x(1, u, seqs)
    for s in (0, 1):
        letters = x[seqs == s]
        freq = np.bincount(letters, minlength=3) / letters.size
        assert 0.5 * np.abs(freq - chain.p_x1_given_s1[s]).sum() < 0.01
    # same key, same letters
    np.testing.assert_array_equal(x[:5], Codebooks(99, chain, (2, 2), (16, 16), n=10).x(1, u[:5], seqs[:5]))


def test_bin_map_uniformity():
    chain = identity_cpm_chain(somarc_source())
    cb = Codebooks(7, chain, (2, 2), (64, 64), n=24)
    seqs = np.random.default_rng(8).integers(0, 2, size=(100_000, 24))
    seqs = np.unique(seqs, axis=0)
    occupancy = np.bincount(cb.bin(seqs, 1), minlength=64)
    assert chisquare(occupancy).pvalue > 1e-3


# ------------------------------------------------------------------ sessions


def test_perfect_channel_example():
    src, ch, chain = perfect_network(somarc_source())
    cfg = SimConfig(n=8, B=2, R1=1.0, R2=1.0, epsilon=0.3, trials=200)
    rep = run_thm2_sim(src, ch, chain, cfg)
    assert rep.session_error_rate <= 0.2
    lo, hi = rep.wilson_interval
    assert lo <= rep.session_error_rate <= hi


def test_zero_capacity_channel():
    src = somarc_source()
    chain = tagged_chain(src)
    ch = erasure_channel((8, 8, 1), [], [])
    for n in (4, 6):
        rep = run_thm2_sim(src, ch, chain, SimConfig(n=n, R1=1.0, R2=1.0, trials=40))
        assert rep.session_error_rate >= 0.5


def test_point_mass_sources_never_err():
    # untagged inputs: every letter is fixed, so every decoder sees one candidate
    src, ch, chain = perfect_network(point_source(), tag=1)
    rep = run_thm2_sim(src, ch, chain, SimConfig(n=6, R1=0.0, R2=0.0, trials=30, network="mabrc"))
    assert rep.session_errors == 0 and rep.relay_block_errors == 0


def test_reproducible_across_workers():
    src, ch, chain = perfect_network(somarc_source())
    cfg = SimConfig(n=6, trials=12, trace=True, seed=5)
    a = run_thm2_sim(src, ch, chain, cfg)
    b = run_thm2_sim(src, ch, chain, SimConfig(n=6, trials=12, trace=True, seed=5, workers=3))
    assert (a.session_errors, a.relay_block_errors, a.dest_block_errors) == (
        b.session_errors, b.relay_block_errors, b.dest_block_errors)
    assert a.trace == b.trace
    assert a.trace_csv().splitlines()[0] == "trial,block,stage,verdict"


def test_rates_in_unit_interval():
    src, ch, chain = perfect_network(somarc_source())
    rep = run_thm2_sim(src, ch, chain, SimConfig(n=5, trials=10, network="mabrc"))
    for r in (rep.session_error_rate, rep.relay_block_error_rate, rep.dest_block_error_rate):
        assert 0.0 <= r <= 1.0


def test_config_validation():
    with pytest.raises(SimConfigError):
        SimConfig(n=0)
    with pytest.raises(SimConfigError):
        SimConfig(n=4, epsilon=0.0)
    with pytest.raises(SimConfigError):
        SimConfig(n=4, typicality="weak")
    with pytest.raises(SimBudgetError):
        SimConfig(n=12, R1=1.0, R2=1.0)
    assert SimConfig(n=3, R1=0.5).bins1 == round(2 ** 1.5)
    src, ch = somarc_example()
    thm1 = InputChainThm1([1.0], np.eye(2)[:, None, :], [1.0], np.eye(2)[:, None, :], np.full((1, 1, 2), 0.5))
    with pytest.raises(SimConfigError):
        run_thm2_sim(src, ch, thm1, SimConfig(n=4))


def test_wilson_interval_edges():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


# ------------------------------------------------------------------ uncoded CPM


def test_uncoded_cpm_zero_errors():
    rep = run_uncoded_cpm_somarc(200_000, seed=3)
    assert rep.session_errors == 0


def test_cpm_decoder_is_a_bijection_on_support():
    src, ch = somarc_example()
    table = cpm_decoder_table(src, ch)
    reachable = [tuple(r) for r in table if r[0] >= 0]
    assert sorted(reachable) == [(0, 0), (0, 1), (1, 1)]
    assert cpm_is_zero_error(src, ch)


def test_uncoded_cpm_deterministic():
    a = run_uncoded_cpm_somarc(1, seed=9)
    b = run_uncoded_cpm_somarc(1, seed=9)
    assert a == b


# ------------------------------------------------------------------ rate hint


def test_rate_hint_point_mass():
    h = sw_rate_hint(point_source())
    assert h["R1"] == pytest.approx(0.1) and h["R2"] == pytest.approx(0.1)


def test_rate_hint_somarc():
    h = sw_rate_hint(somarc_source())
    assert h["R1"] == pytest.approx(2 / 3 + 0.1, abs=1e-12)
    assert h["R2"] == pytest.approx(2 / 3 + 0.1, abs=1e-12)
    assert h["sum_required"] == pytest.approx(math.log2(3) + 0.2, abs=1e-12)
    assert not h["sum_ok"]


def test_rate_hint_independent_bits():
    h = sw_rate_hint(SourceModel.from_pair(np.full((2, 2), 0.25)))
    assert (h["R1"], h["R2"]) == (pytest.approx(1.1), pytest.approx(1.1))
    assert h["sum_ok"]

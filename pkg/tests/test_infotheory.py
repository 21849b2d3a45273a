import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marcjscc.infotheory import (
    ConsistencyError,
    JointPmf,
    Kernel,
    PmfError,
    Variable,
    VariableError,
    ZeroProbabilityEvent,
    _clamp,
    compose,
    condition_on_event,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    kernel_from_table,
    marginalize,
    mutual_information,
    pmf_from_table,
    point_mass,
    product,
    split_variable,
    uniform,
)

from _strategies import brute_cmi, brute_entropy, random_pmfs

A, B, C = Variable("A", 2), Variable("B", 3), Variable("C", 2)


def three_point():
    s1, s2 = Variable("S1", 2), Variable("S2", 2)
    return pmf_from_table([s1, s2], [((0, 0), 1 / 3), ((0, 1), 1 / 3), ((1, 1), 1 / 3)])


# ----------------------------------------------------------- construction


def test_negative_entry_rejected():
    with pytest.raises(PmfError):
        JointPmf([A], [1.2, -0.2])


def test_bad_sum_rejected():
    with pytest.raises(PmfError):
        JointPmf([A], [0.5, 0.48])


def test_tiny_drift_is_renormalized():
    p = JointPmf([A], [0.5, 0.5 + 5e-10])
    assert p.probs.sum() == pytest.approx(1.0, abs=1e-15)


def test_shape_mismatch_rejected():
    with pytest.raises(PmfError):
        JointPmf([A, B], np.full(5, 0.2))


def test_duplicate_names_rejected():
    with pytest.raises(VariableError):
        uniform(A, Variable("A", 3))


def test_probs_are_read_only():
    p = uniform(A, B)
    with pytest.raises(ValueError):
        p.probs[0, 0] = 1.0


def test_labels_and_index():
    v = Variable("X", 3, labels=("a", "b", "c"))
    assert v.index("c") == 2
    assert v.index(1) == 1
    with pytest.raises(PmfError):
        v.index("z")
    with pytest.raises(PmfError):
        Variable("X", 2, labels=("a",))


def test_component_sizes_must_multiply():
    with pytest.raises(PmfError):
        Variable("Y", 5, components=(Variable("YR", 2), Variable("YS", 3)))


# ----------------------------------------------------------- entropies


def test_uniform_three_point_entropy_is_log2_3():
    assert entropy(three_point()) == pytest.approx(math.log2(3), abs=1e-12)
    assert entropy(three_point()) == pytest.approx(1.5849625007, abs=1e-9)


def test_three_point_conditionals():
    # given S2 = 0 (mass 1/3) S1 is known, given S2 = 1 (mass 2/3) it is a fair bit
    p = three_point()
    assert conditional_entropy(p, "S1", "S2") == pytest.approx(2 / 3, abs=1e-12)
    assert conditional_entropy(p, "S2", "S1") == pytest.approx(2 / 3, abs=1e-12)
    h = -(1 / 3) * math.log2(1 / 3) - (2 / 3) * math.log2(2 / 3)
    assert entropy(p, ["S1"]) == pytest.approx(h, abs=1e-12)


def test_point_mass_and_singletons_have_zero_entropy():
    p = point_mass([A, B], (1, 2))
    assert entropy(p) == 0.0
    assert entropy(uniform(Variable("Z", 1))) == 0.0


def test_zero_cells_do_not_produce_nan():
    p = JointPmf([A, C], [[0.5, 0.0], [0.0, 0.5]])
    assert entropy(p) == pytest.approx(1.0)
    assert mutual_information(p, "A", "C") == pytest.approx(1.0)


def test_unknown_variable():
    with pytest.raises(VariableError):
        entropy(uniform(A), ["Q"])
    with pytest.raises(VariableError):
        conditional_entropy(uniform(A, B), "A", "Q")


def test_overlapping_sets_rejected():
    with pytest.raises(VariableError):
        conditional_mutual_information(uniform(A, B), "A", ("A", "B"))


def test_clamp():
    assert _clamp(-5e-13, "x") == 0.0
    assert _clamp(0.25, "x") == 0.25
    with pytest.raises(ConsistencyError):
        _clamp(-1e-6, "x")


@settings(max_examples=60, deadline=None)
@given(random_pmfs())
def test_entropy_matches_brute_force(p):
    for k in range(len(p.names) + 1):
        names = p.names[:k]
        assert entropy(p, names) == pytest.approx(brute_entropy(p, names), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(random_pmfs(min_vars=3))
def test_cmi_matches_definition(p):
    a, b, *rest = p.names
    assert conditional_mutual_information(p, a, b, rest) == pytest.approx(brute_cmi(p, [a], [b], rest), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(random_pmfs(min_vars=2))
def test_entropy_bounds(p):
    for v in p.variables:
        h = entropy(p, [v.name])
        assert -1e-12 <= h <= math.log2(v.alphabet_size) + 1e-12
    assert entropy(p) <= sum(entropy(p, [n]) for n in p.names) + 1e-10


# ----------------------------------------------------------- operations


def test_marginalize_keeps_pmf_order():
    p = uniform(A, B, C)
    m = marginalize(p, ["C", "A"])
    assert m.names == ("A", "C")
    np.testing.assert_allclose(m.probs, 0.25)


def test_compose_matches_manual_product():
    base = JointPmf([A], [0.3, 0.7])
    k = kernel_from_table([A], [C], [(0, 0, 0.9), (0, 1, 0.1), (1, 0, 0.2), (1, 1, 0.8)])
    j = compose(base, k)
    np.testing.assert_allclose(j.probs, [[0.27, 0.03], [0.14, 0.56]])


def test_compose_permutes_given_axes():
    base = uniform(A, B)
    table = np.random.default_rng(0).dirichlet(np.ones(2), size=(3, 2))  # given (B, A)
    j = compose(base, Kernel([B, A], [C], table))
    for a in range(2):
        for b in range(3):
            np.testing.assert_allclose(j.probs[a, b], table[b, a] / 6)


def test_compose_rejects_collisions_and_size_mismatch():
    with pytest.raises(VariableError):
        compose(uniform(A, C), Kernel([A], [C], np.eye(2)))
    with pytest.raises(PmfError):
        compose(uniform(Variable("A", 3)), Kernel([A], [C], np.eye(2)))


def test_kernel_rows_validated():
    with pytest.raises(PmfError):
        Kernel([A], [C], [[0.5, 0.4], [0.5, 0.5]])
    k = Kernel([A], [C], np.eye(2))
    assert k.is_deterministic
    assert k.rows().shape == (2, 2)


def test_product_is_independent():
    p = product(JointPmf([A], [0.25, 0.75]), uniform(B))
    assert mutual_information(p, "A", "B") == pytest.approx(0.0, abs=1e-12)
    assert entropy(p) == pytest.approx(entropy(p, ["A"]) + math.log2(3))


def test_condition_on_event():
    p = three_point()
    c = condition_on_event(p, {"S2": 0})
    np.testing.assert_allclose(c.probs, [1.0, 0.0])
    with pytest.raises(ZeroProbabilityEvent):
        condition_on_event(p.reorder(["S1", "S2"]), {"S1": 1, "S2": 0})


def test_split_variable():
    y = Variable("Y", 6, components=(Variable("YR", 2), Variable("YS", 3)))
    p = uniform(A, y)
    s = split_variable(p, "Y")
    assert s.names == ("A", "YR", "YS")
    assert entropy(s, ["YS"]) == pytest.approx(math.log2(3))
    with pytest.raises(VariableError):
        split_variable(p, "A")


def test_prob_and_relabel():
    p = three_point()
    assert p.prob(S1=1) == pytest.approx(1 / 3)
    assert p.relabel({"S1": "T"}).names == ("T", "S2")


def test_sample_never_hits_zero_cells():
    p = three_point()
    draws = p.sample(np.random.default_rng(1), 30000)
    assert not np.any((draws[:, 0] == 1) & (draws[:, 1] == 0))
    freq = np.bincount(draws[:, 0] * 2 + draws[:, 1], minlength=4) / len(draws)
    np.testing.assert_allclose(freq, [1 / 3, 1 / 3, 0, 1 / 3], atol=0.015)


@settings(max_examples=40, deadline=None)
@given(random_pmfs(min_vars=2), st.data())
def test_reorder_preserves_information(p, data):
    perm = data.draw(st.permutations(p.names))
    q = p.reorder(perm)
    a, b = p.names[0], p.names[1]
    assert conditional_entropy(q, a, b) == pytest.approx(conditional_entropy(p, a, b), abs=1e-12)

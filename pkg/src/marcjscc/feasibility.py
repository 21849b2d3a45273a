"""Sufficient conditions and the sum-rate outer bound, evaluated on joints.

Each condition is evaluated exactly as written (conditioning sets included,
even where they are redundant); simplification identities are checked in
the test-suite instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .infotheory import (
    JointPmf,
    conditional_entropy,
    conditional_mutual_information,
    split_variable,
)
from .network import MARKOV_TOL, ChainError

BOUNDARY_TOL = 1e-12


class Scheme(str, Enum):
    THM1 = "thm1"
    THM2 = "thm2"
    SEPARATION = "separation"
    MAC_COVER = "mac"
    CRBC_9 = "crbc9"
    CRBC_10 = "crbc10"
    PROP1 = "prop1"


@dataclass(frozen=True)
class Condition:
    id: str
    lhs: str
    rhs: str
    lhs_bits: float
    rhs_bits: float

    @property
    def margin_bits(self) -> float:
        return self.rhs_bits - self.lhs_bits

    @property
    def boundary(self) -> bool:
        return abs(self.margin_bits) <= BOUNDARY_TOL

    @property
    def satisfied(self) -> bool:
        # the inequalities are strict; a numerically zero margin does not count
        return self.margin_bits > BOUNDARY_TOL


@dataclass(frozen=True)
class ConditionReport:
    scheme: Scheme
    conditions: tuple[Condition, ...]

    @property
    def overall(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    @property
    def min_margin_bits(self) -> float:
        return min(c.margin_bits for c in self.conditions)

    @property
    def margins(self) -> list[float]:
        return [c.margin_bits for c in self.conditions]

    def __getitem__(self, cid: str) -> Condition:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)


# (id, H-targets, H-given, I-A, I-B, I-C)
THM1_TERMS = (
    ("2a", "S1", "S2 W3", "X1", "Y3", "S2 X2 V1 X3 W3"),
    ("2b", "S2", "S1 W3", "X2", "Y3", "S1 X1 V2 X3 W3"),
    ("2c", "S1 S2", "W3", "X1 X2", "Y3", "V1 V2 X3 W3"),
    ("2d", "S1", "S2 W", "X1 X3", "Y", "S1 X2 V2"),
    ("2e", "S2", "S1 W", "X2 X3", "Y", "S2 X1 V1"),
    ("2f", "S1 S2", "W", "X1 X2 X3", "Y", "S1 S2"),
)

THM2_TERMS = (
    ("5a", "S1", "S2 W3", "X1", "Y3", "S1 X2 X3"),
    ("5b", "S2", "S1 W3", "X2", "Y3", "S2 X1 X3"),
    ("5c", "S1 S2", "W3", "X1 X2", "Y3", "S1 S2 X3"),
    ("5d", "S1", "S2 W", "X1 X3", "Y", "S2 X2 W"),
    ("5e", "S2", "S1 W", "X2 X3", "Y", "S1 X1 W"),
    ("5f", "S1 S2", "W", "X1 X2 X3", "Y", "W"),
)

MAC_TERMS = (
    ("mac-a", "S1", "S2", "X1", "Y3", "S2 X2"),
    ("mac-b", "S2", "S1", "X2", "Y3", "S1 X1"),
    ("mac-c", "S1 S2", "", "X1 X2", "Y3", ""),
)

CRBC9_TERMS = (
    ("9a", "S1", "W3", "X1", "Y3", "X3"),
    ("9b", "S1", "W", "X1 X3", "Y", ""),
)

CRBC10_TERMS = (
    ("10a", "S1", "W3", "X1", "Y3", "X3 S1"),
    ("10b", "S1", "W", "X1 X3", "Y", "W"),
)


def _fmt(kind, *groups):
    parts = [",".join(g.split()) for g in groups]
    if kind == "H":
        return f"H({parts[0]}|{parts[1]})" if parts[1] else f"H({parts[0]})"
    return f"I({parts[0]};{parts[1]}|{parts[2]})" if parts[2] else f"I({parts[0]};{parts[1]})"


def evaluate_terms(joint: JointPmf, scheme: Scheme, terms) -> ConditionReport:
    conds = []
    for cid, ht, hg, ia, ib, ic in terms:
        lhs = conditional_entropy(joint, tuple(ht.split()), tuple(hg.split()))
        rhs = conditional_mutual_information(joint, tuple(ia.split()), tuple(ib.split()), tuple(ic.split()))
        conds.append(Condition(cid, _fmt("H", ht, hg), _fmt("I", ia, ib, ic), lhs, rhs))
    return ConditionReport(scheme, tuple(conds))


def _require_singletons(joint: JointPmf, names, what):
    big = [n for n in names if joint.var(n).alphabet_size != 1]
    if big:
        raise ChainError(f"{what} requires singleton {', '.join(big)}")


def check_thm1(joint: JointPmf) -> ConditionReport:
    """Relay (2a-2c) and destination (2d-2f) conditions of the CPM-to-relay scheme."""
    return evaluate_terms(joint, Scheme.THM1, THM1_TERMS)


def check_thm2(joint: JointPmf) -> ConditionReport:
    """Relay (5a-5c) and destination (5d-5f) conditions of the CPM-to-destination scheme."""
    return evaluate_terms(joint, Scheme.THM2, THM2_TERMS)


def check_separation(joint: JointPmf) -> ConditionReport:
    """The CPM-to-relay conditions on a joint whose inputs ignore the sources."""
    for x, s, v in (("X1", "S1", "V1"), ("X2", "S2", "V2")):
        leak = conditional_mutual_information(joint, x, s, v)
        if leak > MARKOV_TOL:
            raise ChainError(f"not a separation chain: I({x};{s}|{v}) = {leak:.3g}")
    return evaluate_terms(joint, Scheme.SEPARATION, THM1_TERMS)


def check_mac_cover(joint: JointPmf) -> ConditionReport:
    """Correlated-sources MAC conditions with Y3 as the receiver."""
    _require_singletons(joint, ("V1", "V2", "X3", "W3"), "MAC reduction")
    return evaluate_terms(joint, Scheme.MAC_COVER, MAC_TERMS)


def check_crbc(joint: JointPmf, style: str = "eq9") -> ConditionReport:
    """Single-source relay broadcast conditions.

    ``eq9``: inputs p(x1,x3) independent of the source.
    ``eq10``: inputs p(x1|s1) p(x3|s1), the CPM-to-destination specialization.
    """
    _require_singletons(joint, ("S2", "X2"), "CRBC")
    if style == "eq9":
        dep = conditional_mutual_information(joint, ("X1", "X3"), ("S1", "W", "W3"))
        if dep > MARKOV_TOL:
            raise ChainError(f"eq9 needs source-independent inputs; I(X1,X3;S1,W,W3) = {dep:.3g}")
        return evaluate_terms(joint, Scheme.CRBC_9, CRBC9_TERMS)
    if style == "eq10":
        dep = conditional_mutual_information(joint, "X1", ("X3", "W", "W3"), "S1")
        dep += conditional_mutual_information(joint, "X3", ("W", "W3"), "S1")
        if dep > MARKOV_TOL:
            raise ChainError(f"eq10 needs a p(x1|s1)p(x3|s1) chain; residual dependence {dep:.3g}")
        return evaluate_terms(joint, Scheme.CRBC_10, CRBC10_TERMS)
    raise ValueError(f"unknown CRBC style {style!r}")


def somarc_terms(joint: JointPmf) -> tuple[float, float]:
    """The two cut values of the sum-rate bound: I(X1,X2;Y3,YS) and I(X3;YR) + I(X1,X2;YS)."""
    y = joint.var("Y")
    if not y.components or tuple(c.name for c in y.components) != ("YR", "YS"):
        raise ChainError("sum-rate bound needs a semi-orthogonal channel with Y = (YR, YS)")
    j = split_variable(joint, "Y")
    # the factorization p(yR|x3) p(yS,y3|x1,x2), checked on the joint's support
    leak = conditional_mutual_information(j, "YR", ("X1", "X2", "YS", "Y3"), "X3")
    leak += conditional_mutual_information(j, ("YS", "Y3"), "X3", ("X1", "X2"))
    if leak > MARKOV_TOL:
        raise ChainError(f"channel is not semi-orthogonal on this joint (leak {leak:.3g})")
    dep = conditional_mutual_information(j, "X1", "X2") + conditional_mutual_information(j, ("X1", "X2"), "X3")
    if dep > MARKOV_TOL:
        raise ChainError(f"sum-rate bound needs product inputs p(x1)p(x2)p(x3); dependence {dep:.3g}")
    first = conditional_mutual_information(j, ("X1", "X2"), ("Y3", "YS"))
    second = conditional_mutual_information(j, "X3", "YR") + conditional_mutual_information(j, ("X1", "X2"), "YS")
    return first, second


def somarc_sum_bound(joint: JointPmf) -> float:
    """min{ I(X1,X2;Y3,YS), I(X3;YR) + I(X1,X2;YS) } for a product-input joint."""
    return min(somarc_terms(joint))


def check(joint: JointPmf, scheme) -> ConditionReport:
    """Dispatch by scheme name."""
    scheme = Scheme(scheme)
    if scheme is Scheme.THM1:
        return check_thm1(joint)
    if scheme is Scheme.THM2:
        return check_thm2(joint)
    if scheme is Scheme.SEPARATION:
        return check_separation(joint)
    if scheme is Scheme.MAC_COVER:
        return check_mac_cover(joint)
    if scheme is Scheme.CRBC_9:
        return check_crbc(joint, "eq9")
    if scheme is Scheme.CRBC_10:
        return check_crbc(joint, "eq10")
    raise ValueError(f"scheme {scheme.value!r} has no condition set")

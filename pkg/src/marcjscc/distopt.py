"""Search over factorized input distributions.

A chain family is flattened into a list of simplex blocks, one per
conditional-pmf row. ``optimize`` runs multi-start projected ascent with
finite-difference gradients; ``grid_scan`` is the exhaustive oracle.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .feasibility import check_thm1, check_thm2, somarc_terms
from .network import (
    ChannelModel,
    InputChainIndependent,
    InputChainSeparation,
    InputChainThm1,
    InputChainThm2,
    SourceModel,
    assemble_joint,
)

FD_STEP = 1e-5
MIN_STEP = 1e-8
INITIAL_STEP = 0.25
GRID_CAP = 10**7
VERTEX_CAP = 64


class Family(str, Enum):
    THM1 = "thm1"
    THM2 = "thm2"
    SEPARATION = "separation"
    PRODUCT = "product"


class Objective(str, Enum):
    MIN_MARGIN_THM1 = "min_margin_thm1"
    MIN_MARGIN_THM2 = "min_margin_thm2"
    SOMARC_BOUND = "somarc_bound"


COMPATIBLE = {
    Objective.MIN_MARGIN_THM1: {Family.THM1, Family.SEPARATION},
    Objective.MIN_MARGIN_THM2: {Family.THM2},
    Objective.SOMARC_BOUND: {Family.PRODUCT},
}


class IncompatibleFamily(ValueError):
    pass


class GridTooLarge(ValueError):
    pass


class NonFiniteObjective(ArithmeticError):
    pass


@dataclass(frozen=True)
class Scenario:
    source: SourceModel
    channel: ChannelModel
    v_sizes: tuple[int, int] = (2, 2)
    name: str = ""


@dataclass(frozen=True)
class ParamChain:
    family: Family
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        for b in self.blocks:
            if abs(b.sum() - 1.0) > 1e-12 or b.min() < 0:
                raise ValueError(f"block {b} is off the simplex")

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks) if self.blocks else np.zeros(0)


@dataclass
class OptResult:
    best_chain: ParamChain
    best_value_bits: float
    trace: list[float] = field(default_factory=list)
    evaluations: int = 0
    objective: Objective | None = None

    @property
    def envelope(self) -> list[float]:
        """Running best over restarts."""
        return list(np.maximum.accumulate(self.trace)) if self.trace else []


def layout(family: Family, scenario: Scenario) -> list[tuple[str, tuple[int, ...], int]]:
    """(factor name, conditioning shape, output size) in block order."""
    src, ch = scenario.source, scenario.channel
    n1, n2 = src.var("S1").alphabet_size, src.var("S2").alphabet_size
    x1, x2, x3 = ch.input_sizes
    v1, v2 = scenario.v_sizes
    family = Family(family)
    if family is Family.THM2:
        return [("x1|s1", (n1,), x1), ("x2|s2", (n2,), x2), ("x3|s1s2", (n1, n2), x3)]
    if family is Family.THM1:
        return [("v1", (), v1), ("x1|s1v1", (n1, v1), x1), ("v2", (), v2), ("x2|s2v2", (n2, v2), x2), ("x3|v1v2", (v1, v2), x3)]
    if family is Family.SEPARATION:
        return [("v1", (), v1), ("x1|v1", (v1,), x1), ("v2", (), v2), ("x2|v2", (v2,), x2), ("x3|v1v2", (v1, v2), x3)]
    return [("x1", (), x1), ("x2", (), x2), ("x3", (), x3)]


def block_sizes(family, scenario) -> list[int]:
    return [size for _, shape, size in layout(family, scenario) for _ in range(math.prod(shape))]


def to_chain(param: ParamChain, scenario: Scenario):
    """Turn flat simplex blocks into the corresponding InputChain."""
    tables = []
    it = iter(param.blocks)
    for _, shape, size in layout(param.family, scenario):
        rows = [next(it) for _ in range(math.prod(shape))]
        tables.append(np.array(rows).reshape(shape + (size,)))
    fam = param.family
    if fam is Family.THM2:
        return InputChainThm2(*tables)
    if fam is Family.THM1:
        return InputChainThm1(*tables)
    if fam is Family.SEPARATION:
        return InputChainSeparation(*tables)
    return InputChainIndependent.product(*tables)


def objective_terms(param: ParamChain, scenario: Scenario, objective) -> np.ndarray:
    """Vector whose minimum is the objective value (margins or cut values)."""
    objective = Objective(objective)
    joint = assemble_joint(scenario.source, to_chain(param, scenario), scenario.channel)
    if objective is Objective.SOMARC_BOUND:
        terms = np.array(somarc_terms(joint))
    elif objective is Objective.MIN_MARGIN_THM1:
        terms = np.array(check_thm1(joint).margins)
    else:
        terms = np.array(check_thm2(joint).margins)
    if not np.all(np.isfinite(terms)):
        raise NonFiniteObjective(f"objective terms {terms} are not finite")
    return terms


def evaluate_objective(param: ParamChain, scenario: Scenario, objective) -> float:
    return float(objective_terms(param, scenario, objective).min())


def _check_family(objective, family):
    objective, family = Objective(objective), Family(family)
    if family not in COMPATIBLE[objective]:
        raise IncompatibleFamily(f"family {family.value} cannot be used with objective {objective.value}")
    return objective, family


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    # one renormalization pass keeps the sum at 1 to machine precision
    return w / w.sum()


def _min_norm_combination(grads: np.ndarray, iters: int = 200) -> np.ndarray:
    """Minimum-norm point of the convex hull of the rows of ``grads``."""
    k = grads.shape[0]
    if k == 1:
        return grads[0]
    gram = grads @ grads.T
    lip = np.linalg.eigvalsh(gram)[-1]
    if lip <= 0:
        return grads[0]
    lam = np.full(k, 1.0 / k)
    for _ in range(iters):
        lam = project_simplex(lam - (gram @ lam) / lip)
    return lam @ grads


class _Evaluator:
    def __init__(self, scenario, objective, family, sizes):
        self.scenario, self.objective, self.family = scenario, objective, family
        self.sizes = sizes
        self.splits = np.cumsum(sizes)[:-1]
        self.count = 0

    def param(self, theta: np.ndarray) -> ParamChain:
        blocks = tuple(b / b.sum() for b in np.split(theta, self.splits)) if len(self.sizes) else ()
        return ParamChain(self.family, blocks)

    def terms(self, theta: np.ndarray) -> np.ndarray:
        self.count += 1
        return objective_terms(self.param(theta), self.scenario, self.objective)


def _ascend(ev: _Evaluator, theta: np.ndarray, iters: int) -> tuple[np.ndarray, float]:
    sizes = ev.sizes
    free = [i for i, k in enumerate(sizes) if k > 1]
    terms = ev.terms(theta)
    value = terms.min()
    if not free:
        return theta, value
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    coords = [j for b in free for j in range(offsets[b], offsets[b + 1])]
    step = INITIAL_STEP
    for _ in range(iters):
        grads = np.zeros((terms.size, theta.size))
        for j in coords:
            up = theta.copy()
            up[j] += FD_STEP
            t_up = ev.terms(up)
            if theta[j] >= FD_STEP:
                dn = theta.copy()
                dn[j] -= FD_STEP
                grads[:, j] = (t_up - ev.terms(dn)) / (2 * FD_STEP)
            else:
                grads[:, j] = (t_up - terms) / FD_STEP
        for b in free:
            sl = slice(offsets[b], offsets[b + 1])
            grads[:, sl] -= grads[:, sl].mean(axis=1, keepdims=True)
        norms = np.linalg.norm(grads, axis=1)
        slack = step * max(norms.max(), 1e-12)
        active = np.flatnonzero(terms <= value + slack)
        direction = _min_norm_combination(grads[active])
        dnorm = np.linalg.norm(direction)
        if dnorm < 1e-12:
            break
        improved = False
        while step >= MIN_STEP:
            cand = theta + step * direction / dnorm
            for b in free:
                sl = slice(offsets[b], offsets[b + 1])
                cand[sl] = project_simplex(cand[sl])
            cand_terms = ev.terms(cand)
            if cand_terms.min() > value:
                theta, terms, value = cand, cand_terms, cand_terms.min()
                step = min(step * 1.5, INITIAL_STEP)
                improved = True
                break
            step /= 2
        if not improved:
            break
    return theta, value


def _starts(sizes: Sequence[int], restarts: int, rng: np.random.Generator) -> list[np.ndarray]:
    starts = [np.concatenate([np.full(k, 1.0 / k) for k in sizes]) if sizes else np.zeros(0)]
    n_vertex = math.prod(sizes) if sizes else 1
    if n_vertex <= VERTEX_CAP:
        combos = list(itertools.product(*[range(k) for k in sizes]))
    else:
        combos = [tuple(int(rng.integers(k)) for k in sizes) for _ in range(restarts)]
    for combo in combos:
        starts.append(np.concatenate([np.eye(k)[c] for k, c in zip(sizes, combo)]) if sizes else np.zeros(0))
    for _ in range(restarts):
        starts.append(np.concatenate([rng.dirichlet(np.ones(k)) for k in sizes]) if sizes else np.zeros(0))
    return starts


def optimize(
    objective,
    scenario: Scenario,
    family,
    restarts: int = 6,
    iters: int = 150,
    seed: int = 0,
    workers: int = 1,
) -> OptResult:
    """Multi-start projected finite-difference ascent over a chain family."""
    objective, family = _check_family(objective, family)
    if restarts < 1 or iters < 1:
        raise ValueError("budget must be at least one restart and one iteration")
    sizes = block_sizes(family, scenario)
    rng = np.random.default_rng(seed)
    starts = _starts(sizes, restarts, rng)

    def run(theta):
        ev = _Evaluator(scenario, objective, family, sizes)
        best_theta, best = _ascend(ev, theta, iters)
        return best_theta, best, ev.count

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    trace = [float(v) for _, v, _ in results]
    best_idx = int(np.argmax(trace))  # first index wins ties
    ev = _Evaluator(scenario, objective, family, sizes)
    param = ev.param(results[best_idx][0])
    value = evaluate_objective(param, scenario, objective)
    return OptResult(param, value, trace, sum(c for _, _, c in results) + 1, objective)


def _compositions(total: int, parts: int):
    """All integer vectors of ``parts`` nonnegative entries summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_size(sizes: Sequence[int], step: float) -> int:
    m = _grid_resolution(step)
    return math.prod(math.comb(m + k - 1, k - 1) for k in sizes)


def _grid_resolution(step: float) -> int:
    m = round(1.0 / step)
    if m < 1 or abs(m * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} must divide 1")
    return m


def grid_scan(objective, scenario: Scenario, family, step: float = 0.05, cap: int = GRID_CAP) -> OptResult:
    """Exhaustive evaluation over the step-grid of every simplex block."""
    objective, family = _check_family(objective, family)
    sizes = block_sizes(family, scenario)
    total = grid_size(sizes, step)
    if total > cap:
        raise GridTooLarge(f"grid has {total} points, cap is {cap}")
    m = _grid_resolution(step)
    per_block = [[np.array(c, dtype=float) / m for c in _compositions(m, k)] for k in sizes]
    best_val, best_param, count = -np.inf, None, 0
    for combo in itertools.product(*per_block):
        param = ParamChain(family, tuple(combo))
        val = evaluate_objective(param, scenario, objective)
        count += 1
        if val > best_val:
            best_val, best_param = val, param
    return OptResult(best_param, float(best_val), [float(best_val)], count, objective)

"""Dense discrete probability tensors and exact information measures.

All quantities are in bits. A variable with a single-symbol alphabet stands
for an absent variable; it contributes nothing to any entropy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-12
RENORM_TOL = 1e-9
MI_CLAMP = 1e-12


class PmfError(ValueError):
    """Invalid probability table (negative entries, bad normalization, shape)."""


class VariableError(KeyError):
    """Unknown, duplicated or colliding variable names."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ZeroProbabilityEvent(ValueError):
    """Conditioning on an event of probability zero."""


class ConsistencyError(ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""


@dataclass(frozen=True)
class Variable:
    name: str
    alphabet_size: int
    labels: tuple | None = None
    # product variables (e.g. Y = (YR, YS)) keep their factors here, row-major
    components: tuple[Variable, ...] | None = None

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise VariableError(f"invalid variable name {self.name!r}")
        if int(self.alphabet_size) < 1:
            raise PmfError(f"{self.name}: alphabet_size must be >= 1")
        object.__setattr__(self, "alphabet_size", int(self.alphabet_size))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.alphabet_size:
                raise PmfError(f"{self.name}: {len(labels)} labels for alphabet of size {self.alphabet_size}")
            object.__setattr__(self, "labels", labels)
        if self.components is not None:
            comps = tuple(self.components)
            if int(np.prod([c.alphabet_size for c in comps])) != self.alphabet_size:
                raise PmfError(f"{self.name}: component sizes do not multiply to {self.alphabet_size}")
            object.__setattr__(self, "components", comps)

    @property
    def absent(self) -> bool:
        return self.alphabet_size == 1

    def index(self, symbol) -> int:
        """Map a label (or an integer index) to its position in the alphabet."""
        if self.labels is not None and symbol in self.labels:
            return self.labels.index(symbol)
        if isinstance(symbol, (int, np.integer)) and 0 <= symbol < self.alphabet_size:
            return int(symbol)
        raise PmfError(f"{self.name}: symbol {symbol!r} not in alphabet")


def _names(vars_or_names) -> tuple[str, ...]:
    if isinstance(vars_or_names, (str, Variable)):
        vars_or_names = [vars_or_names]
    return tuple(v.name if isinstance(v, Variable) else v for v in vars_or_names)


def _check_unique(variables: Sequence[Variable]):
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise VariableError(f"duplicate variable names in {names}")


def _validated(probs: np.ndarray, what: str, axes=None) -> np.ndarray:
    """Check nonnegativity and normalization; fix tiny drift only."""
    if not np.all(np.isfinite(probs)):
        raise PmfError(f"{what}: non-finite entries")
    if np.any(probs < 0):
        if probs.min() < -SUM_TOL:
            raise PmfError(f"{what}: negative entry {probs.min():.3g}")
        probs = np.where(probs < 0, 0.0, probs)
    total = probs.sum(axis=axes, keepdims=axes is not None)
    drift = np.max(np.abs(total - 1.0))
    if drift > RENORM_TOL:
        raise PmfError(f"{what}: probabilities sum to {np.ravel(total)[np.argmax(np.abs(np.ravel(total) - 1))]!r}, not 1")
    if drift > 0:
        probs = probs / total
    return probs


class JointPmf:
    """Immutable dense joint pmf over an ordered list of named variables."""

    __slots__ = ("variables", "probs", "_axis", "_hcache", "_core", "_core_axis")

    def __init__(self, variables: Sequence[Variable], probs, *, _trusted: bool = False):
        variables = tuple(variables)
        _check_unique(variables)
        probs = np.asarray(probs, dtype=float)
        shape = tuple(v.alphabet_size for v in variables)
        if probs.shape != shape:
            if probs.size == int(np.prod(shape, dtype=np.int64)):
                probs = probs.reshape(shape)
            else:
                raise PmfError(f"table of shape {probs.shape} does not match alphabets {shape}")
        if not _trusted:
            probs = _validated(probs, "JointPmf")
        probs = np.array(probs, dtype=float)
        probs.setflags(write=False)
        self.variables = variables
        self.probs = probs
        self._axis = {v.name: i for i, v in enumerate(variables)}
        self._hcache: dict = {}
        # singleton axes dropped: reductions over fewer axes are cheaper
        self._core = probs.reshape([s for s in shape if s > 1])
        big = [v.name for v in variables if v.alphabet_size > 1]
        self._core_axis = {name: j for j, name in enumerate(big)}

    def __repr__(self):
        desc = ", ".join(f"{v.name}:{v.alphabet_size}" for v in self.variables)
        return f"JointPmf({desc})"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def var(self, name: str) -> Variable:
        return self.variables[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._axis[name]
        except KeyError:
            raise VariableError(f"unknown variable {name!r}; have {self.names}") from None

    def __contains__(self, name) -> bool:
        return name in self._axis

    def _axes(self, names) -> tuple[int, ...]:
        return tuple(sorted({self.axis(n) for n in _names(names)}))

    def entropy(self, names=()) -> float:
        """Joint entropy of the listed variables (all of them when names is None)."""
        key = self.names if names is None else (names if type(names) is tuple else _names(names))
        cache = self._hcache
        h = cache.get(key)
        if h is not None:
            return h
        for n in key:
            if n not in self._axis:
                raise VariableError(f"unknown variable {n!r}; have {self.names}")
        ca = self._core_axis
        keep = frozenset(ca[n] for n in key if n in ca)
        h = cache.get(keep)
        if h is None:
            core = self._core
            drop = tuple(i for i in range(core.ndim) if i not in keep)
            p = core.sum(axis=drop) if drop else core
            p = p[p > 0]
            h = float(-np.dot(p, np.log2(p)))
            cache[keep] = h
        cache[key] = h
        return h

    def prob(self, **assignment) -> float:
        """Probability of an event given as name=symbol keyword pairs."""
        m = marginalize(self, list(assignment))
        idx = tuple(m.var(n).index(s) for n, s in zip(m.names, (assignment[n] for n in m.names)))
        return float(m.probs[idx])

    def relabel(self, mapping: Mapping[str, str]) -> JointPmf:
        new = [Variable(mapping.get(v.name, v.name), v.alphabet_size, v.labels, v.components) for v in self.variables]
        return JointPmf(new, self.probs, _trusted=True)

    def reorder(self, names: Sequence[str]) -> JointPmf:
        """Permute axes into the given order (must name every variable)."""
        names = _names(names)
        if sorted(names) != sorted(self.names):
            raise VariableError(f"reorder needs a permutation of {self.names}, got {names}")
        perm = [self.axis(n) for n in names]
        return JointPmf([self.variables[i] for i in perm], np.transpose(self.probs, perm), _trusted=True)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw i.i.d. symbol tuples; returns an int array of shape (size, nvars)."""
        flat = self.probs.ravel()
        cdf = np.cumsum(flat)
        u = rng.random(size) * cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), flat.size - 1)
        # roundoff at the top of the cdf must not land on a zero-mass cell
        last = int(np.flatnonzero(flat)[-1])
        idx = np.minimum(idx, last)
        return np.stack(np.unravel_index(idx, self.probs.shape), axis=1)


def pmf_from_table(variables: Sequence[Variable], entries: Iterable) -> JointPmf:
    """Build a pmf from (symbol-tuple, probability) pairs; unlisted tuples get 0."""
    variables = tuple(variables)
    probs = np.zeros(tuple(v.alphabet_size for v in variables))
    for symbols, p in entries:
        symbols = tuple(symbols) if isinstance(symbols, (list, tuple)) else (symbols,)
        if len(symbols) != len(variables):
            raise PmfError(f"entry {symbols} has {len(symbols)} symbols, expected {len(variables)}")
        idx = tuple(v.index(s) for v, s in zip(variables, symbols))
        probs[idx] += float(p)
    return JointPmf(variables, probs)


def uniform(*variables: Variable) -> JointPmf:
    shape = tuple(v.alphabet_size for v in variables)
    return JointPmf(variables, np.full(shape, 1.0 / int(np.prod(shape))))


def point_mass(variables: Sequence[Variable], symbols: Sequence) -> JointPmf:
    return pmf_from_table(variables, [(tuple(symbols), 1.0)])


class Kernel:
    """Conditional pmf p(outputs | given), stored as a dense table.

    ``table`` has the given alphabets as leading axes and the output
    alphabets as trailing axes; every row sums to one.
    """

    __slots__ = ("given_vars", "output_vars", "table")

    def __init__(self, given_vars: Sequence[Variable], output_vars: Sequence[Variable], table, *, _trusted=False):
        given_vars, output_vars = tuple(given_vars), tuple(output_vars)
        _check_unique(given_vars + output_vars)
        if not output_vars:
            raise VariableError("kernel needs at least one output variable")
        table = np.asarray(table, dtype=float)
        shape = tuple(v.alphabet_size for v in given_vars + output_vars)
        if table.shape != shape:
            if table.size == int(np.prod(shape, dtype=np.int64)):
                table = table.reshape(shape)
            else:
                raise PmfError(f"kernel table of shape {table.shape} does not match {shape}")
        if not _trusted:
            out_axes = tuple(range(len(given_vars), len(shape)))
            table = _validated(table, "Kernel row", axes=out_axes)
        table = np.array(table, dtype=float)
        table.setflags(write=False)
        self.given_vars = given_vars
        self.output_vars = output_vars
        self.table = table

    def __repr__(self):
        g = ",".join(v.name for v in self.given_vars)
        o = ",".join(v.name for v in self.output_vars)
        return f"Kernel(p({o}|{g}))"

    @property
    def given_names(self):
        return tuple(v.name for v in self.given_vars)

    @property
    def output_names(self):
        return tuple(v.name for v in self.output_vars)

    def rows(self) -> np.ndarray:
        """Table reshaped to (#given tuples, #output tuples)."""
        ng = int(np.prod([v.alphabet_size for v in self.given_vars], dtype=np.int64))
        return self.table.reshape(ng, -1)

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((self.table == 0) | (self.table == 1)))


def kernel_from_table(given_vars, output_vars, entries) -> Kernel:
    """Build a kernel from (given-tuple, output-tuple, probability) triples."""
    given_vars, output_vars = tuple(given_vars), tuple(output_vars)
    table = np.zeros(tuple(v.alphabet_size for v in given_vars + output_vars))
    for g, o, p in entries:
        g = tuple(g) if isinstance(g, (list, tuple)) else (g,)
        o = tuple(o) if isinstance(o, (list, tuple)) else (o,)
        if len(g) != len(given_vars) or len(o) != len(output_vars):
            raise PmfError(f"kernel entry {g}->{o} has the wrong arity")
        idx = tuple(v.index(s) for v, s in zip(given_vars + output_vars, g + o))
        table[idx] += float(p)
    return Kernel(given_vars, output_vars, table)


def marginalize(pmf: JointPmf, keep) -> JointPmf:
    """Sum out every variable not in ``keep``; kept variables stay in pmf order."""
    axes = pmf._axes(keep)
    drop = tuple(i for i in range(len(pmf.variables)) if i not in axes)
    if not drop:
        return pmf
    return JointPmf([pmf.variables[i] for i in axes], pmf.probs.sum(axis=drop), _trusted=True)


def compose(base: JointPmf, kernel: Kernel) -> JointPmf:
    """Joint of ``base`` extended by ``kernel``: p(b) * p(out | given part of b)."""
    for v in kernel.output_vars:
        if v.name in base:
            raise VariableError(f"kernel output {v.name!r} already present in base pmf")
    for v in kernel.given_vars:
        if base.var(v.name).alphabet_size != v.alphabet_size:
            raise PmfError(
                f"{v.name}: kernel expects alphabet {v.alphabet_size}, base has {base.var(v.name).alphabet_size}"
            )
    ng = len(kernel.given_vars)
    base_axes = [base.axis(v.name) for v in kernel.given_vars]
    # permute kernel given-axes into base order, then pad singleton axes
    order = np.argsort(base_axes)
    table = np.transpose(kernel.table, list(order) + list(range(ng, kernel.table.ndim)))
    shape = [1] * len(base.variables)
    for a in base_axes:
        shape[a] = base.variables[a].alphabet_size
    table = table.reshape(shape + [v.alphabet_size for v in kernel.output_vars])
    probs = base.probs.reshape(base.probs.shape + (1,) * len(kernel.output_vars)) * table
    return JointPmf(base.variables + kernel.output_vars, probs, _trusted=True)


def product(*pmfs: JointPmf) -> JointPmf:
    """Independent product of pmfs over disjoint variables."""
    out = pmfs[0]
    for p in pmfs[1:]:
        out = compose(out, Kernel((), p.variables, p.probs, _trusted=True))
    return out


def condition_on_event(pmf: JointPmf, assignments) -> JointPmf:
    """Renormalized pmf of the remaining variables given name=symbol assignments."""
    assignments = dict(assignments)
    index = [slice(None)] * len(pmf.variables)
    for name, sym in assignments.items():
        index[pmf.axis(name)] = pmf.var(name).index(sym)
    sub = pmf.probs[tuple(index)]
    mass = float(sub.sum())
    if mass <= 0.0:
        raise ZeroProbabilityEvent(f"event {assignments} has probability zero")
    rest = [v for v in pmf.variables if v.name not in assignments]
    if not rest:
        raise VariableError("conditioning on every variable leaves nothing")
    return JointPmf(rest, sub / mass, _trusted=True)


def split_variable(pmf: JointPmf, name: str) -> JointPmf:
    """Replace a product variable by its component variables (row-major)."""
    v = pmf.var(name)
    if v.components is None:
        raise VariableError(f"{name!r} has no components to split")
    ax = pmf.axis(name)
    new_vars = pmf.variables[:ax] + v.components + pmf.variables[ax + 1:]
    shape = pmf.probs.shape[:ax] + tuple(c.alphabet_size for c in v.components) + pmf.probs.shape[ax + 1:]
    return JointPmf(new_vars, pmf.probs.reshape(shape), _trusted=True)


def _disjoint(*groups):
    seen: set = set()
    for g in groups:
        if seen & set(g):
            raise VariableError(f"variable sets overlap: {sorted(seen & set(g))}")
        seen |= set(g)


def entropy(pmf: JointPmf, names=None) -> float:
    """H(names) in bits; all variables when ``names`` is None."""
    return pmf.entropy(names)


def conditional_entropy(pmf: JointPmf, targets, given=()) -> float:
    """H(targets | given) in bits, 0 log 0 = 0."""
    t, g = _names(targets), _names(given)
    _disjoint(t, g)
    h = pmf.entropy(t + g) - pmf.entropy(g)
    return _clamp(h, f"H({','.join(t)}|{','.join(g)})")


def conditional_mutual_information(pmf: JointPmf, a, b, c=()) -> float:
    """I(A;B|C) in bits."""
    a, b, c = _names(a), _names(b), _names(c)
    _disjoint(a, b, c)
    i = pmf.entropy(a + c) + pmf.entropy(b + c) - pmf.entropy(a + b + c) - pmf.entropy(c)
    return _clamp(i, f"I({','.join(a)};{','.join(b)}|{','.join(c)})")


def mutual_information(pmf: JointPmf, a, b) -> float:
    return conditional_mutual_information(pmf, a, b, ())


def _clamp(value: float, what: str) -> float:
    if value < 0.0:
        if value < -MI_CLAMP:
            raise ConsistencyError(f"{what} = {value!r} < 0")
        return 0.0
    return value

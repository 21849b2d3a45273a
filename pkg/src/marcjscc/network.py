"""Sources, channels and input-distribution chains for MARC-type networks.

Every assembled joint lives on the canonical variable list
``S1 S2 W W3 V1 V2 X1 X2 X3 Y Y3``. Absent variables (a source that does
not exist, missing side information, a silent relay) are singletons, so
MARC, MABRC, CRBC and MAC instances share one code path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .infotheory import (
    JointPmf,
    Kernel,
    PmfError,
    Variable,
    VariableError,
    compose,
    conditional_mutual_information,
    marginalize,
    pmf_from_table,
)

CANONICAL_ORDER = ("S1", "S2", "W", "W3", "V1", "V2", "X1", "X2", "X3", "Y", "Y3")
SOURCE_VARS = ("S1", "S2", "W", "W3")
INPUT_VARS = ("X1", "X2", "X3")
OUTPUT_VARS = ("Y", "Y3")
SOMARC_TOL = 1e-12
MARKOV_TOL = 1e-10


class ChainError(ValueError):
    """A chain factor does not fit the source/channel it is combined with."""


def singleton(name: str) -> Variable:
    return Variable(name, 1)


@dataclass(frozen=True)
class SourceModel:
    pmf: JointPmf

    def __post_init__(self):
        if sorted(self.pmf.names) != sorted(SOURCE_VARS):
            raise VariableError(f"source pmf must be over {SOURCE_VARS}, got {self.pmf.names}")
        object.__setattr__(self, "pmf", self.pmf.reorder(SOURCE_VARS))

    def var(self, name: str) -> Variable:
        return self.pmf.var(name)

    @classmethod
    def from_table(cls, sizes: Mapping[str, int], entries) -> SourceModel:
        """Source from {name: size} (missing roles are absent) and (s1,s2,w,w3) entries."""
        unknown = set(sizes) - set(SOURCE_VARS)
        if unknown:
            raise VariableError(f"unknown source variables {sorted(unknown)}")
        variables = [Variable(n, sizes.get(n, 1)) for n in SOURCE_VARS]
        return cls(pmf_from_table(variables, entries))

    @classmethod
    def from_pair(cls, p_s1s2) -> SourceModel:
        """Source pair without side information from a |S1| x |S2| array."""
        p = np.asarray(p_s1s2, dtype=float)
        variables = [Variable("S1", p.shape[0]), Variable("S2", p.shape[1]), singleton("W"), singleton("W3")]
        return cls(JointPmf(variables, p.reshape(p.shape + (1, 1))))


@dataclass(frozen=True)
class ChannelModel:
    """Memoryless kernel p(y, y3 | x1, x2, x3).

    With ``somarc=True`` the destination output must be a product variable
    with components ``YR`` and ``YS`` and the kernel must factor as
    p(yR|x3) p(yS,y3|x1,x2).
    """

    kernel: Kernel
    somarc: bool = False

    def __post_init__(self):
        if self.kernel.given_names != INPUT_VARS or self.kernel.output_names != OUTPUT_VARS:
            raise VariableError(
                f"channel kernel must be p(Y,Y3|X1,X2,X3), got {self.kernel!r}"
            )
        if self.somarc:
            somarc_factors(self)

    def var(self, name: str) -> Variable:
        for v in self.kernel.given_vars + self.kernel.output_vars:
            if v.name == name:
                return v
        raise VariableError(name)

    @property
    def input_sizes(self) -> tuple[int, int, int]:
        return tuple(v.alphabet_size for v in self.kernel.given_vars)

    def sample(self, rng: np.random.Generator, x1, x2, x3) -> tuple[np.ndarray, np.ndarray]:
        """Pass letter sequences through the channel; returns (y, y3)."""
        rows = self.kernel.rows()
        s1, s2, s3 = self.input_sizes
        r = (np.asarray(x1) * s2 + np.asarray(x2)) * s3 + np.asarray(x3)
        cdf = np.cumsum(rows, axis=1)
        u = rng.random(r.shape)
        out = (u[..., None] >= cdf[r]).sum(axis=-1)
        out = np.minimum(out, rows.shape[1] - 1)
        ny3 = self.var("Y3").alphabet_size
        return out // ny3, out % ny3


def somarc_factors(channel: ChannelModel) -> tuple[np.ndarray, np.ndarray]:
    """Return (p(yR|x3), p(yS,y3|x1,x2)), verifying the factorization to 1e-12."""
    y = channel.var("Y")
    names = tuple(c.name for c in y.components) if y.components else ()
    if names != ("YR", "YS"):
        raise ChainError("semi-orthogonal channel needs Y with components (YR, YS)")
    nyr, nys = (c.alphabet_size for c in y.components)
    t = channel.kernel.table  # x1 x2 x3 y y3
    n1, n2, n3 = channel.input_sizes
    t = t.reshape(n1, n2, n3, nyr, nys, t.shape[-1])
    p_yr = t.sum(axis=(4, 5))  # x1 x2 x3 yr
    p_ysy3 = t.sum(axis=3)  # x1 x2 x3 ys y3
    ref_yr = p_yr[0, 0]
    ref_ys = p_ysy3[:, :, 0]
    if np.max(np.abs(p_yr - ref_yr)) > SOMARC_TOL or np.max(np.abs(p_ysy3 - ref_ys[:, :, None])) > SOMARC_TOL:
        raise ChainError("channel is not semi-orthogonal: marginals depend on the wrong inputs")
    rebuilt = ref_yr[None, None, :, :, None, None] * ref_ys[:, :, None, None, :, :]
    if np.max(np.abs(rebuilt - t)) > SOMARC_TOL:
        raise ChainError("channel does not factor as p(yR|x3) p(yS,y3|x1,x2)")
    return ref_yr, ref_ys


def deterministic_channel(
    inputs: Mapping[str, int],
    outputs: Mapping[str, Union[int, Mapping[str, int]]],
    fn: Callable[..., Mapping[str, int]],
    *,
    somarc: bool = False,
) -> ChannelModel:
    """Channel whose outputs are functions of the inputs.

    ``outputs`` maps ``Y``/``Y3`` to a size or to an ordered {component: size}
    dict; ``fn(x1, x2, x3)`` returns a dict giving a symbol for every output
    (or every component). Missing input names are singletons.
    """
    in_vars = [Variable(n, inputs.get(n, 1)) for n in INPUT_VARS]
    out_vars, slots = [], []
    for name in OUTPUT_VARS:
        spec = outputs.get(name, 1)
        if isinstance(spec, Mapping):
            comps = tuple(Variable(c, s) for c, s in spec.items())
            size = int(np.prod([c.alphabet_size for c in comps]))
            out_vars.append(Variable(name, size, components=comps))
            slots.append([(c.name, c.alphabet_size) for c in comps])
        else:
            out_vars.append(Variable(name, int(spec)))
            slots.append([(name, int(spec))])
    table = np.zeros([v.alphabet_size for v in in_vars + out_vars])
    for x in np.ndindex(*(v.alphabet_size for v in in_vars)):
        result = fn(*x)
        idx = []
        for slot in slots:
            flat = 0
            for cname, csize in slot:
                sym = int(result.get(cname, 0)) if csize > 1 or cname in result else 0
                if not 0 <= sym < csize:
                    raise PmfError(f"output {cname}={sym} outside alphabet of size {csize} at input {x}")
                flat = flat * csize + sym
            idx.append(flat)
        table[x + tuple(idx)] = 1.0
    return ChannelModel(Kernel(in_vars, out_vars, table), somarc=somarc)


def somarc_example() -> tuple[SourceModel, ChannelModel]:
    """Binary semi-orthogonal MARC with YR = X3, Y3 = X1 xor X2, YS = X1 + X2,
    and the pair source uniform on {(0,0), (0,1), (1,1)}."""
    source = SourceModel.from_table({"S1": 2, "S2": 2}, [((0, 0, 0, 0), 1 / 3), ((0, 1, 0, 0), 1 / 3), ((1, 1, 0, 0), 1 / 3)])
    channel = deterministic_channel(
        {"X1": 2, "X2": 2, "X3": 2},
        {"Y": {"YR": 2, "YS": 3}, "Y3": 2},
        lambda x1, x2, x3: {"YR": x3, "YS": x1 + x2, "Y3": x1 ^ x2},
        somarc=True,
    )
    return source, channel


def crbc_specialize(source: SourceModel, channel: ChannelModel) -> tuple[SourceModel, ChannelModel]:
    """Drop the second transmitter: S2 and X2 become singletons.

    The source keeps the S2-marginal-free part; the channel keeps its
    behaviour at X2 = 0.
    """
    p = source.pmf
    s2 = p.axis("S2")
    probs = p.probs.sum(axis=s2, keepdims=True)
    new_source = SourceModel(JointPmf([v if v.name != "S2" else singleton("S2") for v in p.variables], probs))
    k = channel.kernel
    table = k.table[:, :1]
    given = (k.given_vars[0], singleton("X2"), k.given_vars[2])
    somarc = channel.somarc
    return new_source, ChannelModel(Kernel(given, k.output_vars, table, _trusted=True), somarc=somarc)


# ---------------------------------------------------------------- chains


def _k(given: Sequence[Variable], out: Variable, table) -> Kernel:
    return Kernel(given, (out,), table)


def _as_var(name: str, size: int) -> Variable:
    return Variable(name, size)


@dataclass(frozen=True)
class InputChainThm2:
    """p(x1|s1) p(x2|s2) p(x3|s1,s2); tables indexed [given..., output]."""

    p_x1_given_s1: np.ndarray
    p_x2_given_s2: np.ndarray
    p_x3_given_s1s2: np.ndarray
    family = "thm2"

    def kernels(self, src: SourceModel) -> list[Kernel]:
        s1, s2 = src.var("S1"), src.var("S2")
        x1 = _as_var("X1", np.shape(self.p_x1_given_s1)[-1])
        x2 = _as_var("X2", np.shape(self.p_x2_given_s2)[-1])
        x3 = _as_var("X3", np.shape(self.p_x3_given_s1s2)[-1])
        return [
            Kernel((), (singleton("V1"),), [1.0]),
            Kernel((), (singleton("V2"),), [1.0]),
            _k([s1], x1, self.p_x1_given_s1),
            _k([s2], x2, self.p_x2_given_s2),
            _k([s1, s2], x3, self.p_x3_given_s1s2),
        ]


@dataclass(frozen=True)
class InputChainThm1:
    """p(v1) p(x1|s1,v1) p(v2) p(x2|s2,v2) p(x3|v1,v2)."""

    p_v1: np.ndarray
    p_x1_given_s1v1: np.ndarray
    p_v2: np.ndarray
    p_x2_given_s2v2: np.ndarray
    p_x3_given_v1v2: np.ndarray
    family = "thm1"

    def kernels(self, src: SourceModel) -> list[Kernel]:
        s1, s2 = src.var("S1"), src.var("S2")
        v1 = _as_var("V1", len(self.p_v1))
        v2 = _as_var("V2", len(self.p_v2))
        x1 = _as_var("X1", np.shape(self.p_x1_given_s1v1)[-1])
        x2 = _as_var("X2", np.shape(self.p_x2_given_s2v2)[-1])
        x3 = _as_var("X3", np.shape(self.p_x3_given_v1v2)[-1])
        return [
            Kernel((), (v1,), self.p_v1),
            Kernel((), (v2,), self.p_v2),
            _k([s1, v1], x1, self.p_x1_given_s1v1),
            _k([s2, v2], x2, self.p_x2_given_s2v2),
            _k([v1, v2], x3, self.p_x3_given_v1v2),
        ]


@dataclass(frozen=True)
class InputChainSeparation:
    """p(v1) p(x1|v1) p(v2) p(x2|v2) p(x3|v1,v2): inputs ignore the sources."""

    p_v1: np.ndarray
    p_x1_given_v1: np.ndarray
    p_v2: np.ndarray
    p_x2_given_v2: np.ndarray
    p_x3_given_v1v2: np.ndarray
    family = "separation"

    def kernels(self, src: SourceModel) -> list[Kernel]:
        v1 = _as_var("V1", len(self.p_v1))
        v2 = _as_var("V2", len(self.p_v2))
        x1 = _as_var("X1", np.shape(self.p_x1_given_v1)[-1])
        x2 = _as_var("X2", np.shape(self.p_x2_given_v2)[-1])
        x3 = _as_var("X3", np.shape(self.p_x3_given_v1v2)[-1])
        return [
            Kernel((), (v1,), self.p_v1),
            Kernel((), (v2,), self.p_v2),
            _k([v1], x1, self.p_x1_given_v1),
            _k([v2], x2, self.p_x2_given_v2),
            _k([v1, v2], x3, self.p_x3_given_v1v2),
        ]


@dataclass(frozen=True)
class InputChainIndependent:
    """Inputs drawn from p(x1,x2,x3), independent of the sources.

    Covers the product inputs of the sum-capacity bound and the
    source-independent p(x1,x3) of the single-source relay conditions.
    """

    p_x1x2x3: np.ndarray
    family = "independent"

    def kernels(self, src: SourceModel) -> list[Kernel]:
        shape = np.shape(self.p_x1x2x3)
        xs = tuple(_as_var(n, s) for n, s in zip(INPUT_VARS, shape))
        return [
            Kernel((), (singleton("V1"),), [1.0]),
            Kernel((), (singleton("V2"),), [1.0]),
            Kernel((), xs, self.p_x1x2x3),
        ]

    @classmethod
    def product(cls, p_x1, p_x2, p_x3) -> InputChainIndependent:
        return cls(np.einsum("i,j,k->ijk", np.asarray(p_x1, float), np.asarray(p_x2, float), np.asarray(p_x3, float)))


InputChain = Union[InputChainThm1, InputChainThm2, InputChainSeparation, InputChainIndependent]


def assemble_joint(source: SourceModel, chain: InputChain, channel: ChannelModel) -> JointPmf:
    """Full joint over the canonical variables: source x chain x channel."""
    joint = source.pmf
    try:
        for k in chain.kernels(source):
            joint = compose(joint, k)
        for v in channel.kernel.given_vars:
            if joint.var(v.name).alphabet_size != v.alphabet_size:
                raise ChainError(
                    f"{v.name}: chain produces alphabet {joint.var(v.name).alphabet_size}, channel expects {v.alphabet_size}"
                )
        joint = compose(joint, channel.kernel)
    except PmfError as exc:
        raise ChainError(str(exc)) from exc
    return joint.reorder(CANONICAL_ORDER)


def identity_cpm_chain(source: SourceModel, x3_size: int = 1, x3_symbol: int = 0) -> InputChainThm2:
    """X1 = S1, X2 = S2 and a constant relay input."""
    n1, n2 = source.var("S1").alphabet_size, source.var("S2").alphabet_size
    x3 = np.zeros((n1, n2, x3_size))
    x3[:, :, x3_symbol] = 1.0
    return InputChainThm2(np.eye(n1), np.eye(n2), x3)


def constant_chain(source: SourceModel, sizes=(1, 1, 1)) -> InputChainThm2:
    n1, n2 = source.var("S1").alphabet_size, source.var("S2").alphabet_size
    tabs = []
    for given, size in (((n1,), sizes[0]), ((n2,), sizes[1]), ((n1, n2), sizes[2])):
        t = np.zeros(given + (size,))
        t[..., 0] = 1.0
        tabs.append(t)
    return InputChainThm2(*tabs)


def input_marginal_chain(joint: JointPmf) -> InputChainIndependent:
    """Source-independent chain with the same input marginal p(x1,x2,x3)."""
    return InputChainIndependent(np.array(marginalize(joint, INPUT_VARS).probs))


def channel_from_joint_check(joint: JointPmf) -> float:
    """I(S1,S2,W,W3,V1,V2; Y,Y3 | X1,X2,X3): zero for any assembled joint."""
    return conditional_mutual_information(joint, SOURCE_VARS + ("V1", "V2"), OUTPUT_VARS, INPUT_VARS)

"""Ready-made scenarios: the semi-orthogonal example and erasure networks for simulation."""
from __future__ import annotations

import numpy as np

from .infotheory import Kernel, Variable
from .network import (
    INPUT_VARS,
    ChannelModel,
    InputChainThm2,
    SourceModel,
    identity_cpm_chain,
    somarc_example,
)

# pair source uniform on {(0,0), (0,1), (1,1)}
SOMARC_PAIR = ((0, 0), (0, 1), (1, 1))


def erasure_channel(sizes, y_taps, y3_taps) -> ChannelModel:
    """Each output component copies one input (or a function of it) through an erasure channel.

    ``y_taps``/``y3_taps`` are lists of (input index 0..2, erasure prob) or
    (input index, erasure prob, symbol map). A component reading input i has
    alphabet |X_i| + 1 (or max(map) + 2); the last symbol is the erasure.
    All erasures are independent.
    """
    sizes = tuple(int(s) for s in sizes)
    table = np.ones(sizes)
    out_vars = []
    for name, taps in (("Y", y_taps), ("Y3", y3_taps)):
        comps = []
        for j, (i, e, *fmap) in enumerate(taps):
            fmap = np.asarray(fmap[0]) if fmap else np.arange(sizes[i])
            m = int(fmap.max()) + 1
            q = np.zeros((sizes[i], m + 1))
            q[np.arange(sizes[i]), fmap] = 1.0 - e
            q[:, -1] += e
            shape = [1] * table.ndim + [m + 1]
            shape[i] = sizes[i]
            table = table[..., None] * q.reshape(shape)
            comps.append(Variable(f"{name}_{j + 1}", m + 1))
        size = int(np.prod([c.alphabet_size for c in comps]))
        if comps:
            out_vars.append(Variable(name, size, components=tuple(comps)))
        else:
            table = table[..., None]
            out_vars.append(Variable(name, 1))
    in_vars = [Variable(n, s) for n, s in zip(INPUT_VARS, sizes)]
    table = table.reshape(sizes + tuple(v.alphabet_size for v in out_vars))
    return ChannelModel(Kernel(in_vars, out_vars, table))


def tagged_chain(source: SourceModel, tag: int = 4, x3_size: int = 1) -> InputChainThm2:
    """X_i = (S_i, U_i) with U_i uniform on ``tag`` symbols; symbol index s * tag + u.

    The S_i part makes the scheme correlation preserving, the uniform tag
    carries the bin index.
    """
    tabs = []
    for name in ("S1", "S2"):
        n = source.var(name).alphabet_size
        t = np.zeros((n, n * tag))
        for s in range(n):
            t[s, s * tag:(s + 1) * tag] = 1.0 / tag
        tabs.append(t)
    n1, n2 = source.var("S1").alphabet_size, source.var("S2").alphabet_size
    x3 = np.zeros((n1, n2, x3_size))
    x3[..., 0] = 1.0
    return InputChainThm2(tabs[0], tabs[1], x3)


def somarc_source(relay_knows_s2: bool = False) -> SourceModel:
    if relay_knows_s2:
        return SourceModel.from_table({"S1": 2, "S2": 2, "W3": 2}, [((a, b, 0, b), 1 / 3) for a, b in SOMARC_PAIR])
    return SourceModel.from_table({"S1": 2, "S2": 2}, [((a, b, 0, 0), 1 / 3) for a, b in SOMARC_PAIR])


def perfect_network(source: SourceModel, tag: int = 4):
    """Noiseless Y = (X1, X2, X3), Y3 = (X1, X2) with the tagged chain."""
    chain = tagged_chain(source, tag)
    sizes = (chain.p_x1_given_s1.shape[1], chain.p_x2_given_s2.shape[1], 1)
    channel = erasure_channel(sizes, [(0, 0.0), (1, 0.0), (2, 0.0)], [(0, 0.0), (1, 0.0)])
    return source, channel, chain


def erasure_scenario(kind: str = "feasible", erasure: float = 0.05, tag: int = 4):
    """Near-noiseless erasure network for the simulator trend experiment.

    Source: the three-point pair source with the relay observing S2.
    ``feasible``: both receivers see erased copies of X1 and X2.
    ``infeasible``: the destination only sees an erased copy of the S1
    part of X1, so the pair entropy exceeds what Y can carry.
    Returns (source, channel, chain, (R1, R2)).
    """
    source = somarc_source(relay_knows_s2=True)
    chain = tagged_chain(source, tag)
    sizes = (chain.p_x1_given_s1.shape[1], chain.p_x2_given_s2.shape[1], 1)
    y3 = [(0, erasure), (1, erasure)]
    if kind == "feasible":
        y = [(0, erasure), (1, erasure)]
    elif kind == "infeasible":
        y = [(0, erasure, np.arange(sizes[0]) // tag)]
    else:
        raise ValueError(f"unknown erasure scenario {kind!r}")
    return source, erasure_channel(sizes, y, y3), chain, (1.0, 0.0)


def somarc_eq3():
    """(source, channel) of the semi-orthogonal example, with the identity CPM chain."""
    source, channel = somarc_example()
    return source, channel, identity_cpm_chain(source, x3_size=2)

"""Scenario files: YAML documents describing a source, a channel, a chain and sim settings.

Layout (every section optional except where a command needs it)::

    preset: somarc-eq3            # start from a built-in scenario, then override
    source:
      variables: {S1: 2, S2: 2}   # W and W3 default to singletons
      pmf:                        # flat (symbols over S1 S2 W W3, probability) pairs
        - [[0, 0, 0, 0], 0.3333333333333333]
    channel:
      inputs: {X1: 2, X2: 2, X3: 2}
      outputs: {Y: {YR: 2, YS: 3}, Y3: 2}
      somarc: true
      deterministic:              # or `kernel: [[[x1,x2,x3], [y,y3], p], ...]`
        - [[0, 0, 0], {YR: 0, YS: 0, Y3: 0}]
    chain:
      family: thm2                # thm1 | thm2 | separation | independent
      factors:
        p_x1_given_s1: [[[0], [0], 1.0], [[1], [1], 1.0]]
    sim: {n: 10, blocks: 2, rate1: 1.0, rate2: 0.0, epsilon: 0.25, trials: 200}

Chains may instead name a preset (``cpm-identity``, ``tagged``) or ask for
``optimize: {objective: min_margin_thm2, family: thm2}``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import presets
from .infotheory import RENORM_TOL, JointPmf, Kernel, PmfError, Variable, VariableError
from .network import (
    INPUT_VARS,
    SOURCE_VARS,
    ChainError,
    ChannelModel,
    InputChainIndependent,
    InputChainSeparation,
    InputChainThm1,
    InputChainThm2,
    SourceModel,
    deterministic_channel,
    identity_cpm_chain,
    somarc_example,
)

# exit codes
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NORMALIZATION = 3
EXIT_SYNTAX = 4
EXIT_PRESET = 5
EXIT_SCHEMA = 6
EXIT_MISMATCH = 7
EXIT_BUDGET = 8
EXIT_NOT_FOUND = 9


class ScenarioError(Exception):
    exit_code = EXIT_SCHEMA

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class NormalizationError(ScenarioError):
    exit_code = EXIT_NORMALIZATION


class SyntaxProblem(ScenarioError):
    exit_code = EXIT_SYNTAX


class UnknownPreset(ScenarioError):
    exit_code = EXIT_PRESET


class ScenarioNotFound(ScenarioError):
    exit_code = EXIT_NOT_FOUND


# factor name -> (given roles, output roles), per chain family
FACTORS = {
    "thm2": {
        "p_x1_given_s1": (("S1",), ("X1",)),
        "p_x2_given_s2": (("S2",), ("X2",)),
        "p_x3_given_s1s2": (("S1", "S2"), ("X3",)),
    },
    "thm1": {
        "p_v1": ((), ("V1",)),
        "p_x1_given_s1v1": (("S1", "V1"), ("X1",)),
        "p_v2": ((), ("V2",)),
        "p_x2_given_s2v2": (("S2", "V2"), ("X2",)),
        "p_x3_given_v1v2": (("V1", "V2"), ("X3",)),
    },
    "separation": {
        "p_v1": ((), ("V1",)),
        "p_x1_given_v1": (("V1",), ("X1",)),
        "p_v2": ((), ("V2",)),
        "p_x2_given_v2": (("V2",), ("X2",)),
        "p_x3_given_v1v2": (("V1", "V2"), ("X3",)),
    },
    "independent": {"p_x1x2x3": ((), ("X1", "X2", "X3"))},
}
CHAIN_CLASSES = {
    "thm2": InputChainThm2,
    "thm1": InputChainThm1,
    "separation": InputChainSeparation,
    "independent": InputChainIndependent,
}

SCENARIO_PRESETS = ("somarc-eq3", "erasure-feasible", "erasure-infeasible", "perfect-somarc")


@dataclass
class ScenarioFile:
    name: str
    source: SourceModel
    channel: ChannelModel | None = None
    chain: Any = None
    chain_request: dict | None = None  # {"objective": ..., "family": ...} when the chain is to be optimized
    sim: dict = field(default_factory=dict)
    v_sizes: tuple[int, int] = (2, 2)
    raw: Any = None

    @property
    def digest(self) -> str:
        return scenario_digest(self.raw)


def scenario_digest(raw) -> str:
    """sha256 of the canonical JSON form; insensitive to key order."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# ------------------------------------------------------------------ helpers


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"missing field {key!r}", where)
    return d[key]


def _int(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioError(f"expected an integer, got {x!r}", where)
    return x


def _prob(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(f"expected a probability, got {x!r}", where)
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise NormalizationError(f"probability {x} is negative or not finite", where)
    return x


def _symbols(x, count, where) -> tuple[int, ...]:
    if isinstance(x, int) and not isinstance(x, bool):
        x = [x]
    if not isinstance(x, list) or len(x) != count:
        raise ScenarioError(f"expected {count} symbols, got {x!r}", where)
    return tuple(_int(s, where) for s in x)


def _fill(shape, entries, n_given, where) -> np.ndarray:
    """Dense table from [[given...], [out...], p] entries; rows over the trailing axes sum to 1."""
    if not isinstance(entries, list):
        raise ScenarioError("expected a list of entries", where)
    table = np.zeros(shape)
    for k, e in enumerate(entries):
        loc = f"{where}[{k}]"
        if not isinstance(e, list) or len(e) != 3:
            raise ScenarioError("entry must be [given symbols, output symbols, probability]", loc)
        idx = _symbols(e[0], n_given, loc) + _symbols(e[1], len(shape) - n_given, loc)
        if any(not 0 <= i < s for i, s in zip(idx, shape)):
            raise ScenarioError(f"symbol {idx} outside alphabet sizes {shape}", loc)
        table[idx] += _prob(e[2], loc)
    rows = table.reshape(int(np.prod(shape[:n_given], dtype=int)), -1).sum(axis=1)
    bad = np.flatnonzero(np.abs(rows - 1.0) > RENORM_TOL)
    if bad.size:
        given = np.unravel_index(bad[0], shape[:n_given]) if n_given else ()
        raise NormalizationError(f"row {tuple(int(g) for g in given)} sums to {rows[bad[0]]:.12g}", where)
    return table


# ----------------------------------------------------------------- sections


def parse_source(d, where="source") -> SourceModel:
    if not isinstance(d, dict):
        raise ScenarioError("expected a mapping", where)
    if "preset" in d:
        name = d["preset"]
        if name == "somarc-eq3":
            return somarc_example()[0]
        if name == "somarc-relay-s2":
            return presets.somarc_source(relay_knows_s2=True)
        raise UnknownPreset(f"unknown source preset {name!r}", where + ".preset")
    sizes = _need(d, "variables", where)
    if not isinstance(sizes, dict):
        raise ScenarioError("expected {name: size}", where + ".variables")
    for name, s in sizes.items():
        if name not in SOURCE_VARS:
            raise ScenarioError(f"unknown source variable {name!r}", where + ".variables")
        if _int(s, f"{where}.variables.{name}") < 1:
            raise ScenarioError("alphabet size must be >= 1", f"{where}.variables.{name}")
    shape = tuple(sizes.get(n, 1) for n in SOURCE_VARS)
    entries = _need(d, "pmf", where)
    if not isinstance(entries, list):
        raise ScenarioError("expected a list of [symbols, probability] pairs", where + ".pmf")
    probs = np.zeros(shape)
    for k, e in enumerate(entries):
        loc = f"{where}.pmf[{k}]"
        if not isinstance(e, list) or len(e) != 2:
            raise ScenarioError("entry must be [symbols, probability]", loc)
        sym = e[0] if isinstance(e[0], list) else [e[0]]
        # short tuples cover the leading roles; the rest are singletons
        sym = _symbols(list(sym) + [0] * (len(SOURCE_VARS) - len(sym)), len(SOURCE_VARS), loc)
        if any(not 0 <= i < s for i, s in zip(sym, shape)):
            raise ScenarioError(f"symbol {sym} outside alphabet sizes {shape}", loc)
        probs[sym] += _prob(e[1], loc)
    total = probs.sum()
    if abs(total - 1.0) > RENORM_TOL:
        raise NormalizationError(f"pmf sums to {total:.12g}", where + ".pmf")
    variables = [Variable(n, s) for n, s in zip(SOURCE_VARS, shape)]
    return SourceModel(JointPmf(variables, probs))


def _out_vars(outputs, where):
    out = []
    for name in ("Y", "Y3"):
        spec = outputs.get(name, 1) if isinstance(outputs, dict) else None
        loc = f"{where}.outputs.{name}"
        if isinstance(spec, dict):
            comps = tuple(Variable(c, _int(s, f"{loc}.{c}")) for c, s in spec.items())
            out.append(Variable(name, int(np.prod([c.alphabet_size for c in comps])), components=comps))
        elif spec is None:
            raise ScenarioError("expected {Y: ..., Y3: ...}", where + ".outputs")
        else:
            out.append(Variable(name, _int(spec, loc)))
    return out


def parse_channel(d, where="channel") -> ChannelModel:
    if not isinstance(d, dict):
        raise ScenarioError("expected a mapping", where)
    if "preset" in d:
        name = d["preset"]
        if name == "somarc-eq3":
            return somarc_example()[1]
        if name in ("erasure-feasible", "erasure-infeasible"):
            return presets.erasure_scenario(name.split("-")[1], float(d.get("erasure", 0.05)))[1]
        if name == "perfect":
            return presets.perfect_network(presets.somarc_source())[1]
        raise UnknownPreset(f"unknown channel preset {name!r}", where + ".preset")
    inputs = _need(d, "inputs", where)
    if not isinstance(inputs, dict) or set(inputs) - set(INPUT_VARS):
        raise ScenarioError(f"inputs must map a subset of {INPUT_VARS} to sizes", where + ".inputs")
    in_sizes = {n: _int(inputs.get(n, 1), f"{where}.inputs.{n}") for n in INPUT_VARS}
    outputs = _need(d, "outputs", where)
    somarc = bool(d.get("somarc", False))
    if "deterministic" in d:
        rows = d["deterministic"]
        if not isinstance(rows, list):
            raise ScenarioError("expected a list of [[x1,x2,x3], {output: symbol}] rows", where + ".deterministic")
        lookup = {}
        for k, r in enumerate(rows):
            loc = f"{where}.deterministic[{k}]"
            if not isinstance(r, list) or len(r) != 2 or not isinstance(r[1], dict):
                raise ScenarioError("row must be [[x1, x2, x3], {output: symbol}]", loc)
            lookup[_symbols(r[0], 3, loc)] = r[1]

        def fn(x1, x2, x3):
            try:
                return lookup[(x1, x2, x3)]
            except KeyError:
                raise ScenarioError(f"no row for input {(x1, x2, x3)}", where + ".deterministic") from None

        _out_vars(outputs, where)
        return deterministic_channel(in_sizes, outputs, fn, somarc=somarc)
    entries = _need(d, "kernel", where)
    out_vars = _out_vars(outputs, where)
    in_vars = [Variable(n, in_sizes[n]) for n in INPUT_VARS]
    shape = tuple(v.alphabet_size for v in in_vars + out_vars)
    table = _fill(shape, entries, 3, where + ".kernel")
    return ChannelModel(Kernel(in_vars, out_vars, table), somarc=somarc)


def _role_size(role, source: SourceModel, channel: ChannelModel | None, v_sizes, where) -> int:
    if role in SOURCE_VARS:
        return source.var(role).alphabet_size
    if role in ("V1", "V2"):
        return v_sizes[int(role[1]) - 1]
    if channel is None:
        raise ScenarioError("a channel is needed to size the chain inputs", where)
    return channel.input_sizes[INPUT_VARS.index(role)]


def parse_chain(d, source: SourceModel, channel: ChannelModel | None, where="chain"):
    """Returns (chain or None, optimize request or None, v_sizes)."""
    if not isinstance(d, dict):
        raise ScenarioError("expected a mapping", where)
    v_sizes = tuple(_int(v, where + ".v_sizes") for v in d.get("v_sizes", [2, 2]))
    if len(v_sizes) != 2 or min(v_sizes) < 1:
        raise ScenarioError("v_sizes must be two positive integers", where + ".v_sizes")
    if "optimize" in d:
        req = d["optimize"]
        if not isinstance(req, dict):
            raise ScenarioError("expected {objective: ..., family: ...}", where + ".optimize")
        return None, {"objective": req.get("objective", "min_margin_thm2"), "family": req.get("family", "thm2")}, v_sizes
    if "preset" in d:
        name = d["preset"]
        x3 = channel.input_sizes[2] if channel is not None else 1
        if name == "cpm-identity":
            return identity_cpm_chain(source, x3_size=x3), None, v_sizes
        if name == "tagged":
            if channel is None:
                raise ScenarioError("the tagged chain needs a channel", where)
            tag = channel.input_sizes[0] // source.var("S1").alphabet_size
            return presets.tagged_chain(source, tag, x3), None, v_sizes
        raise UnknownPreset(f"unknown chain preset {name!r}", where + ".preset")
    family = _need(d, "family", where)
    if family not in FACTORS:
        raise ScenarioError(f"unknown chain family {family!r}", where + ".family")
    factors = _need(d, "factors", where)
    tables = []
    for fname, (given, out) in FACTORS[family].items():
        loc = f"{where}.factors.{fname}"
        entries = _need(factors, fname, where + ".factors")
        shape = tuple(_role_size(r, source, channel, v_sizes, loc) for r in given + out)
        tables.append(_fill(shape, entries, len(given), loc))
    return CHAIN_CLASSES[family](*tables), None, v_sizes


# ------------------------------------------------------------------ loading


def builtin(name: str) -> dict:
    """Raw document of a built-in scenario preset."""
    if name == "somarc-eq3":
        return {"source": {"preset": "somarc-eq3"}, "channel": {"preset": "somarc-eq3"},
                "chain": {"preset": "cpm-identity"}}
    if name in ("erasure-feasible", "erasure-infeasible"):
        return {"source": {"preset": "somarc-relay-s2"}, "channel": {"preset": name},
                "chain": {"preset": "tagged"},
                "sim": {"n": 10, "blocks": 2, "rate1": 1.0, "rate2": 0.0, "epsilon": 0.25, "trials": 200}}
    if name == "perfect-somarc":
        return {"source": {"preset": "somarc-eq3"}, "channel": {"preset": "perfect"},
                "chain": {"preset": "tagged"},
                "sim": {"n": 8, "blocks": 2, "rate1": 1.0, "rate2": 1.0, "epsilon": 0.3, "trials": 200}}
    raise UnknownPreset(f"unknown scenario preset {name!r}", "preset")


def from_document(doc, name: str = "") -> ScenarioFile:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping at the top level")
    unknown = set(doc) - {"preset", "source", "channel", "chain", "sim", "name"}
    if unknown:
        raise ScenarioError(f"unknown top-level fields {sorted(unknown)}")
    merged = dict(builtin(doc["preset"])) if "preset" in doc else {}
    merged.update({k: v for k, v in doc.items() if k != "preset"})
    try:
        source = parse_source(_need(merged, "source", ""))
        channel = parse_channel(merged["channel"]) if "channel" in merged else None
        chain, request, v_sizes = (None, None, (2, 2))
        if "chain" in merged:
            chain, request, v_sizes = parse_chain(merged["chain"], source, channel)
    except (PmfError, ChainError, VariableError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc
    sim = merged.get("sim", {}) or {}
    if not isinstance(sim, dict):
        raise ScenarioError("expected a mapping", "sim")
    return ScenarioFile(name=str(merged.get("name", name)), source=source, channel=channel, chain=chain,
                        chain_request=request, sim=sim, v_sizes=v_sizes, raw=doc)


def parse_scenario(path: str | Path) -> ScenarioFile:
    """Load a scenario from a YAML file, or a built-in preset by name."""
    p = Path(path)
    if not p.exists():
        if str(path) in SCENARIO_PRESETS:
            return from_document({"preset": str(path)}, name=str(path))
        raise ScenarioNotFound(f"no such scenario file: {path}")
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{p}:{mark.line + 1}:{mark.column + 1}" if mark else str(p)
        raise SyntaxProblem(str(getattr(exc, "problem", exc)), where) from exc
    return from_document(doc, name=p.stem)


def source_to_document(source: SourceModel) -> dict:
    """Serialize a source as a scenario ``source`` section (inverse of parse_source)."""
    sizes = {v.name: v.alphabet_size for v in source.pmf.variables if v.alphabet_size > 1}
    entries = [[list(map(int, idx)), float(p)] for idx, p in np.ndenumerate(source.pmf.probs) if p > 0]
    return {"variables": sizes, "pmf": entries}

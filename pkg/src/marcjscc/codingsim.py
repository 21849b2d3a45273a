"""Monte Carlo simulation of the block-Markov CPM-to-destination scheme.

Per session: random binning of source blocks, source-dependent codewords,
relay decoding of the bin pair and then the source pair (with relay side
information), and backward decoding at the destination. Codebooks are never
materialized: each codeword letter is a keyed pseudorandom function of
(terminal, bin index, sequence index, position, session key), so only the
entries a decoder touches are ever generated.

Also contains the uncoded correlation-preserving scheme for the
semi-orthogonal example, where X1 = S1, X2 = S2 gives zero errors.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.stats import binomtest

from .infotheory import JointPmf, conditional_entropy, marginalize
from .network import (
    ChannelModel,
    InputChainThm2,
    SourceModel,
    assemble_joint,
    identity_cpm_chain,
    somarc_example,
)

DEFAULT_SEED = 20111
TRACE_HEADER = ("trial", "block", "stage", "verdict")

# verdicts
OK, WRONG, NONE, MULTIPLE, PROPAGATED = "ok", "wrong", "none", "multiple", "propagated"


class SimBudgetError(RuntimeError):
    """A decoder would have to enumerate more candidates than allowed."""


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int
    B: int = 2
    R1: float = 1.0
    R2: float = 1.0
    epsilon: float = 0.25
    trials: int = 200
    seed: int = DEFAULT_SEED
    # "per-tuple": |N(a)/n - p(a)| <= eps; "strong": <= eps / |alphabet product|
    typicality: str = "per-tuple"
    # "marc": only destination errors count; "mabrc" also counts relay reconstruction errors
    network: str = "marc"
    workers: int = 1
    max_bin_pairs: int = 10**6
    max_candidates: int = 2**22
    trace: bool = False

    def __post_init__(self):
        if self.n < 1 or self.B < 1:
            raise SimConfigError("n and B must be >= 1")
        if self.R1 < 0 or self.R2 < 0:
            raise SimConfigError("binning rates must be >= 0")
        if not self.epsilon > 0:
            raise SimConfigError("epsilon must be > 0")
        if self.trials < 1:
            raise SimConfigError("trials must be >= 1")
        if self.typicality not in ("per-tuple", "strong"):
            raise SimConfigError(f"unknown typicality mode {self.typicality!r}")
        if self.network not in ("mabrc", "marc"):
            raise SimConfigError(f"unknown network {self.network!r}")
        if self.bins1 * self.bins2 > self.max_bin_pairs:
            raise SimBudgetError(
                f"{self.bins1} x {self.bins2} bin pairs exceed the budget of {self.max_bin_pairs}"
            )

    @property
    def bins1(self) -> int:
        return max(1, round(2 ** (self.n * self.R1)))

    @property
    def bins2(self) -> int:
        return max(1, round(2 ** (self.n * self.R2)))


def wilson_interval(errors: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(errors, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class SimReport:
    trials: int
    blocks: int
    session_errors: int
    relay_block_errors: int
    dest_block_errors: int
    config: dict = field(default_factory=dict)
    trace: list = field(default_factory=list, repr=False)

    @property
    def session_error_rate(self) -> float:
        return self.session_errors / self.trials

    @property
    def relay_block_error_rate(self) -> float:
        return self.relay_block_errors / (self.trials * self.blocks)

    @property
    def dest_block_error_rate(self) -> float:
        return self.dest_block_errors / (self.trials * self.blocks)

    @property
    def wilson_interval(self) -> tuple[float, float]:
        return wilson_interval(self.session_errors, self.trials)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        w.writerows(self.trace)
        return buf.getvalue()


# ------------------------------------------------------------- typicality


def _tolerance(ref: JointPmf, epsilon: float, normalize: bool) -> float:
    return epsilon / ref.probs.size if normalize else epsilon


def is_jointly_typical(sequences, ref: JointPmf, epsilon: float, normalize: bool = True) -> bool:
    """Strong joint typicality of sequences (one per variable of ``ref``, in order).

    Every tuple must satisfy |N(a)/n - p(a)| <= tol and tuples with p(a) = 0
    must not occur. ``tol`` is epsilon / |alphabet product| (the textbook
    definition) or epsilon itself with ``normalize=False``.
    """
    seqs = [np.asarray(s) for s in sequences]
    if len(seqs) != len(ref.variables):
        raise ValueError(f"{len(seqs)} sequences for {len(ref.variables)} variables")
    n = seqs[0].shape[-1]
    if any(s.shape != seqs[0].shape for s in seqs):
        raise ValueError("sequences must have equal length")
    codes = np.ravel_multi_index(tuple(seqs), ref.probs.shape)
    return bool(_typical_rows(ref.probs.ravel(), codes[None, :], n, _tolerance(ref, epsilon, normalize))[0])


def _support_rows(pflat: np.ndarray, codes: np.ndarray) -> np.ndarray:
    return np.all(pflat[codes] > 0, axis=-1)


def _typical_rows(pflat: np.ndarray, codes: np.ndarray, n: int, tol: float) -> np.ndarray:
    """Typicality verdict for every row of a (rows, n) array of flat tuple codes."""
    ok = _support_rows(pflat, codes)
    rows = np.flatnonzero(ok)
    if rows.size == 0:
        return ok
    size = pflat.size
    counts = np.bincount((np.arange(rows.size)[:, None] * size + codes[rows]).ravel(), minlength=rows.size * size)
    dev = np.abs(counts.reshape(rows.size, size) / n - pflat[None, :])
    ok[rows] = np.all(dev <= tol + 1e-12, axis=1)
    return ok


# ---------------------------------------------------------- keyed codebooks

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
TAG_BIN1, TAG_BIN2, TAG_X1, TAG_X2, TAG_X3 = 11, 12, 21, 22, 23


def _mix(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def _prf(key: int, *fields) -> np.ndarray:
    with np.errstate(over="ignore"):
        h = np.asarray(np.uint64(key))
        for f in fields:
            h = _mix(h ^ (np.asarray(f).astype(np.uint64) + _GOLD))
    return h


def _unit(h: np.ndarray) -> np.ndarray:
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def sequence_ids(seqs: np.ndarray, alphabet: int) -> np.ndarray:
    """Injective integer id of each row when it fits in 62 bits, else a 64-bit hash."""
    seqs = np.atleast_2d(seqs)
    n = seqs.shape[-1]
    if alphabet <= 1:
        return np.zeros(seqs.shape[:-1], dtype=np.uint64)
    if n * math.log2(alphabet) < 62:
        powers = alphabet ** np.arange(n, dtype=np.int64)
        return (seqs.astype(np.int64) @ powers).astype(np.uint64)
    h = np.zeros(seqs.shape[:-1], dtype=np.uint64)
    with np.errstate(over="ignore"):
        for k in range(n):
            h = _mix(h ^ (seqs[..., k].astype(np.uint64) + _GOLD))
    return h


def _cdf(table: np.ndarray) -> np.ndarray:
    c = np.cumsum(table, axis=-1)
    c[..., -1] = 1.0
    return c


def _inverse_cdf(u: np.ndarray, cdf_rows: np.ndarray) -> np.ndarray:
    # cdf_rows has one row per letter position; u in [0, 1)
    return (u[..., None] >= cdf_rows).sum(axis=-1).astype(np.int16)


class Codebooks:
    """One session's random binning and codebooks, keyed by ``key``."""

    def __init__(self, key: int, chain: InputChainThm2, sizes: tuple[int, int], bins: tuple[int, int], n: int):
        self.key = int(key)
        self.n = n
        self.sizes = sizes
        self.bins = bins
        self.cdf1 = _cdf(np.asarray(chain.p_x1_given_s1, float))
        self.cdf2 = _cdf(np.asarray(chain.p_x2_given_s2, float))
        t3 = np.asarray(chain.p_x3_given_s1s2, float)
        self.cdf3 = _cdf(t3.reshape(-1, t3.shape[-1]))
        self.pos = np.arange(n, dtype=np.uint64)

    def ids(self, seqs, which: int) -> np.ndarray:
        return sequence_ids(seqs, self.sizes[which - 1])

    def bin(self, seqs, which: int, ids=None) -> np.ndarray:
        ids = self.ids(seqs, which) if ids is None else ids
        tag = TAG_BIN1 if which == 1 else TAG_BIN2
        return (_prf(self.key, tag, ids) % np.uint64(self.bins[which - 1])).astype(np.int64)

    def x(self, which: int, u, seqs, ids=None) -> np.ndarray:
        """Codeword x_i(u, s) for rows of ``seqs``; ``u`` broadcasts against the rows."""
        seqs = np.atleast_2d(seqs)
        ids = self.ids(seqs, which) if ids is None else ids
        tag, cdf = (TAG_X1, self.cdf1) if which == 1 else (TAG_X2, self.cdf2)
        u = np.asarray(u, dtype=np.uint64)
        h = _prf(self.key, tag, u[..., None], ids[..., None], self.pos)
        return _inverse_cdf(_unit(h), cdf[seqs])

    def x3(self, s1, s2, ids1=None, ids2=None) -> np.ndarray:
        s1, s2 = np.atleast_2d(s1), np.atleast_2d(s2)
        ids1 = self.ids(s1, 1) if ids1 is None else ids1
        ids2 = self.ids(s2, 2) if ids2 is None else ids2
        h = _prf(self.key, TAG_X3, ids1[..., None], ids2[..., None], self.pos)
        return _inverse_cdf(_unit(h), self.cdf3[s1.astype(np.int64) * self.sizes[1] + s2])


# -------------------------------------------------------------- decoders


def _enumerate(allowed: list[np.ndarray], cap: int) -> np.ndarray:
    """All sequences whose k-th letter is drawn from allowed[k]; rows x (n, ...)."""
    total = math.prod(len(a) for a in allowed)
    if total > cap:
        raise SimBudgetError(f"{total} candidate sequences exceed the budget of {cap}")
    out = np.zeros((1, 0) + allowed[0].shape[1:], dtype=np.int16)
    for a in allowed:
        k = len(a)
        out = np.concatenate(
            [np.repeat(out, k, axis=0), np.tile(a, (out.shape[0],) + (1,) * (a.ndim - 1))[:, None]], axis=1
        )
    return out


class _Ref:
    """Reference pmf with quick flat-code computation for named sequences."""

    def __init__(self, joint: JointPmf, names):
        self.pmf = marginalize(joint, names).reorder(names)
        self.names = tuple(names)
        self.shape = self.pmf.probs.shape
        self.flat = self.pmf.probs.ravel()

    def codes(self, seqs: dict) -> np.ndarray:
        arrs = np.broadcast_arrays(*[np.asarray(seqs[n], dtype=np.int64) for n in self.names])
        return np.ravel_multi_index(tuple(arrs), self.shape)

    def sub(self, names) -> _Ref:
        return _Ref(self.pmf, tuple(n for n in self.names if n in names))


class _Decoder:
    def __init__(self, joint: JointPmf, cfg: SimConfig):
        self.cfg = cfg
        norm = cfg.typicality == "strong"
        self.relay = _Ref(joint, ("S1", "S2", "X1", "X2", "X3", "Y3"))
        self.relay_a = self.relay.sub(("S1", "S2", "X1", "X3", "Y3"))
        self.relay_b = self.relay.sub(("S1", "S2", "X2", "X3", "Y3"))
        self.src = _Ref(joint, ("S1", "S2", "W3"))
        self.src1 = self.src.sub(("S1", "W3"))
        self.src2 = self.src.sub(("S2", "W3"))
        self.dest = _Ref(joint, ("S1", "S2", "X1", "X2", "X3", "W", "Y"))
        self.dest_s = self.dest.sub(("S1", "S2", "W", "Y"))
        self.dest_a = self.dest.sub(("S1", "S2", "X1", "W", "Y"))
        self.dest_b = self.dest.sub(("S1", "S2", "X2", "W", "Y"))
        self.tol = {id(r): _tolerance(r.pmf, cfg.epsilon, norm) for r in (self.relay, self.src, self.dest)}

    def _typical(self, ref: _Ref, seqs: dict) -> np.ndarray:
        codes = ref.codes(seqs)
        return _typical_rows(ref.flat, np.atleast_2d(codes), self.cfg.n, self.tol[id(ref)])

    def _pairs(self, ref, build, na: int, nb: int, chunk: int = 1 << 16):
        """Typical (ia, ib) pairs among na x nb, stopping once two are found."""
        if na * nb > self.cfg.max_candidates:
            raise SimBudgetError(f"{na * nb} candidate pairs exceed the budget of {self.cfg.max_candidates}")
        found = []
        flat = np.arange(na * nb)
        for start in range(0, flat.size, chunk):
            ia, ib = np.divmod(flat[start:start + chunk], nb)
            ok = self._typical(ref, build(ia, ib))
            for j in np.flatnonzero(ok):
                found.append((int(ia[j]), int(ib[j])))
                if len(found) > 1:
                    return found
        return found

    def relay_bins(self, cb: Codebooks, s1p, s2p, y3):
        """Unique bin pair whose codewords are typical with the received y3."""
        m1, m2 = cb.bins
        x1c = cb.x(1, np.arange(m1), np.broadcast_to(s1p, (m1, s1p.size)))
        x2c = cb.x(2, np.arange(m2), np.broadcast_to(s2p, (m2, s2p.size)))
        x3 = cb.x3(s1p, s2p)[0]
        fixed = {"S1": s1p, "S2": s2p, "X3": x3, "Y3": y3}
        keep1 = np.flatnonzero(_support_rows(self.relay_a.flat, self.relay_a.codes({**fixed, "X1": x1c})))
        keep2 = np.flatnonzero(_support_rows(self.relay_b.flat, self.relay_b.codes({**fixed, "X2": x2c})))

        def build(ia, ib):
            return {**fixed, "X1": x1c[keep1[ia]], "X2": x2c[keep2[ib]]}

        found = self._pairs(self.relay, build, keep1.size, keep2.size)
        return [(int(keep1[a]), int(keep2[b])) for a, b in found]

    def relay_source(self, cb: Codebooks, u1: int, u2: int, w3):
        """Unique bin-consistent source pair typical with the relay side information."""
        cands = []
        for which, ref, u in ((1, self.src1, u1), (2, self.src2, u2)):
            p = ref.pmf.probs.reshape(ref.shape)  # (S, W3)
            allowed = [np.flatnonzero(p[:, w] > 0).astype(np.int16) for w in w3]
            seqs = _enumerate(allowed, self.cfg.max_candidates)
            ids = cb.ids(seqs, which)
            hit = cb.bin(seqs, which, ids) == u
            cands.append((seqs[hit], ids[hit]))
        (c1, _), (c2, _) = cands

        def build(ia, ib):
            return {"S1": c1[ia], "S2": c2[ib], "W3": w3}

        return [(c1[a], c2[b]) for a, b in self._pairs(self.src, build, len(c1), len(c2))]

    def destination(self, cb: Codebooks, u1: int, u2: int, w, y):
        """Backward-decoding step: unique source pair typical with (w, y) under bins (u1, u2)."""
        p = self.dest_s.pmf.probs.reshape(self.dest_s.shape)  # S1 S2 W Y
        allowed = []
        for wk, yk in zip(w, y):
            s1, s2 = np.nonzero(p[:, :, wk, yk] > 0)
            allowed.append(np.stack([s1, s2], axis=1).astype(np.int16))
        pairs = _enumerate(allowed, self.cfg.max_candidates)  # (N, n, 2)
        s1, s2 = pairs[..., 0], pairs[..., 1]
        fixed = {"W": w, "Y": y}
        ids1, ids2 = cb.ids(s1, 1), cb.ids(s2, 2)
        x1 = cb.x(1, u1, s1, ids1)
        keep = _support_rows(self.dest_a.flat, self.dest_a.codes({**fixed, "S1": s1, "S2": s2, "X1": x1}))
        s1, s2, ids1, ids2, x1 = s1[keep], s2[keep], ids1[keep], ids2[keep], x1[keep]
        x2 = cb.x(2, u2, s2, ids2)
        keep = _support_rows(self.dest_b.flat, self.dest_b.codes({**fixed, "S1": s1, "S2": s2, "X2": x2}))
        s1, s2, ids1, ids2, x1, x2 = s1[keep], s2[keep], ids1[keep], ids2[keep], x1[keep], x2[keep]
        if len(s1) == 0:
            return []
        x3 = cb.x3(s1, s2, ids1, ids2)
        ok = self._typical(self.dest, {**fixed, "S1": s1, "S2": s2, "X1": x1, "X2": x2, "X3": x3})
        hits = np.flatnonzero(ok)[:2]
        return [(s1[i], s2[i]) for i in hits]


def _verdict(found, truth) -> tuple[str, object]:
    if not found:
        return NONE, None
    if len(found) > 1:
        return MULTIPLE, None
    est = found[0]
    good = all(np.array_equal(a, b) for a, b in zip(est, truth))
    return (OK if good else WRONG), est


def _session(trial: int, source: SourceModel, channel: ChannelModel, chain: InputChainThm2,
             cfg: SimConfig, decoder: _Decoder):
    n, B = cfg.n, cfg.B
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(trial,))
    k_src, k_ch, k_cb = ss.generate_state(3, dtype=np.uint64)
    rng_src = np.random.default_rng(int(k_src))
    rng_ch = np.random.default_rng(int(k_ch))
    sizes = (source.var("S1").alphabet_size, source.var("S2").alphabet_size)
    cb = Codebooks(int(k_cb), chain, sizes, (cfg.bins1, cfg.bins2), n)

    draws = source.pmf.sample(rng_src, B * n).reshape(B, n, 4)
    s1, s2, w, w3 = (draws[..., i].astype(np.int16) for i in range(4))
    a = marginalize(source.pmf, ("S1", "S2")).sample(rng_src, n).astype(np.int16)
    a1, a2 = a[:, 0], a[:, 1]
    u1 = np.append(cb.bin(s1, 1), 0)  # block B+1 sends bin index "1"
    u2 = np.append(cb.bin(s2, 2), 0)
    prev1 = np.vstack([a1[None], s1])  # s_{i,b-1} for b = 1..B+1
    prev2 = np.vstack([a2[None], s2])

    trace = []
    relay_err = np.zeros(B, bool)
    est1, est2 = a1, a2
    relay_dead = False
    ys = []
    for b in range(B + 1):
        x1 = cb.x(1, u1[b], prev1[b])[0]
        x2 = cb.x(2, u2[b], prev2[b])[0]
        x3 = cb.x3(est1, est2)[0]
        y, y3 = channel.sample(rng_ch, x1, x2, x3)
        ys.append(y)
        if b == B:
            break
        if relay_dead:
            relay_err[b] = True
            trace.append((trial, b + 1, "relay", PROPAGATED))
            continue
        bins = decoder.relay_bins(cb, est1, est2, y3)
        if len(bins) != 1:
            verdict = NONE if not bins else MULTIPLE
            trace.append((trial, b + 1, "relay-bins", verdict))
            relay_err[b], relay_dead = True, True
            est1, est2 = a1, a2
            continue
        trace.append((trial, b + 1, "relay-bins", OK if bins[0] == (u1[b], u2[b]) else WRONG))
        verdict, est = _verdict(decoder.relay_source(cb, *bins[0], w3[b]), (s1[b], s2[b]))
        trace.append((trial, b + 1, "relay-source", verdict))
        if verdict == OK:
            est1, est2 = est
        else:
            relay_err[b], relay_dead = True, True
            est1, est2 = est if est is not None else (a1, a2)

    dest_err = np.zeros(B, bool)
    nu1, nu2 = 0, 0
    dead = False
    for b in range(B - 1, -1, -1):
        if dead:
            dest_err[b] = True
            trace.append((trial, b + 1, "destination", PROPAGATED))
            continue
        verdict, est = _verdict(decoder.destination(cb, nu1, nu2, w[b], ys[b + 1]), (s1[b], s2[b]))
        trace.append((trial, b + 1, "destination", verdict))
        if verdict != OK:
            dest_err[b], dead = True, True
            continue
        nu1, nu2 = int(cb.bin(est[0], 1)[0]), int(cb.bin(est[1], 2)[0])

    failed = dest_err.any() or (cfg.network == "mabrc" and relay_err.any())
    return bool(failed), int(relay_err.sum()), int(dest_err.sum()), trace


def _run_trials(args):
    trials, source, channel, chain, cfg = args
    joint = assemble_joint(source, chain, channel)
    decoder = _Decoder(joint, cfg)
    return [_session(t, source, channel, chain, cfg, decoder) for t in trials]


def run_thm2_sim(source: SourceModel, channel: ChannelModel, chain: InputChainThm2, cfg: SimConfig) -> SimReport:
    """Simulate ``cfg.trials`` independent sessions of the block-Markov scheme."""
    if not isinstance(chain, InputChainThm2):
        raise SimConfigError("the simulator needs a p(x1|s1) p(x2|s2) p(x3|s1,s2) chain")
    trials = list(range(cfg.trials))
    if cfg.workers > 1:
        parts = [trials[i::cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_trials, [(p, source, channel, chain, cfg) for p in parts]))
        by_trial = {t: r for p, c in zip(parts, chunks) for t, r in zip(p, c)}
        results = [by_trial[t] for t in trials]
    else:
        results = _run_trials((trials, source, channel, chain, cfg))
    report = SimReport(
        trials=cfg.trials,
        blocks=cfg.B,
        session_errors=sum(r[0] for r in results),
        relay_block_errors=sum(r[1] for r in results),
        dest_block_errors=sum(r[2] for r in results),
        config=asdict(cfg),
    )
    if cfg.trace:
        report.trace = [row for r in results for row in r[3]]
    return report


# ---------------------------------------------------------- uncoded CPM


def cpm_decoder_table(source: SourceModel, channel: ChannelModel, x3: int = 0) -> np.ndarray:
    """MAP map from destination output y to the source pair under X1=S1, X2=S2.

    Returns an array of shape (|Y|, 2); rows for unreachable outputs are -1.
    """
    joint = assemble_joint(source, identity_cpm_chain(source, channel.input_sizes[2], x3), channel)
    p = marginalize(joint, ("S1", "S2", "Y")).probs  # S1 S2 Y
    table = np.full((p.shape[2], 2), -1, dtype=np.int64)
    for yv in range(p.shape[2]):
        col = p[:, :, yv]
        if col.max() > 0:
            table[yv] = np.unravel_index(np.argmax(col), col.shape)
    return table


def cpm_is_zero_error(source: SourceModel, channel: ChannelModel, x3: int = 0) -> bool:
    """True when each reachable output is produced by exactly one source pair."""
    joint = assemble_joint(source, identity_cpm_chain(source, channel.input_sizes[2], x3), channel)
    p = marginalize(joint, ("S1", "S2", "Y")).probs
    return bool(np.all((p > 0).reshape(-1, p.shape[2]).sum(axis=0) <= 1))


def run_uncoded_cpm_somarc(trials: int, seed: int = DEFAULT_SEED, source=None, channel=None,
                           chunk: int = 1 << 20) -> SimReport:
    """Letter-by-letter X1 = S1, X2 = S2 over the semi-orthogonal example (or a given pair)."""
    if source is None or channel is None:
        source, channel = somarc_example()
    table = cpm_decoder_table(source, channel)
    pair = marginalize(source.pmf, ("S1", "S2"))
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    errors, done = 0, 0
    while done < trials:
        m = min(chunk, trials - done)
        s = pair.sample(rng, m)
        y, _ = channel.sample(rng, s[:, 0], s[:, 1], np.zeros(m, dtype=np.int64))
        errors += int(np.count_nonzero(np.any(table[y] != s, axis=1)))
        done += m
    return SimReport(trials=trials, blocks=1, session_errors=errors, relay_block_errors=0,
                     dest_block_errors=errors, config={"scheme": "uncoded-cpm", "trials": trials, "seed": seed})


def sw_rate_hint(source: SourceModel, delta: float = 0.1) -> dict:
    """Slepian-Wolf corner with relay side information, padded by ``delta``."""
    p = source.pmf
    r1 = conditional_entropy(p, "S1", ("S2", "W3")) + delta
    r2 = conditional_entropy(p, "S2", ("S1", "W3")) + delta
    need = conditional_entropy(p, ("S1", "S2"), "W3") + 2 * delta
    return {"R1": r1, "R2": r2, "sum_required": need, "sum_ok": r1 + r2 >= need - 1e-12}

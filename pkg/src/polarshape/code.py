"""Two-layer code: inner shapers per super-channel, outer polar codes per level.

A codeword of length ``N = M L`` is ``M`` shaped blocks of length ``L``.
Level ``i`` gathers the bit at extractor position ``E[i]`` of every block
into ``V_i`` (length ``M``); ``V_i = T_i G_M`` where ``T_i`` holds frozen
and message bits.  The decoder interleaves inner and outer successive
cancellation: level ``i`` is decoded for all blocks before any block moves
past position ``E[i]``.
"""
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (Dmc, channel_from_config, joint_leaf_llr, optimal_input,
                       source_leaf_llr)
from .core import (InvalidArgument, RandomStream, as_bits, int_to_bits, log2_int,
                   polar_transform)
from .polarization import (FORMAT_VERSION, FrozenSet, IndexSets, _check_format,
                           build_index_sets, outer_frozen_sets, source_entropies_exact,
                           source_entropies_mc)
from .sc import ARGMAX, GIVEN, SAMPLE, SCTree, boxplus
from .shaper import DERANDOMIZED, STOCHASTIC, ShaperSpec, shape_blocks, shaper_conditional_law


class DecodeFailure(RuntimeError):
    """Observations are impossible under the decoder's current hypotheses."""


@dataclass
class CodeSpec:
    L: int
    M: int
    p: float
    channel: Dmc
    index_sets: IndexSets
    extractor: list
    frozen: list
    mode: str = STOCHASTIC
    seeds: dict = field(default_factory=lambda: {"construction": 0, "frozen": 0, "common": 0})
    epsilon_inner: float = 0.05
    epsilon_outer: float = 0.05
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        log2_int(self.L)
        log2_int(self.M)
        self.extractor = [int(e) for e in self.extractor]
        if len(self.frozen) != len(self.extractor):
            raise InvalidArgument("one frozen set per extractor position")
        for fs in self.frozen:
            if fs.M != self.M:
                raise InvalidArgument("frozen set length differs from M")
            fs.validate()

    @property
    def K(self):
        return len(self.extractor)

    @property
    def N(self):
        return self.M * self.L

    @property
    def shaper(self):
        det = [i for i in self.index_sets.deterministic_set if i not in set(self.extractor)]
        return ShaperSpec(self.L, self.extractor, self.p, self.mode,
                          det if self.mode == DERANDOMIZED else [])

    def data_positions(self, level):
        return self.frozen[level].data_positions

    @property
    def message_length(self):
        return sum(self.M - len(fs.positions) for fs in self.frozen)

    @property
    def design_rate(self):
        return self.message_length / self.N

    @property
    def randomness_per_frame(self):
        return self.M * self.shaper.randomness_per_block

    def with_mode(self, mode):
        return CodeSpec(self.L, self.M, self.p, self.channel, self.index_sets, self.extractor,
                        self.frozen, mode, dict(self.seeds), self.epsilon_inner,
                        self.epsilon_outer, dict(self.stats))

    def to_dict(self):
        return {"format": "polarshape.CodeSpec", "version": FORMAT_VERSION,
                "L": self.L, "M": self.M, "p": self.p, "mode": self.mode,
                "channel": self.channel.to_dict(),
                "index_sets": self.index_sets.to_dict(),
                "extractor": list(self.extractor),
                "frozen": [fs.to_dict() for fs in self.frozen],
                "seeds": {k: int(v) for k, v in self.seeds.items()},
                "epsilon_inner": self.epsilon_inner, "epsilon_outer": self.epsilon_outer,
                "design_rate": self.design_rate,
                "stats": self.stats}

    @classmethod
    def from_dict(cls, d):
        _check_format(d, "polarshape.CodeSpec")
        return cls(int(d["L"]), int(d["M"]), float(d["p"]), channel_from_config(d["channel"]),
                   IndexSets.from_dict(d["index_sets"]), d["extractor"],
                   [FrozenSet.from_dict(f) for f in d["frozen"]], d.get("mode", STOCHASTIC),
                   {k: int(v) for k, v in d["seeds"].items()},
                   float(d["epsilon_inner"]), float(d["epsilon_outer"]), d.get("stats", {}))

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def inner_entropies(p, L, samples, stream):
    if L <= 16:
        return source_entropies_exact(p, L)
    return source_entropies_mc(p, L, samples, stream).clipped()


def build_code(channel, p=None, L=64, M=256, epsilon_inner=0.05, epsilon_outer=0.05,
               samples=2000, seed=0, mode=STOCHASTIC, inner_samples=4000,
               target_rate=None, frozen_zero=False):
    """Construct a code: extractor = random set of the inner layer, frozen sets by simulation."""
    if p is None:
        p = optimal_input(channel).optimal_p
    seeds = {"construction": int(seed), "frozen": int(seed) ^ 0x5A5A, "common": int(seed) ^ 0xC3C3}
    root = RandomStream(seeds["construction"], ("construction",))
    h = inner_entropies(p, L, inner_samples, root.child("inner"))
    sets = build_index_sets(h, epsilon_inner)
    E = sets.random_set
    if not E:
        raise InvalidArgument("empty extractor set; lower epsilon_inner or raise L")
    outer = outer_frozen_sets(p, channel, E, M, epsilon_outer, samples, root.child("outer"),
                              L=L, target_rate=target_rate,
                              frozen_stream=RandomStream(seeds["frozen"], ("frozen",)),
                              frozen_zero=frozen_zero)
    stats = {"outer_entropies": np.round(outer.entropies, 6).tolist(),
             "genie_level_fer": outer.level_fer.tolist(),
             "genie_frame_error": outer.extra["frame_error_union"],
             "samples": samples}
    return CodeSpec(L, M, p, channel, sets, E, outer.frozen_sets, mode, seeds,
                    epsilon_inner, epsilon_outer, stats)


# encoder

def common_uniforms(spec, common_seed=None):
    seed = spec.seeds["common"] if common_seed is None else common_seed
    return RandomStream(seed, ("shaper",)).uniforms(spec.M * spec.L).reshape(spec.M, spec.L)


def assemble_outer(spec, message, frozen_values=None):
    """T of shape (K, M): frozen values at frozen positions, message elsewhere."""
    msg = as_bits(message).reshape(-1)
    if msg.size != spec.message_length:
        raise InvalidArgument(f"message must have {spec.message_length} bits, got {msg.size}")
    T = np.zeros((spec.K, spec.M), dtype=np.uint8)
    at = 0
    for i, fs in enumerate(spec.frozen):
        vals = fs.frozen_values if frozen_values is None else frozen_values[i]
        T[i, fs.positions] = as_bits(vals)
        dp = fs.data_positions
        T[i, dp] = msg[at:at + len(dp)]
        at += len(dp)
    return T


def encode_frame(spec, message, common_seed=None, frozen_values=None):
    """Encode and return ``(x, u, T)``: codeword (M, L), inner words (M, L), outer words (K, M)."""
    T = assemble_outer(spec, message, frozen_values)
    V = polar_transform(T) if spec.K else T
    unif = common_uniforms(spec, common_seed)
    x, u = shape_blocks(spec.shaper, V.T.copy(), unif)
    return x, u, T


def encode(spec, message, common_seed=None, frozen_values=None):
    """Codeword of length N (block-major: block j occupies ``[jL, (j+1)L)``)."""
    return encode_frame(spec, message, common_seed, frozen_values)[0].reshape(-1)


def extract_message(spec, T):
    return np.concatenate([T[i, spec.data_positions(i)] for i in range(spec.K)]
                          + [np.zeros(0, dtype=np.uint8)]).astype(np.uint8)


# decoder

def inner_llr(channel, p, y, prefix):
    """log P(U_e = 0 | y, prefix) / P(U_e = 1 | y, prefix) with e = len(prefix)."""
    y = np.asarray(y).reshape(1, -1)
    L = y.shape[1]
    prefix = as_bits(prefix).reshape(-1)
    if prefix.size >= L:
        raise InvalidArgument("prefix must be shorter than the block")
    t = SCTree(joint_leaf_llr(channel, p, y))
    given = np.zeros((1, L), dtype=np.uint8)
    given[0, :prefix.size] = prefix
    t.sweep(prefix.size, np.zeros(L, dtype=np.int8), given=given)
    lam = float(t.descend()[0])
    if math.isnan(lam):
        raise DecodeFailure("observations impossible for this prefix")
    return lam


@dataclass
class DecodeResult:
    message: np.ndarray
    T: np.ndarray                     # (K, M) decoded outer words
    u: np.ndarray                     # (M, L) reconstructed inner words
    level_errors: np.ndarray = None   # genie mode: (K, M) decision errors
    trace: list = None


def decode_frame(spec, y, common_seed=None, frozen_values=None, genie_u=None, trace=False):
    """Interleaved SC decoding of one frame; ``y`` has N symbols.

    With ``genie_u`` (true inner words, (M, L)) every decision is replaced by
    its true value after being scored, giving genie-aided decision errors.
    """
    y = np.asarray(y).reshape(spec.M, spec.L)
    M, L, K = spec.M, spec.L, spec.K
    shaper = spec.shaper
    rules = shaper.rules()
    unif = common_uniforms(spec, common_seed)
    src = SCTree(np.full((M, L), source_leaf_llr(spec.p)))
    joint = SCTree(joint_leaf_llr(spec.channel, spec.p, y))
    all_given = np.zeros(L, dtype=np.int8)
    T = np.zeros((K, M), dtype=np.uint8)
    errors = np.zeros((K, M), dtype=bool) if genie_u is not None else None
    true_T = polar_transform(genie_u[:, spec.extractor].T) if genie_u is not None else None
    log = [] if trace else None
    for i, e in enumerate(spec.extractor):
        if genie_u is None:
            src.sweep(e, rules, unif=unif)
            joint.sweep(e, all_given, given=src.u)
        else:
            src.sweep(e, all_given, given=genie_u)
            joint.sweep(e, all_given, given=genie_u)
        lam = joint.descend()
        if np.isnan(lam).any():
            raise DecodeFailure(f"impossible evidence at level {i}")
        fs = spec.frozen[i]
        orule = np.full(M, ARGMAX, dtype=np.int8)
        orule[fs.positions] = GIVEN
        given = np.zeros((1, M), dtype=np.uint8)
        given[0, fs.positions] = as_bits(fs.frozen_values if frozen_values is None
                                         else frozen_values[i])
        outer = SCTree(lam[None, :])
        if genie_u is None:
            outer.sweep(M, orule, given=given)
        else:
            outer.sweep(M, np.zeros(M, dtype=np.int8), given=true_T[i][None, :])
            with np.errstate(invalid="ignore"):
                dec = (~(outer.llr[0] >= 0)).astype(np.uint8)
            errors[i] = (dec != true_T[i]) & (orule == ARGMAX)
        if np.isnan(outer.llr).any():
            raise DecodeFailure(f"impossible evidence in outer level {i}")
        T[i] = outer.u[0]
        v = outer.x[0].copy()
        if log is not None:
            log.append({"level": i, "position": e, "inner_llr": lam.copy(),
                        "prefix": src.u[:, :e].copy(), "outer_llr": outer.llr[0].copy(),
                        "T": T[i].copy()})
        src.push(v)
        joint.push(v)
    if genie_u is None:
        src.sweep(L, rules, unif=unif)
    return DecodeResult(extract_message(spec, T), T, src.u.copy(), errors, log)


def decode(spec, y, common_seed=None, frozen_values=None):
    return decode_frame(spec, y, common_seed, frozen_values).message


# reference decoder following the node graph

class LazyDecoder:
    """Scalar, memoized decoder that computes a node only when a parent asks.

    Slow but transparent: it records the order in which nodes are first
    activated and which state each level reads.  Inner nodes are keyed
    ``("inner", j, d, b, k)`` (block ``j``, depth ``d``, node ``b``, element
    ``k``) and outer leaves ``("outer", i, b)``.
    """

    def __init__(self, spec, y, common_seed=None, frozen_values=None):
        self.spec = spec
        self.y = np.asarray(y).reshape(spec.M, spec.L)
        self.unif = common_uniforms(spec, common_seed)
        self.frozen_values = frozen_values
        self.leaf = joint_leaf_llr(spec.channel, spec.p, self.y)
        self.src_leaf = source_leaf_llr(spec.p)
        self.u = np.full((spec.M, spec.L), -1, dtype=np.int64)
        self.memo = {}
        self.src_memo = {}
        self.outer_memo = {}
        self.activations = []
        self.reads = []          # (level, block, position) of every inner bit read
        self.level = None

    def _activate(self, key):
        self.activations.append(key)

    def _bits(self, j, lo, hi):
        for k in range(lo, hi):
            self.reads.append((self.level, j, k))
            if self.u[j, k] < 0:
                raise RuntimeError(f"read of undecided bit {k} in block {j}")
        return polar_transform(self.u[j, lo:hi].astype(np.uint8))

    def _node(self, memo, leaf_fn, j, d, b, k, log):
        key = (j, d, b, k)
        if key in memo:
            return memo[key]
        if log:
            self._activate(("inner",) + key)
        L = self.spec.L
        if d == 0:
            val = leaf_fn(j, k)
        else:
            h = L >> d
            a = self._node(memo, leaf_fn, j, d - 1, b // 2, k, log)
            c = self._node(memo, leaf_fn, j, d - 1, b // 2, k + h, log)
            if b % 2 == 0:
                val = float(boxplus(a, c))
            else:
                bit = self._bits(j, (b - 1) * h, b * h)[k]
                val = c - a if bit else c + a
        memo[key] = val
        return val

    def inner(self, j, position):
        n = log2_int(self.spec.L)
        return self._node(self.memo, lambda j_, k: float(self.leaf[j_, k]), j, n, position, 0, True)

    def source(self, j, position):
        n = log2_int(self.spec.L)
        return self._node(self.src_memo, lambda j_, k: self.src_leaf, j, n, position, 0, False)

    def _outer(self, i, d, b, k, lam0, T):
        key = (i, d, b, k)
        if key in self.outer_memo:
            return self.outer_memo[key]
        m = log2_int(self.spec.M)
        if d == m:
            self._activate(("outer", i, b))
        if d == 0:
            val = lam0(k)
        else:
            h = self.spec.M >> d
            a = self._outer(i, d - 1, b // 2, k, lam0, T)
            c = self._outer(i, d - 1, b // 2, k + h, lam0, T)
            if b % 2 == 0:
                val = float(boxplus(a, c))
            else:
                bit = polar_transform(T[(b - 1) * h:b * h].astype(np.uint8))[k]
                val = c - a if bit else c + a
        self.outer_memo[key] = val
        return val

    def run(self):
        spec = self.spec
        M = spec.M
        rules = spec.shaper.rules()
        m = log2_int(M)
        T_all = np.zeros((spec.K, M), dtype=np.uint8)
        prev = 0
        for i, e in enumerate(spec.extractor):
            self.level = i
            for j in range(M):
                for pos in range(prev, e):
                    lam = self.source(j, pos)
                    if rules[pos] == ARGMAX:
                        self.u[j, pos] = 0 if lam >= 0 else 1
                    else:
                        p0 = 1.0 / (1.0 + math.exp(-lam)) if lam > -700 else 0.0
                        self.u[j, pos] = 0 if self.unif[j, pos] < p0 else 1
            fs = spec.frozen[i]
            fvals = dict(zip(fs.positions, fs.frozen_values if self.frozen_values is None
                             else self.frozen_values[i]))
            T = np.zeros(M, dtype=np.uint8)
            for b in range(M):
                lam = self._outer(i, m, b, 0, lambda k: self.inner(k, e), T)
                if math.isnan(lam):
                    raise DecodeFailure(f"impossible evidence at level {i}")
                T[b] = fvals[b] if b in fvals else (0 if lam >= 0 else 1)
            v = polar_transform(T)
            self.u[:, e] = v
            T_all[i] = T
            prev = e + 1
        self.level = None
        return extract_message(spec, T_all)


def figure_coordinates(spec, key):
    """(column, row) of a node in the decoder diagram layout (rows 1-based).

    Inner nodes sit in columns ``n_L - d + 2`` read right to left from the
    channel side; outer leaves of level ``i`` sit in column ``i``.
    """
    L = spec.L
    if key[0] == "outer":
        _, i, b = key
        return (i, b * L + spec.extractor[i] + 1)
    _, j, d, b, k = key
    n = log2_int(L)
    return (n - d + 2, j * L + b * (L >> d) + k + 1)


# exhaustive oracles for tiny codes

def _all_messages(spec):
    k = spec.message_length
    return int_to_bits(np.arange(1 << k), k) if k else np.zeros((1, 0), dtype=np.uint8)


def map_decode_oracle(spec, y, common_seed=None, marginal=False):
    """Most likely message given ``y`` by enumeration (N <= 12).

    By default the common randomness is known, as it is to the decoder, so
    each message maps to one codeword.  With ``marginal=True`` the shaper's
    internal bits are summed out under their exact conditional law instead.
    Ties go to the message with the smaller integer value.
    """
    if spec.N > 12:
        raise InvalidArgument("exhaustive decoding limited to N <= 12")
    y = np.asarray(y).reshape(-1)
    w = spec.channel.transitions
    msgs = _all_messages(spec)
    best, best_ll = None, -math.inf
    if not marginal:
        for msg in msgs:
            x = encode(spec, msg, common_seed)
            ll = float(np.prod(w[x, y]))
            if ll > best_ll:
                best, best_ll = msg, ll
        return best
    table = _shaped_block_law(spec)
    yb = y.reshape(spec.M, spec.L)
    for msg in msgs:
        T = assemble_outer(spec, msg)
        V = polar_transform(T).T
        ll = 1.0
        for j in range(spec.M):
            xs, ps = table[tuple(V[j])]
            ll *= float((ps * np.prod(w[xs, yb[j]], axis=1)).sum())
        if ll > best_ll:
            best, best_ll = msg, ll
    return best


def _shaped_block_law(spec):
    """payload tuple -> (shaped words (n, L), probabilities (n,)) for one block."""
    sh = spec.shaper
    cond = shaper_conditional_law(sh.p, sh.L)
    rules = sh.rules()
    out = {}
    for payload in itertools.product((0, 1), repeat=sh.K):
        words = [(0, 1.0)]          # prefix as an integer, probability
        it = iter(payload)
        for i in range(sh.L):
            nxt = []
            bit = next(it) if rules[i] == GIVEN else None
            for v, pr in words:
                c0 = cond[i][v]
                if rules[i] == GIVEN:
                    nxt.append((2 * v + bit, pr))
                elif rules[i] == SAMPLE:
                    nxt.extend([(2 * v, pr * c0), (2 * v + 1, pr * (1 - c0))])
                else:
                    nxt.append((2 * v + (0 if c0 >= 0.5 else 1), pr))
            words = [(v, pr) for v, pr in nxt if pr > 0]
        u = int_to_bits(np.array([v for v, _ in words]), sh.L)
        out[payload] = (polar_transform(u), np.array([pr for _, pr in words]))
    return out

"""Polarized conditional entropies and the index sets built from them."""
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import joint_leaf_llr, source_leaf_llr, transmit_with_uniforms
from .core import (InvalidArgument, RandomStream, bernoulli_product, bits_to_int, int_to_bits,
                   log2_int, polar_transform)
from .sc import genie_llrs

_LN2 = math.log(2.0)
SLACK = 1e-9
FORMAT_VERSION = 1


def bit_costs(llr, bits):
    """-log2 P(bit) for each LLR, i.e. the realized conditional surprisal."""
    s = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    with np.errstate(invalid="ignore", over="ignore"):
        return np.logaddexp(0.0, -s * llr) / _LN2


def _chunk(total, width, budget=1 << 21):
    step = max(1, budget // max(1, width))
    for s in range(0, total, step):
        yield s, min(total, s + step)


# inner (source) entropies

def source_entropies_exact(p, L):
    """Exact H(U_i | U_0 .. U_{i-1}) for U = X G_L, X iid Bern(p), L <= 16."""
    log2_int(L)
    if L > 16:
        raise InvalidArgument("exact enumeration limited to L <= 16")
    px = bernoulli_product(p, L)
    u = polar_transform(int_to_bits(np.arange(1 << L), L))
    pu = np.zeros(1 << L)
    np.add.at(pu, bits_to_int(u), px)
    h = np.zeros(L + 1)
    for i in range(1, L + 1):
        marg = pu.reshape(1 << i, -1).sum(axis=1)
        nz = marg[marg > 0]
        h[i] = float(-(nz * np.log2(nz)).sum())
    return np.diff(h)


@dataclass
class EntropyEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    total: float
    total_stderr: float
    samples: int

    def clipped(self):
        return np.clip(self.mean, 0.0, 1.0)


def source_entropies_mc(p, L, samples, stream):
    """Monte Carlo estimate of H(U_i | U^{i-1}) from genie source LLRs.

    Each sample draws X ~ Bern(p)^L and averages the surprisal of the
    realized U_i under its exact conditional law.  The per-sample sum of
    surprisals equals -log2 P(X), which gives the standard error of the sum.
    """
    log2_int(L)
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    lam = source_leaf_llr(p)
    s1 = np.zeros(L)
    s2 = np.zeros(L)
    t1 = t2 = 0.0
    gen = stream.generator
    for a, b in _chunk(samples, L * (1 + int(math.log2(L)))):
        x = (gen.random((b - a, L)) < p).astype(np.uint8)
        u = polar_transform(x)
        c = bit_costs(genie_llrs(np.full((b - a, L), lam), u), u)
        s1 += c.sum(axis=0)
        s2 += (c * c).sum(axis=0)
        tot = c.sum(axis=1)
        t1 += tot.sum()
        t2 += (tot * tot).sum()
    n = samples
    mean = s1 / n
    var = np.maximum(s2 / n - mean ** 2, 0.0)
    tm = t1 / n
    tvar = max(t2 / n - tm ** 2, 0.0)
    den = max(n - 1, 1)
    return EntropyEstimate(mean, np.sqrt(var / den), tm, math.sqrt(tvar / den), n)


# index sets

@dataclass
class IndexSets:
    L: int
    entropies: np.ndarray
    random_set: list
    deterministic_set: list
    leftover_set: list
    epsilon: float

    def to_dict(self):
        return {"format": "polarshape.IndexSets", "version": FORMAT_VERSION,
                "L": self.L, "epsilon": self.epsilon,
                "entropies": [float(v) for v in self.entropies],
                "random_set": list(self.random_set),
                "deterministic_set": list(self.deterministic_set),
                "leftover_set": list(self.leftover_set)}

    @classmethod
    def from_dict(cls, d):
        _check_format(d, "polarshape.IndexSets")
        return cls(int(d["L"]), np.asarray(d["entropies"], dtype=np.float64),
                   [int(v) for v in d["random_set"]],
                   [int(v) for v in d["deterministic_set"]],
                   [int(v) for v in d["leftover_set"]], float(d["epsilon"]))


def _check_format(d, name):
    if d.get("format") != name:
        raise InvalidArgument(f"expected format {name!r}, got {d.get('format')!r}")
    if int(d.get("version", -1)) > FORMAT_VERSION:
        raise InvalidArgument(f"unsupported {name} version {d.get('version')}")


def build_index_sets(entropies, epsilon):
    """Threshold partition: random (H >= 1 - eps), deterministic (H <= eps), leftover."""
    if not 0.0 < epsilon < 0.5:
        raise InvalidArgument("epsilon must lie in (0, 0.5)")
    h = np.asarray(entropies, dtype=np.float64)
    if np.any(h < -SLACK) or np.any(h > 1 + SLACK) or np.any(np.isnan(h)):
        raise InvalidArgument("entropies must lie in [0, 1]")
    h = np.clip(h, 0.0, 1.0)
    L = h.size
    log2_int(L)
    r = np.flatnonzero(h >= 1 - epsilon)
    d = np.flatnonzero(h <= epsilon)
    a = np.flatnonzero((h < 1 - epsilon) & (h > epsilon))
    return IndexSets(L, h, r.tolist(), d.tolist(), a.tolist(), float(epsilon))


@dataclass
class ExtractorSet:
    K: int
    indices: list


def choose_extractor_set(entropies, K):
    """The K highest-entropy positions (ties to the smaller index), ascending."""
    h = np.asarray(entropies, dtype=np.float64)
    if not 1 <= K <= h.size:
        raise InvalidArgument(f"K={K} outside [1, {h.size}]")
    order = np.lexsort((np.arange(h.size), -h))
    return ExtractorSet(int(K), sorted(int(i) for i in order[:K]))


# outer layer

@dataclass
class FrozenSet:
    level: int
    M: int
    positions: list
    frozen_values: list

    def to_dict(self):
        return {"format": "polarshape.FrozenSet", "version": FORMAT_VERSION,
                "level": self.level, "M": self.M,
                "positions": list(self.positions),
                "frozen_values": [int(v) for v in self.frozen_values]}

    @classmethod
    def from_dict(cls, d):
        _check_format(d, "polarshape.FrozenSet")
        fs = cls(int(d["level"]), int(d["M"]), [int(v) for v in d["positions"]],
                 [int(v) for v in d["frozen_values"]])
        fs.validate()
        return fs

    def validate(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        if pos.size and (np.any(np.diff(pos) <= 0) or pos[0] < 0 or pos[-1] >= self.M):
            raise InvalidArgument("frozen positions must be increasing inside [0, M)")
        if len(self.frozen_values) != pos.size:
            raise InvalidArgument("one frozen value per frozen position")

    @property
    def data_positions(self):
        mask = np.ones(self.M, dtype=bool)
        mask[list(self.positions)] = False
        return np.flatnonzero(mask).tolist()


@dataclass
class OuterConstruction:
    frozen_sets: list
    entropies: np.ndarray        # (K, M)
    stderr: np.ndarray           # (K, M)
    genie_error: np.ndarray      # (K, M) per-position genie bit-error rate
    level_fer: np.ndarray        # (K,) genie frame error over data positions
    samples: int
    extra: dict = field(default_factory=dict)


def outer_statistics(p, channel, extractor, M, L, samples, stream):
    """Genie statistics of the outer layer.

    For each level ``i`` (extractor position ``e_i``) the super-channel
    input is ``V_i = U_{e_i}`` and its output is ``Y^L`` together with the
    full true prefix ``U_0 .. U_{e_i - 1}`` of the inner block, which is what
    the decoder holds when it reaches that level.  Returns per-sample cost
    sums and the packed per-position genie error bits.
    """
    E = np.asarray(extractor, dtype=np.intp)
    K = E.size
    log2_int(M)
    s1 = np.zeros((K, M))
    s2 = np.zeros((K, M))
    errs = []
    gen = stream.generator
    width = M * L * (1 + int(math.log2(L))) + K * M * (1 + int(math.log2(M)))
    for a, b in _chunk(samples, width, budget=1 << 22):
        S = b - a
        x = (gen.random((S * M, L)) < p).astype(np.uint8)
        y = transmit_with_uniforms(channel, x, gen.random((S * M, L)))
        u = polar_transform(x)
        inner = genie_llrs(joint_leaf_llr(channel, p, y), u)[:, E]
        v = u[:, E].reshape(S, M, K).transpose(0, 2, 1).reshape(S * K, M)
        lv = inner.reshape(S, M, K).transpose(0, 2, 1).reshape(S * K, M)
        t = polar_transform(v)
        lt = genie_llrs(lv, t)
        c = bit_costs(lt, t).reshape(S, K, M)
        s1 += c.sum(axis=0)
        s2 += (c * c).sum(axis=0)
        with np.errstate(invalid="ignore"):
            dec = (~(lt >= 0)).astype(np.uint8)
        errs.append(np.packbits((dec != t).reshape(S, K, M), axis=-1))
    n = samples
    mean = s1 / n
    var = np.maximum(s2 / n - mean ** 2, 0.0)
    se = np.sqrt(var / max(n - 1, 1))
    return mean, se, np.concatenate(errs, axis=0)


def outer_frozen_sets(p, channel, extractor, M, epsilon_outer, samples, stream,
                      L=None, target_rate=None, frozen_stream=None, frozen_zero=False):
    """Frozen sets per level from Monte Carlo genie entropies.

    Positions with estimated entropy >= ``epsilon_outer`` are frozen.  With
    ``target_rate`` (data bits per channel use) the lowest-entropy positions
    across all levels are kept as data instead, ``round(target_rate M L)`` of
    them.  Frozen values are uniform bits from ``frozen_stream`` or zeros.
    """
    if L is None:
        raise InvalidArgument("inner block length L is required")
    E = list(extractor)
    K = len(E)
    mean, se, packed = outer_statistics(p, channel, E, M, L, samples, stream)
    h = np.clip(mean, 0.0, 1.0)
    if target_rate is None:
        frozen = h >= epsilon_outer
    else:
        ndata = int(round(target_rate * M * L))
        if not 0 <= ndata <= K * M:
            raise InvalidArgument(f"target rate {target_rate} not reachable with K={K}")
        lev, pos = np.meshgrid(np.arange(K), np.arange(M), indexing="ij")
        order = np.lexsort((pos.ravel(), lev.ravel(), h.ravel()))
        frozen = np.ones(K * M, dtype=bool)
        frozen[order[:ndata]] = False
        frozen = frozen.reshape(K, M)
    if frozen_stream is None:
        frozen_stream = RandomStream(0, ("frozen",))
    sets = []
    for i in range(K):
        pos = np.flatnonzero(frozen[i]).tolist()
        if frozen_zero:
            vals = [0] * len(pos)
        else:
            vals = frozen_stream.child(i).bits(len(pos)).tolist()
        sets.append(FrozenSet(i, M, pos, vals))
    err = np.unpackbits(packed, axis=-1, count=M).astype(bool)
    genie_error = err.mean(axis=0)
    level_fer = np.array([(err[:, i, ~frozen[i]]).any(axis=1).mean() for i in range(K)])
    return OuterConstruction(sets, h, se, genie_error, level_fer, samples,
                             {"frame_error_union": float(
                                 (err & ~frozen[None]).any(axis=(1, 2)).mean())})

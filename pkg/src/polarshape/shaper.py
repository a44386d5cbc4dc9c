"""Polarization-based shaper, its exact laws, and Gallager's baseline shaper."""
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import mutual_information, source_leaf_llr
from .core import (InvalidArgument, as_bits, bernoulli_product, bits_to_int, int_to_bits, log2_int,
                   polar_transform)
from .sc import ARGMAX, GIVEN, SAMPLE, SCTree

STOCHASTIC = "stochastic"
DERANDOMIZED = "derandomized"


@dataclass
class ShaperSpec:
    """Reverse extractor over ``L`` positions.

    Positions in ``extractor`` carry payload bits.  The rest are sampled
    from their conditional law given the prefix, except that in
    derandomized mode positions in ``deterministic_set`` take the more
    likely value.
    """

    L: int
    extractor: list
    p: float
    mode: str = STOCHASTIC
    deterministic_set: list = field(default_factory=list)

    def __post_init__(self):
        log2_int(self.L)
        self.extractor = [int(i) for i in self.extractor]
        self.deterministic_set = [int(i) for i in self.deterministic_set]
        e = np.asarray(self.extractor, dtype=np.int64)
        if e.size and (np.any(np.diff(e) <= 0) or e[0] < 0 or e[-1] >= self.L):
            raise InvalidArgument("extractor positions must be increasing inside [0, L)")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidArgument("p outside [0, 1]")
        if self.mode not in (STOCHASTIC, DERANDOMIZED):
            raise InvalidArgument(f"unknown shaper mode {self.mode!r}")
        if self.mode == DERANDOMIZED and set(self.deterministic_set) & set(self.extractor):
            raise InvalidArgument("deterministic set must not meet the extractor set")

    @property
    def K(self):
        return len(self.extractor)

    def rules(self):
        r = np.full(self.L, SAMPLE, dtype=np.int8)
        if self.mode == DERANDOMIZED:
            r[self.deterministic_set] = ARGMAX
        r[self.extractor] = GIVEN
        return r

    @property
    def randomness_per_block(self):
        """Uniform variates consumed per shaped block."""
        return int((self.rules() == SAMPLE).sum())

    def to_dict(self):
        return {"L": self.L, "extractor": list(self.extractor), "p": self.p,
                "mode": self.mode, "deterministic_set": list(self.deterministic_set)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["L"]), d["extractor"], float(d["p"]), d.get("mode", STOCHASTIC),
                   d.get("deterministic_set", []))


def source_lr(p, prefix, L):
    """log P(U_i = 0 | prefix) / P(U_i = 1 | prefix) with i = len(prefix)."""
    prefix = as_bits(prefix).reshape(-1)
    i = prefix.size
    if i >= L:
        raise InvalidArgument("prefix must be shorter than L")
    t = SCTree(np.full((1, L), source_leaf_llr(p)))
    given = np.zeros((1, L), dtype=np.uint8)
    given[0, :i] = prefix
    t.sweep(i, np.zeros(L, dtype=np.int8), given=given)
    return float(t.descend()[0])


def shape_blocks(spec, payload, unif):
    """Shape a batch: ``payload`` is ``(B, K)``, ``unif`` is ``(B, L)``.

    ``unif[b, i]`` is used only if position ``i`` is sampled.  Returns the
    shaped words ``x`` and the pre-transform words ``u``, both ``(B, L)``.
    """
    payload = as_bits(payload)
    if payload.ndim == 1:
        payload = payload[None, :]
    B = payload.shape[0]
    if payload.shape[1] != spec.K:
        raise InvalidArgument(f"expected {spec.K} payload bits, got {payload.shape[1]}")
    given = np.zeros((B, spec.L), dtype=np.uint8)
    given[:, spec.extractor] = payload
    t = SCTree(np.full((B, spec.L), source_leaf_llr(spec.p)))
    t.sweep(spec.L, spec.rules(), given=given, unif=np.broadcast_to(unif, (B, spec.L)))
    return t.x.copy(), t.u.copy()


def shape(spec, payload, stream):
    """Shape one block, drawing one variate per sampled position in order."""
    payload = as_bits(payload, spec.K).reshape(1, -1)
    rules = spec.rules()
    unif = np.zeros((1, spec.L))
    idx = np.flatnonzero(rules == SAMPLE)
    unif[0, idx] = stream.uniforms(idx.size)
    x, _ = shape_blocks(spec, payload, unif)
    return x[0]


# exact laws for small L

def _source_prefix_marginals(p, L):
    """marg[i][v] = P(U_0 .. U_{i-1} = bits of v) for U = X G_L."""
    pu = np.zeros(1 << L)
    np.add.at(pu, bits_to_int(polar_transform(int_to_bits(np.arange(1 << L), L))),
              bernoulli_product(p, L))
    return [pu.reshape(1 << i, -1).sum(axis=1) for i in range(L + 1)]


def shaper_conditional_law(p, L):
    """cond[i][v] = P(U_i = 0 | prefix v) by enumeration (1 on zero-mass prefixes)."""
    if L > 16:
        raise InvalidArgument("exact laws limited to L <= 16")
    marg = _source_prefix_marginals(p, L)
    cond = []
    for i in range(L):
        num = marg[i + 1][0::2]
        den = marg[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0)
        cond.append(np.clip(c, 0.0, 1.0))
    return cond


def shaper_prefix_law(spec, cond=None):
    """Exact law of the shaper's pre-transform word under uniform payload.

    Returns the list of prefix laws ``law[i]`` (length ``2^i``) and the
    conditional table used.
    """
    if spec.L > 16:
        raise InvalidArgument("exact laws limited to L <= 16")
    if cond is None:
        cond = shaper_conditional_law(spec.p, spec.L)
    rules = spec.rules()
    law = [np.ones(1)]
    for i in range(spec.L):
        prev = law[-1]
        nxt = np.empty(2 * prev.size)
        if rules[i] == GIVEN:
            p0 = np.full(prev.size, 0.5)
        elif rules[i] == SAMPLE:
            p0 = cond[i]
        else:
            p0 = (cond[i] >= 0.5).astype(np.float64)
        nxt[0::2] = prev * p0
        nxt[1::2] = prev * (1.0 - p0)
        law.append(nxt)
    return law, cond


def shaper_output_distribution(spec):
    """Exact law of the shaped word over ``2^L`` atoms (position 0 = MSB)."""
    law, _ = shaper_prefix_law(spec)
    L = spec.L
    out = np.zeros(1 << L)
    x = bits_to_int(polar_transform(int_to_bits(np.arange(1 << L), L)))
    np.add.at(out, x, law[-1])
    return out


def deterministic_choice_confidence(spec):
    """Smallest P(chosen value | prefix) over argmax positions and reachable prefixes.

    Returns a dict ``{position: min probability}``.
    """
    law, cond = shaper_prefix_law(spec)
    res = {}
    for i in np.flatnonzero(spec.rules() == ARGMAX):
        reach = law[i] > 0
        c = cond[i][reach]
        res[int(i)] = float(np.maximum(c, 1.0 - c).min()) if c.size else 1.0
    return res


# Gallager's shaper

@dataclass(frozen=True)
class GallagerSpec:
    q: int
    k: int

    def __post_init__(self):
        log2_int(self.q)
        if not 0 <= self.k <= self.q:
            raise InvalidArgument("k must lie in [0, q]")

    @property
    def probability(self):
        return self.k / self.q

    @property
    def m(self):
        return log2_int(self.q)


def best_rational_approx(p, q):
    """k in [0, q] minimizing |p - k/q|; ties go to the smaller k."""
    if q < 2:
        raise InvalidArgument("q must be >= 2")
    log2_int(q)
    k = math.floor(p * q)
    if p * q - k > 0.5:
        k += 1
    return int(min(max(k, 0), q))


def gallager_shape(spec, u):
    """1 iff the bits ``u`` (first bit most significant) encode an integer below k."""
    u = as_bits(u, spec.m)
    return (bits_to_int(u) < spec.k).astype(np.uint8)


def gallager_rate_gap(channel, p, q):
    """(|I(p) - I(k/q)|, (3/q) log2 q + 4/q) with k the best approximation."""
    k = best_rational_approx(p, q)
    gap = abs(mutual_information(channel, p) - mutual_information(channel, k / q))
    return gap, 3.0 / q * math.log2(q) + 4.0 / q

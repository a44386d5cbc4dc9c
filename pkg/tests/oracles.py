"""Exhaustive oracles shared by the decoder tests and the acceptance suite."""
import math

import numpy as np

from polarshape.code import (CodeSpec, DecodeFailure, decode, decode_frame, encode,
                             map_decode_oracle)
from polarshape.core import bits_to_int, int_to_bits, polar_transform
from polarshape.polarization import FrozenSet, build_index_sets, source_entropies_exact
from polarshape.shaper import STOCHASTIC


def tiny_spec(channel, p, L, M, extractor, frozen=None, mode=STOCHASTIC, eps=0.2, seed=7):
    """Hand-built code; ``frozen`` maps level -> {position: value}."""
    frozen = frozen or {}
    sets = build_index_sets(source_entropies_exact(p, L), eps)
    fs = []
    for i in range(len(extractor)):
        f = frozen.get(i, {})
        pos = sorted(f)
        fs.append(FrozenSet(i, M, pos, [f[k] for k in pos]))
    seeds = {"construction": seed, "frozen": seed, "common": seed}
    return CodeSpec(L, M, p, channel, sets, extractor, fs, mode, seeds)


def posterior_table(channel, p, y):
    """P(U = u, y) for every u, indexed by the integer of u (first bit most significant)."""
    L = len(y)
    X = int_to_bits(np.arange(1 << L), L)
    w = channel.transitions
    px = np.prod(np.where(X == 1, p, 1 - p), axis=1) * np.prod(w[X, np.asarray(y)], axis=1)
    pu = np.zeros(1 << L)
    np.add.at(pu, bits_to_int(polar_transform(X)), px)
    return pu


def enum_llrs(pu, i):
    """LLR of U_i for every prefix of length i from the joint table."""
    marg = pu.reshape(1 << (i + 1), -1).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(marg[0::2]) - np.log(marg[1::2])


def check_llr(got, ref):
    if np.isnan(ref):
        return False
    if np.isinf(ref):
        return got == ref
    return abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


def outcome(fn):
    try:
        return tuple(fn())
    except DecodeFailure:
        return "failure"


def outer_posterior_llr(lam, decided, b):
    """LLR of T_b given T_<b = decided under independent V_j with leaf LLRs lam."""
    M = lam.size
    V = int_to_bits(np.arange(1 << M), M)
    p1 = 1.0 / (1.0 + np.exp(lam))
    w = np.prod(np.where(V == 1, p1, 1 - p1), axis=1)
    T = polar_transform(V)
    keep = np.all(T[:, :b] == decided[:b], axis=1)
    p0 = w[keep & (T[:, b] == 0)].sum()
    q1 = w[keep & (T[:, b] == 1)].sum()
    return math.log(p0) - math.log(q1)


def exact_fers(spec, seed):
    """Exact FER of the SC decoder and of the MAP oracle over all messages and outputs."""
    w = spec.channel.transitions
    ny = w.shape[1]
    Y = np.array(np.unravel_index(np.arange(ny ** spec.N), (ny,) * spec.N)).T
    msgs = int_to_bits(np.arange(1 << spec.message_length), spec.message_length)
    sc_dec = [outcome(lambda: decode(spec, y, seed)) for y in Y]
    map_dec = [tuple(map_decode_oracle(spec, y, seed)) for y in Y]
    sc = mp = 0.0
    for msg in msgs:
        py = np.prod(w[encode(spec, msg, seed), Y], axis=1)
        m = tuple(msg)
        sc += sum(pr for pr, d in zip(py, sc_dec) if d != m)
        mp += sum(pr for pr, d in zip(py, map_dec) if d != m)
    return sc / len(msgs), mp / len(msgs)


def sc_step_mismatches(spec, seed):
    """Compare every SC step with the enumerated posterior for all outputs.

    Returns (steps checked, mismatches).  Inner steps compare the leaf LLR of
    each block with the block posterior given its prefix; outer steps compare
    the LLR of each T_b and, at data positions, the decision with its argmax.
    """
    ch, M, L = spec.channel, spec.M, spec.L
    ny = ch.transitions.shape[1]
    checked = bad = 0
    for y in np.array(np.unravel_index(np.arange(ny ** spec.N), (ny,) * spec.N)).T:
        try:
            res = decode_frame(spec, y, seed, trace=True)
        except DecodeFailure:
            continue
        for step in res.trace:
            i, e = step["level"], step["position"]
            for j in range(M):
                pu = posterior_table(ch, spec.p, y.reshape(M, L)[j])
                v = bits_to_int(step["prefix"][j]) if e else 0
                checked += 1
                bad += not check_llr(step["inner_llr"][j], enum_llrs(pu, e)[v])
            lam, T = step["inner_llr"], step["T"]
            if np.any(np.isinf(lam)):
                continue
            for b in range(M):
                ref = outer_posterior_llr(lam, T, b)
                checked += 1
                bad += not check_llr(step["outer_llr"][b], ref)
                if b not in spec.frozen[i].positions and abs(ref) > 1e-9:
                    bad += int(T[b] != (0 if ref > 0 else 1))
    return checked, bad

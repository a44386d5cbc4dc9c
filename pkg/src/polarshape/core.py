"""Bit blocks, the polar transform, information measures and seeded randomness.

Bit convention: position 0 is the first bit, and the length-2 kernel maps
``(u0, u1) -> (u0 ^ u1, u1)``.  Larger transforms are Kronecker powers of that
kernel without bit reversal.
"""
import hashlib
import math

import numpy as np

from . import _backend


class InvalidArgument(ValueError):
    pass


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def log2_int(n):
    if not is_power_of_two(n):
        raise InvalidArgument(f"length {n} is not a power of two")
    return int(n).bit_length() - 1


def as_bits(bits, length=None):
    """Validate and return a uint8 bit array (a copy is not guaranteed)."""
    a = np.asarray(bits)
    if a.dtype != np.uint8:
        if a.size and not np.all((a == 0) | (a == 1)):
            raise InvalidArgument("bits must be 0 or 1")
        a = a.astype(np.uint8)
    elif a.size and a.max() > 1:
        raise InvalidArgument("bits must be 0 or 1")
    if length is not None and a.shape[-1] != length:
        raise InvalidArgument(f"expected {length} bits, got {a.shape[-1]}")
    return a


class BitBlock:
    """A binary word whose length is a power of two."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        b = as_bits(bits).reshape(-1)
        log2_int(b.size)
        self.bits = b.copy()

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, BitBlock):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return "BitBlock(" + "".join(map(str, self.bits.tolist())) + ")"


def polar_transform(u):
    """Return ``u G_L`` over GF(2).

    ``u`` may be a single word or a 2-D batch of words (one per row).  The
    transform is its own inverse.
    """
    if isinstance(u, BitBlock):
        return BitBlock(polar_transform(u.bits))
    a = as_bits(u)
    single = a.ndim == 1
    x = np.array(a.reshape(1, -1) if single else a, dtype=np.uint8, order="C", copy=True)
    log2_int(x.shape[1])
    _backend.polar_transform_inplace(x)
    return x[0] if single else x


def polar_matrix(L):
    """Explicit generator matrix, for tests and tiny instances."""
    n = log2_int(L)
    g = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, g)
    return G


def binary_entropy(p):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy(pmf):
    """Shannon entropy in bits, with 0 log 0 = 0."""
    q = np.asarray(pmf, dtype=np.float64)
    nz = q[q > 0]
    return float(-(nz * np.log2(nz)).sum())


def check_pmf(pmf, tol=1e-12):
    q = np.asarray(pmf, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise InvalidArgument("pmf must be a non-empty vector")
    if np.any(q < 0) or np.any(q > 1) or abs(q.sum() - 1.0) > tol:
        raise InvalidArgument("pmf entries must lie in [0, 1] and sum to 1")
    return q


def variational_distance(P, Q):
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if P.shape != Q.shape:
        raise InvalidArgument("alphabet size mismatch")
    return 0.5 * float(np.abs(P - Q).sum())


def kl_divergence(P, Q):
    """D(P || Q) in bits; infinite if P is not dominated by Q."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    m = P > 0
    if np.any(Q[m] == 0):
        return math.inf
    return float((P[m] * np.log2(P[m] / Q[m])).sum())


def bernoulli_product(p, L):
    """Law of L iid Bern(p) bits, indexed by the integer with bit 0 as MSB."""
    w = np.array([bin(v).count("1") for v in range(1 << L)])
    return (p ** w) * ((1 - p) ** (L - w))


def int_to_bits(v, L):
    """Bits of integers ``v`` with position 0 as the most significant bit."""
    v = np.asarray(v, dtype=np.int64)
    shifts = np.arange(L - 1, -1, -1)
    return ((v[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_int(bits):
    b = np.asarray(bits, dtype=np.int64)
    L = b.shape[-1]
    return (b << np.arange(L - 1, -1, -1)).sum(axis=-1)


# seeded randomness

def _label_word(label):
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise InvalidArgument("stream labels must be nonnegative")
        return int(label)
    h = hashlib.blake2b(str(label).encode(), digest_size=8).digest()
    return int.from_bytes(h, "little")


class RandomStream:
    """Deterministic uniform variates keyed by ``(seed, stream_id)``.

    ``stream_id`` is a tuple of labels (strings or nonnegative ints), e.g.
    ``("shaper", frame)``.  The generator is counter based (Philox) so a
    stream can be rebuilt from its key alone, in any process.
    """

    def __init__(self, seed, stream_id=()):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")
        if not isinstance(stream_id, tuple):
            stream_id = (stream_id,)
        self.seed = seed
        self.stream_id = stream_id
        key = tuple(_label_word(x) for x in stream_id)
        ss = np.random.SeedSequence(seed, spawn_key=key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *labels):
        return RandomStream(self.seed, self.stream_id + tuple(labels))

    def uniforms(self, n):
        return self._gen.random(n)

    def bits(self, n):
        return self._gen.integers(0, 2, size=n, dtype=np.uint8)

    @property
    def generator(self):
        return self._gen

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id!r})"


def uniform_variate(stream):
    """Next variate in [0, 1) from ``stream``; advances it."""
    return float(stream.uniforms(1)[0])


def derive_seed(seed, *labels):
    """A 64-bit seed derived from a master seed and labels."""
    s = RandomStream(seed, tuple(labels))
    return int(s.generator.integers(0, 2 ** 63, dtype=np.int64))

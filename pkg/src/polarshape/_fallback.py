"""Pure numpy implementations of the hot successive-cancellation kernels.

Every function works on a batch of ``B`` independent trees stored row-wise.
Layouts are shared with the compiled ``_kernels`` module so the two are
drop-in replacements for each other.

``alpha`` holds the LLRs of the currently active node at every depth; depth
``d`` (vector length ``N >> d``) starts at column ``2N - 2(N >> d)``.
``xbuf`` holds partial sums in place: after leaf ``i`` is pushed, the block of
every finished subtree contains that subtree's re-encoded bits.
"""
import numpy as np

GIVEN = 0
SAMPLE = 1
ARGMAX = 2


def _off(N, d):
    return 2 * N - 2 * (N >> d)


def boxplus(a, b):
    """Exact check-node combination ``log((1 + e^(a+b)) / (e^a + e^b))``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        out = np.minimum(np.abs(a), np.abs(b)) * np.sign(a) * np.sign(b)
        fin = np.isfinite(a) & np.isfinite(b)
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return out + np.where(fin, corr, 0.0)


def prob_zero(lam):
    """P(bit = 0) for a log-likelihood ratio, computed without overflow."""
    lam = np.asarray(lam, dtype=np.float64)
    with np.errstate(invalid="ignore", over="ignore"):
        e = np.exp(-np.abs(lam))
        return np.where(lam >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def polar_transform_inplace(a):
    B, N = a.shape
    h = 1
    while h < N:
        v = a.reshape(B, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h <<= 1


def sc_descend(alpha, xbuf, i, n):
    N = 1 << n
    if n == 0:
        return
    if i == 0:
        d = 0
    else:
        t = (i & -i).bit_length() - 1
        d = n - 1 - t
        m = N >> d
        h = m >> 1
        s = i & ~(m - 1)
        o, o1 = _off(N, d), _off(N, d + 1)
        a = alpha[:, o:o + h]
        b = alpha[:, o + h:o + m]
        c = xbuf[:, s:s + h].astype(bool)
        alpha[:, o1:o1 + h] = b + np.where(c, -a, a)
        d += 1
    while d < n:
        m = N >> d
        h = m >> 1
        o, o1 = _off(N, d), _off(N, d + 1)
        alpha[:, o1:o1 + h] = boxplus(alpha[:, o:o + h], alpha[:, o + h:o + m])
        d += 1


def sc_climb(xbuf, i, n, bits):
    N = 1 << n
    xbuf[:, i] = bits
    m = 1
    while m < N and (i & m):
        s = i & ~(2 * m - 1)
        xbuf[:, s:s + m] ^= xbuf[:, s + m:s + 2 * m]
        m <<= 1


def sc_sweep(alpha, xbuf, u, llr, start, stop, n, rule, given, unif):
    N = 1 << n
    leaf = 2 * N - 2
    for i in range(start, stop):
        sc_descend(alpha, xbuf, i, n)
        lam = alpha[:, leaf]
        llr[:, i] = lam
        r = rule[i]
        if r == GIVEN:
            bits = given[:, i]
        elif r == SAMPLE:
            bits = (~(unif[:, i] < prob_zero(lam))).astype(np.uint8)
        else:
            bits = (~(lam >= 0)).astype(np.uint8)
        u[:, i] = bits
        sc_climb(xbuf, i, n, bits)

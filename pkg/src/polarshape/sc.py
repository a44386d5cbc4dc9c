"""Successive-cancellation engine over the polar transform tree.

The tree for length ``N = 2^n`` splits a node vector ``lam`` of length ``m``
into halves ``a = lam[:m/2]`` and ``b = lam[m/2:]``.  The left child sees
``boxplus(a, b)``; once the left subtree is finished with re-encoded bits
``c``, the right child sees ``b + (-1)^c a``.  Leaves are visited in natural
order, so leaf ``i`` is the LLR of ``U_i`` given the leaf evidence and
``U_0 .. U_{i-1}``.
"""
import numpy as np

from . import _backend
from ._backend import ARGMAX, GIVEN, SAMPLE
from ._fallback import boxplus, prob_zero
from .core import log2_int

__all__ = ["SCTree", "genie_llrs", "GIVEN", "SAMPLE", "ARGMAX", "boxplus", "prob_zero"]


class SCTree:
    """Batch of ``B`` SC trees sharing one schedule.

    ``leaf`` is a ``(B, N)`` array of leaf LLRs.  Decisions are made in
    order with :meth:`sweep` (rule-driven) or :meth:`descend` / :meth:`push`
    (caller-driven).  After all ``N`` decisions ``x`` holds ``u G_N`` per row.
    """

    def __init__(self, leaf, kernels=None):
        leaf = np.asarray(leaf, dtype=np.float64)
        if leaf.ndim == 1:
            leaf = leaf[None, :]
        self.B, self.N = leaf.shape
        self.n = log2_int(self.N)
        self.k = kernels if kernels is not None else _backend
        self.alpha = np.zeros((self.B, 2 * self.N - 1))
        self.alpha[:, :self.N] = leaf
        self.xbuf = np.zeros((self.B, self.N), dtype=np.uint8)
        self.u = np.full((self.B, self.N), 255, dtype=np.uint8)
        self.llr = np.full((self.B, self.N), np.nan)
        self.pos = 0
        self._ready = False
        self._given0 = None
        self._unif0 = None

    @property
    def x(self):
        """Re-encoded bits; complete only once every leaf is decided."""
        return self.xbuf

    def _zeros(self):
        if self._given0 is None:
            self._given0 = np.zeros((self.B, self.N), dtype=np.uint8)
            self._unif0 = np.zeros((self.B, self.N))
        return self._given0, self._unif0

    def descend(self):
        """LLR column of the current leaf."""
        if self.pos >= self.N:
            raise IndexError("all leaves already decided")
        if not self._ready:
            self.k.sc_descend(self.alpha, self.xbuf, self.pos, self.n)
            self.llr[:, self.pos] = self.alpha[:, 2 * self.N - 2]
            self._ready = True
        return self.llr[:, self.pos].copy()

    def push(self, bits):
        """Fix the current leaf to ``bits`` (one per row) and advance."""
        self.descend()
        b = np.ascontiguousarray(np.broadcast_to(np.asarray(bits, dtype=np.uint8), (self.B,)))
        self.u[:, self.pos] = b
        self.k.sc_climb(self.xbuf, self.pos, self.n, b)
        self.pos += 1
        self._ready = False

    def sweep(self, stop, rule, given=None, unif=None):
        """Decide leaves ``pos .. stop-1`` with per-position ``rule``.

        ``rule[i]`` is GIVEN (take ``given[:, i]``), SAMPLE (bit 0 iff
        ``unif[:, i] < P(0)``) or ARGMAX (bit 0 iff LLR >= 0).
        """
        if stop <= self.pos:
            return
        if stop > self.N:
            raise IndexError("sweep past the last leaf")
        g0, u0 = (None, None)
        if given is None or unif is None:
            g0, u0 = self._zeros()
        given = g0 if given is None else np.ascontiguousarray(given, dtype=np.uint8)
        unif = u0 if unif is None else np.ascontiguousarray(unif, dtype=np.float64)
        rule = np.ascontiguousarray(rule, dtype=np.int8)
        self.k.sc_sweep(self.alpha, self.xbuf, self.u, self.llr, self.pos, stop,
                        self.n, rule, given, unif)
        self.pos = stop
        self._ready = False


def genie_llrs(leaf, u):
    """All leaf LLRs with the true bits ``u`` as the decided prefix.

    Breadth-first and fully vectorized over the batch: ``leaf`` and ``u``
    are ``(B, N)``.  Column ``i`` of the result is the LLR of ``U_i`` given
    the leaf evidence and ``u[:, :i]``.
    """
    leaf = np.asarray(leaf, dtype=np.float64)
    u = np.asarray(u, dtype=np.uint8)
    B, N = leaf.shape
    n = log2_int(N)
    # xs[k]: u with every aligned block of size 2^k transformed
    xs = [u]
    cur = u.copy()
    h = 1
    while h < N:
        v = cur.reshape(B, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        xs.append(cur.copy())
        h <<= 1
    lam = leaf.reshape(B, 1, N)
    for d in range(n):
        nodes = 1 << d
        m = N >> d
        h = m >> 1
        a = lam[:, :, :h]
        b = lam[:, :, h:]
        c = xs[n - d - 1].reshape(B, 2 * nodes, h)[:, 0::2, :].astype(bool)
        nxt = np.empty((B, 2 * nodes, h))
        nxt[:, 0::2, :] = boxplus(a, b)
        with np.errstate(invalid="ignore"):
            nxt[:, 1::2, :] = b + np.where(c, -a, a)
        lam = nxt
    return lam.reshape(B, N)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled successive-cancellation kernels.

Same layouts and semantics as ``polarshape._fallback``; see that module for
the description of the ``alpha`` / ``xbuf`` storage.
"""
from libc.math cimport exp, log1p, fabs, isnan, isfinite, NAN

DEF GIVEN = 0
DEF SAMPLE = 1
DEF ARGMAX = 2


cdef inline Py_ssize_t _off(Py_ssize_t N, int d) nogil:
    return 2 * N - 2 * (N >> d)


cdef inline double _boxplus(double a, double b) nogil:
    cdef double fa, fb, m, r
    if isnan(a) or isnan(b):
        return NAN
    fa = fabs(a)
    fb = fabs(b)
    m = fa if fa < fb else fb
    if m == 0.0:
        r = 0.0
    elif (a > 0) == (b > 0):
        r = m
    else:
        r = -m
    if isfinite(a) and isfinite(b):
        r += log1p(exp(-fabs(a + b))) - log1p(exp(-fabs(a - b)))
    return r


cdef inline double _prob_zero(double lam) nogil:
    cdef double e = exp(-fabs(lam))
    if lam >= 0:
        return 1.0 / (1.0 + e)
    return e / (1.0 + e)


def boxplus(double a, double b):
    return _boxplus(a, b)


def polar_transform_inplace(unsigned char[:, ::1] a):
    cdef Py_ssize_t B = a.shape[0], N = a.shape[1]
    cdef Py_ssize_t r, s, k, h
    with nogil:
        for r in range(B):
            h = 1
            while h < N:
                s = 0
                while s < N:
                    for k in range(s, s + h):
                        a[r, k] ^= a[r, k + h]
                    s += 2 * h
                h <<= 1


cdef void _descend(double[:, ::1] alpha, unsigned char[:, ::1] xbuf,
                   Py_ssize_t i, int n) nogil:
    cdef Py_ssize_t N = (<Py_ssize_t>1) << n
    cdef Py_ssize_t B = alpha.shape[0]
    cdef Py_ssize_t r, k, m, h, s, o, o1
    cdef int d, t
    cdef double a
    if n == 0:
        return
    if i == 0:
        d = 0
    else:
        t = 0
        while not ((i >> t) & 1):
            t += 1
        d = n - 1 - t
        m = N >> d
        h = m >> 1
        s = i & ~(m - 1)
        o = _off(N, d)
        o1 = _off(N, d + 1)
        for r in range(B):
            for k in range(h):
                a = alpha[r, o + k]
                if xbuf[r, s + k]:
                    a = -a
                alpha[r, o1 + k] = alpha[r, o + h + k] + a
        d += 1
    while d < n:
        m = N >> d
        h = m >> 1
        o = _off(N, d)
        o1 = _off(N, d + 1)
        for r in range(B):
            for k in range(h):
                alpha[r, o1 + k] = _boxplus(alpha[r, o + k], alpha[r, o + h + k])
        d += 1


cdef void _climb_row(unsigned char[:, ::1] xbuf, Py_ssize_t r, Py_ssize_t i,
                     int n, unsigned char bit) nogil:
    cdef Py_ssize_t N = (<Py_ssize_t>1) << n
    cdef Py_ssize_t m = 1, s, k
    xbuf[r, i] = bit
    while m < N and (i & m):
        s = i & ~(2 * m - 1)
        for k in range(s, s + m):
            xbuf[r, k] ^= xbuf[r, k + m]
        m <<= 1


def sc_descend(double[:, ::1] alpha, unsigned char[:, ::1] xbuf, Py_ssize_t i, int n):
    with nogil:
        _descend(alpha, xbuf, i, n)


def sc_climb(unsigned char[:, ::1] xbuf, Py_ssize_t i, int n, bits):
    cdef const unsigned char[::1] b = bits
    cdef Py_ssize_t r
    with nogil:
        for r in range(xbuf.shape[0]):
            _climb_row(xbuf, r, i, n, b[r])


def sc_sweep(double[:, ::1] alpha, unsigned char[:, ::1] xbuf,
             unsigned char[:, ::1] u, double[:, ::1] llr,
             Py_ssize_t start, Py_ssize_t stop, int n,
             const signed char[::1] rule, const unsigned char[:, ::1] given,
             const double[:, ::1] unif):
    cdef Py_ssize_t N = (<Py_ssize_t>1) << n
    cdef Py_ssize_t leaf = 2 * N - 2
    cdef Py_ssize_t B = alpha.shape[0]
    cdef Py_ssize_t i, r
    cdef double lam
    cdef unsigned char bit
    cdef signed char rl
    with nogil:
        for i in range(start, stop):
            _descend(alpha, xbuf, i, n)
            rl = rule[i]
            for r in range(B):
                lam = alpha[r, leaf]
                llr[r, i] = lam
                if rl == GIVEN:
                    bit = given[r, i]
                elif rl == SAMPLE:
                    bit = 0 if unif[r, i] < _prob_zero(lam) else 1
                else:
                    bit = 0 if lam >= 0 else 1
                u[r, i] = bit
                _climb_row(xbuf, r, i, n, bit)

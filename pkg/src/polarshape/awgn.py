"""Discrete constellations on the power-constrained AWGN channel."""
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal
from scipy.special import comb, logsumexp

from .core import InvalidArgument


class IntegrationError(RuntimeError):
    pass


def awgn_capacity(snr):
    """0.5 log2(1 + snr) bits per real channel use."""
    if snr < 0:
        raise InvalidArgument("snr must be nonnegative")
    return 0.5 * math.log2(1.0 + snr)


@dataclass
class Constellation:
    points: np.ndarray
    probs: np.ndarray
    m: int
    dyadic: bool = False
    # optional high-precision copies (mpmath) for tiny capacity gaps
    mp_points: list = None
    mp_probs: list = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.points.shape != self.probs.shape or self.points.ndim != 1:
            raise InvalidArgument("points and probs must be matching vectors")
        if abs(self.probs.sum() - 1.0) > 1e-12 or np.any(self.probs < 0):
            raise InvalidArgument("probs must be a pmf")

    @property
    def power(self):
        return float((self.probs * self.points ** 2).sum())

    def is_dyadic(self):
        s = self.probs * (1 << self.m)
        return bool(np.all(np.abs(s - np.round(s)) < 1e-9))


def dyadic_gaussian_constellation(m, snr=None):
    """Normalized sum of ``m`` equiprobable signs: points (2k - m)/sqrt(m), binomial weights."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    k = np.arange(m + 1)
    pts = (2 * k - m) / math.sqrt(m)
    pr = comb(m, k, exact=False) / 2.0 ** m
    mp_pts = [(2 * int(v) - m) / mpmath.sqrt(m) for v in k]
    mp_pr = [mpmath.mpf(math.comb(m, int(v))) / mpmath.mpf(2) ** m for v in k]
    return Constellation(pts, pr / pr.sum(), m, True, mp_pts, mp_pr)


def _hermite_orthonormal(x, n):
    """Orthonormal probabilists' Hermite value and derivative of degree n at x."""
    p0, p1 = np.zeros_like(x), np.ones_like(x)
    d0, d1 = np.zeros_like(x), np.zeros_like(x)
    for k in range(n):
        p2 = (x * p1 - math.sqrt(k) * p0) / math.sqrt(k + 1)
        d2 = (p1 + x * d1 - math.sqrt(k) * d0) / math.sqrt(k + 1)
        p0, p1, d0, d1 = p1, p2, d1, d2
    return p1, d1, p0


def gauss_hermite(n, tol=1e-12, max_newton=50):
    """Nodes and weights integrating against the standard normal density.

    Golub-Welsch eigen-decomposition of the Jacobi matrix, then Newton
    polish of each node on the three-term recurrence; weights from the
    Christoffel formula ``1 / sum_k p_k(x)^2``.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if n == 1:
        return np.zeros(1), np.ones(1)
    off = np.sqrt(np.arange(1, n, dtype=np.float64))
    x, _ = eigh_tridiagonal(np.zeros(n), off)
    for _ in range(max_newton):
        p, dp, _ = _hermite_orthonormal(x, n)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < tol:
            break
    else:
        raise IntegrationError("Newton polish of Hermite nodes did not converge")
    x = 0.5 * (x - x[::-1])             # exact symmetry
    # Christoffel weights 1 / sum_{k<n} p_k(x)^2, in log form to avoid overflow
    p0, p1 = np.zeros_like(x), np.ones_like(x)
    s = np.ones_like(x)
    scale = np.zeros_like(x)
    for k in range(n - 1):
        p2 = (x * p1 - math.sqrt(k) * p0) / math.sqrt(k + 1)
        p0, p1 = p1, p2
        s += p1 ** 2
        big = s > 1e200
        if np.any(big):
            f = np.where(big, 1e-200, 1.0)
            s, p0, p1 = s * f, p0 * np.sqrt(f), p1 * np.sqrt(f)
            scale += np.where(big, 200 * math.log(10), 0.0)
    w = np.exp(-np.log(s) - scale)
    return x, w / w.sum()


def gauss_hermite_mp(n, dps):
    """High-precision nodes and weights (mpmath), seeded from the float rule."""
    x0, _ = gauss_hermite(n)
    with mpmath.workdps(dps + 10):
        xs, ws = [], []
        eps = mpmath.mpf(10) ** (-dps - 5)
        for v in x0:
            x = mpmath.mpf(v)
            for _ in range(100):
                p0, p1 = mpmath.mpf(0), mpmath.mpf(1)
                d0, d1 = mpmath.mpf(0), mpmath.mpf(0)
                for k in range(n):
                    sk, sk1 = mpmath.sqrt(k), mpmath.sqrt(k + 1)
                    p2 = (x * p1 - sk * p0) / sk1
                    d2 = (p1 + x * d1 - sk * d0) / sk1
                    p0, p1, d0, d1 = p1, p2, d1, d2
                step = p1 / d1
                x -= step
                if abs(step) < eps:
                    break
            else:
                raise IntegrationError("mp Newton polish did not converge")
            p0, p1, s = mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(1)
            for k in range(n - 1):
                p2 = (x * p1 - mpmath.sqrt(k) * p0) / mpmath.sqrt(k + 1)
                p0, p1 = p1, p2
                s += p1 ** 2
            xs.append(x)
            ws.append(1 / s)
        tot = mpmath.fsum(ws)
        ws = [w / tot for w in ws]
        pw = mpmath.sqrt(mpmath.fsum(w * x * x for w, x in zip(ws, xs)))
        xs = [x / pw for x in xs]
    return xs, ws


def gauss_quadrature_constellation(m, snr=None, dps=None):
    """2^m Gauss-Hermite nodes and weights scaled to unit average power."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    n = 1 << m
    x, w = gauss_hermite(n)
    x = x / math.sqrt(float((w * x * x).sum()))
    c = Constellation(x, w, m, False)
    c.dyadic = c.is_dyadic()
    if dps is not None:
        c.mp_points, c.mp_probs = gauss_hermite_mp(n, dps)
    return c


def mi_discrete_awgn(c, noise_var, epsabs=1e-10):
    """I(X; X + Z) in bits with Z ~ N(0, noise_var), by adaptive quadrature.

    Uses ``I = -sum_k p_k E log2 sum_l p_l exp(-(d^2 + 2 d Z) / (2 nu))``
    with ``d = x_k - x_l``.
    """
    if noise_var <= 0:
        raise InvalidArgument("noise_var must be positive")
    keep = c.probs > 0
    pts, pr = c.points[keep], c.probs[keep]
    if pts.size == 1:
        return 0.0
    logp = np.log(pr)
    s = math.sqrt(noise_var)
    total = 0.0
    for k in range(pts.size):
        d = pts[k] - pts

        def f(t):
            z = s * t
            return math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi) * float(
                logsumexp(logp - (d * d + 2 * d * z) / (2 * noise_var)))

        # the Gaussian tail beyond 12 sigma is below 1e-32
        val, err = integrate.quad(f, -12.0, 12.0, epsabs=epsabs, epsrel=1e-12, limit=500)
        if not np.isfinite(val) or err > 1e-6:
            raise IntegrationError(f"quadrature error estimate {err:g}")
        total -= pr[k] * val
    return max(0.0, total / math.log(2))


def capacity_gap_mp(c, snr, dps=40):
    """C - I for a unit-power constellation, in high precision.

    For unit input power the gap equals D(P_Y || N(0, 1 + nu)), computed as
    the integral of ``g (r ln r - r + 1)`` with ``r = P_Y / g`` so the
    integrand is nonnegative and free of cancellation.
    """
    if c.mp_points is None:
        raise InvalidArgument("constellation has no high-precision copy")
    with mpmath.workdps(dps):
        nu = 1 / mpmath.mpf(snr)
        vy = 1 + nu
        pts = [mpmath.mpf(x) for x in c.mp_points]
        pr = [mpmath.mpf(w) for w in c.mp_probs]

        def integrand(y):
            g = mpmath.exp(-y * y / (2 * vy)) / mpmath.sqrt(2 * mpmath.pi * vy)
            py = mpmath.fsum(w * mpmath.exp(-(y - x) ** 2 / (2 * nu)) for w, x in zip(pr, pts))
            py /= mpmath.sqrt(2 * mpmath.pi * nu)
            if g == 0:
                return mpmath.mpf(0)
            r = py / g
            if r == 0:
                return g
            return g * (r * mpmath.log(r) - r + 1)

        lim = float(max(abs(float(x)) for x in pts)) + 12 * math.sqrt(float(vy)) + 6
        cuts = [-lim] + sorted(set(float(x) for x in pts)) + [lim]
        cuts = sorted(set(cuts))
        val = mpmath.quad(integrand, [-mpmath.inf] + cuts + [mpmath.inf])
        return val / mpmath.log(2)


def capacity_gap(c, snr, precise=False, dps=40):
    """C(snr) - I(X; X + Z) for a unit-power constellation."""
    if precise:
        return float(capacity_gap_mp(c, snr, dps))
    return awgn_capacity(snr) - mi_discrete_awgn(c, 1.0 / snr)


def quadrature_gap_bound(m, snr):
    return 4.0 * (1 + snr) * (snr / (1 + snr)) ** (2 ** (m + 1))


def dyadic_gap_bound(m, snr):
    return snr * 2.0 ** (-m)


def _dps_for(bound):
    return max(30, int(-math.log10(max(bound, 1e-300))) + 25)


def gap_table(ms, snrs, kinds=("quadrature", "dyadic")):
    """Rows (kind, m, snr, C, mi, gap, bound) for the constellation families."""
    rows = []
    for kind in kinds:
        for snr in snrs:
            for m in ms:
                if kind == "quadrature":
                    bound = quadrature_gap_bound(m, snr)
                    precise = bound < 1e-7
                    c = gauss_quadrature_constellation(m, snr, dps=_dps_for(bound) if precise else None)
                else:
                    bound = dyadic_gap_bound(m, snr)
                    precise = False
                    c = dyadic_gaussian_constellation(m, snr)
                cap = awgn_capacity(snr)
                gap = capacity_gap(c, snr, precise=precise,
                                   dps=_dps_for(bound)) if precise else capacity_gap(c, snr)
                rows.append({"kind": kind, "m": m, "snr": snr, "C": cap, "mi": cap - gap,
                             "gap": gap, "bound": bound})
    return rows

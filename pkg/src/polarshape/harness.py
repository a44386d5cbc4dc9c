"""Monte Carlo simulation, parameter sweeps and small exact experiments."""
import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import binomtest

from .channels import channel_from_config, mutual_information, optimal_input, transmit
from .code import DecodeFailure, build_code, decode, encode
from .core import InvalidArgument, RandomStream, bernoulli_product, derive_seed, variational_distance
from .polarization import build_index_sets, source_entropies_exact
from .shaper import (STOCHASTIC, ShaperSpec, best_rational_approx, gallager_rate_gap,
                     shaper_output_distribution)


@dataclass
class SimConfig:
    channel: dict = field(default_factory=lambda: {"name": "zchannel", "params": [0.3]})
    p: float = None                 # None: capacity-achieving input
    L: int = 64
    M: int = 256
    epsilon_inner: float = 0.05
    epsilon_outer: float = 0.05
    mode: str = STOCHASTIC
    target_rate: float = None       # data bits per channel use
    rate_ratio: float = None        # target rate as a fraction of capacity
    trials: int = 100
    seed: int = 0
    jobs: int = 1
    samples: int = 1000             # outer construction samples
    inner_samples: int = 4000       # inner entropy samples when L > 16
    frozen_zero: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument("trials must be >= 1")
        if self.target_rate is not None and self.rate_ratio is not None:
            raise InvalidArgument("give target_rate or rate_ratio, not both")

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InvalidArgument(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def dmc(self):
        return channel_from_config(self.channel)


@dataclass
class SimReport:
    frames: int
    frame_errors: int
    bit_errors: int
    decode_failures: int
    fer: float
    fer_ci: tuple
    ber: float
    design_rate: float
    capacity: float
    rate_ratio: float
    message_bits: int
    N: int
    L: int
    M: int
    K: int
    mode: str
    randomness_per_frame: int
    genie_frame_error: float
    time_construct: float
    time_encode: float
    time_decode: float

    def to_dict(self):
        d = asdict(self)
        d["fer_ci"] = list(self.fer_ci)
        return d

    def without_times(self):
        d = self.to_dict()
        for k in ("time_construct", "time_encode", "time_decode"):
            d.pop(k)
        return d


def wilson_interval(k, n, level=0.95):
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def construct(config):
    ch = config.dmc()
    info = optimal_input(ch)
    p = info.optimal_p if config.p is None else config.p
    target = config.target_rate
    if config.rate_ratio is not None:
        target = config.rate_ratio * info.capacity
    spec = build_code(ch, p, config.L, config.M, config.epsilon_inner, config.epsilon_outer,
                      config.samples, config.seed, config.mode, config.inner_samples,
                      target, config.frozen_zero)
    return spec, info.capacity


def _trial(spec, seed, t):
    """One frame: returns (frame error, bit errors, failure, t_enc, t_dec)."""
    ch = spec.channel
    msg = RandomStream(derive_seed(seed, "message", t)).bits(spec.message_length)
    common = derive_seed(seed, "common", t)
    t0 = time.perf_counter()
    x = encode(spec, msg, common)
    t1 = time.perf_counter()
    y = transmit(ch, x, RandomStream(derive_seed(seed, "channel", t)))
    t2 = time.perf_counter()
    try:
        got = decode(spec, y, common)
    except DecodeFailure:
        return True, spec.message_length, True, t1 - t0, time.perf_counter() - t2
    t3 = time.perf_counter()
    be = int((got != msg).sum())
    return be > 0, be, False, t1 - t0, t3 - t2


def _trial_range(args):
    spec, seed, lo, hi = args
    return [_trial(spec, seed, t) for t in range(lo, hi)]


def run_trials(spec, trials, seed, jobs=1):
    if jobs <= 1:
        return _trial_range((spec, seed, 0, trials))
    step = max(1, math.ceil(trials / (4 * jobs)))
    chunks = [(spec, seed, lo, min(trials, lo + step)) for lo in range(0, trials, step)]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for part in ex.map(_trial_range, chunks):
            out.extend(part)
    return out


def run_simulation(config, spec=None, capacity=None):
    """Build a code (unless given) and run ``config.trials`` frames."""
    t0 = time.perf_counter()
    if spec is None:
        spec, capacity = construct(config)
    elif capacity is None:
        capacity = optimal_input(spec.channel).capacity
    t_con = time.perf_counter() - t0
    res = run_trials(spec, config.trials, config.seed, config.jobs)
    fe = sum(r[0] for r in res)
    be = sum(r[1] for r in res)
    fails = sum(r[2] for r in res)
    n = len(res)
    nbits = max(1, spec.message_length * n)
    return SimReport(
        frames=n, frame_errors=int(fe), bit_errors=int(be), decode_failures=int(fails),
        fer=fe / n, fer_ci=wilson_interval(fe, n), ber=be / nbits if spec.message_length else 0.0,
        design_rate=spec.design_rate, capacity=capacity,
        rate_ratio=spec.design_rate / capacity if capacity > 0 else math.nan,
        message_bits=spec.message_length, N=spec.N, L=spec.L, M=spec.M, K=spec.K,
        mode=spec.mode, randomness_per_frame=spec.randomness_per_frame,
        genie_frame_error=float(spec.stats.get("genie_frame_error", math.nan)),
        time_construct=t_con, time_encode=float(np.mean([r[3] for r in res])),
        time_decode=float(np.mean([r[4] for r in res])))


SWEEP_AXES = ("M", "epsilon", "q", "mode")


def gallager_rows(channel, p=None, qs=(4, 8, 16, 32, 64, 128, 256)):
    if p is None:
        p = optimal_input(channel).optimal_p
    rows = []
    for q in qs:
        k = best_rational_approx(p, q)
        gap, bound = gallager_rate_gap(channel, p, q)
        rows.append({"q": q, "k": k, "p": p, "approx_error": abs(p - k / q),
                     "approx_bound": 1 / (2 * q), "I_p": mutual_information(channel, p),
                     "I_kq": mutual_information(channel, k / q), "gap": gap, "bound": bound,
                     "within_bound": gap <= bound})
    return rows


def sweep(config, axis, values):
    """One run per value along ``axis``; returns a list of row dicts.

    The ``mode`` axis reuses one constructed code so only the shaper
    differs between rows.  The ``q`` axis evaluates Gallager's shaper.
    """
    if axis not in SWEEP_AXES:
        raise InvalidArgument(f"axis must be one of {SWEEP_AXES}")
    rows = []
    if axis == "q":
        return gallager_rows(config.dmc(), config.p, [int(v) for v in values])
    if axis == "mode":
        base, cap = construct(config)
        for v in values:
            rep = run_simulation(replace(config, mode=v), base.with_mode(v), cap)
            rows.append({"axis": axis, "value": v, **rep.to_dict()})
        return rows
    for v in values:
        cfg = replace(config, M=int(v)) if axis == "M" else replace(config, epsilon_inner=float(v))
        rep = run_simulation(cfg)
        rows.append({"axis": axis, "value": v, **rep.to_dict()})
    return rows


def shaper_distance_experiment(p, L, epsilons):
    """Exact distance of the shaped word to Bern(p)^L for each threshold.

    Rows: epsilon, K = |random set|, exact distance, the bound
    K sqrt(ln2 eps / 2), and whether the distance is within it.
    """
    if L > 16:
        raise InvalidArgument("exact experiment limited to L <= 16")
    h = source_entropies_exact(p, L)
    target = bernoulli_product(p, L)
    rows = []
    for eps in epsilons:
        sets = build_index_sets(h, eps)
        K = len(sets.random_set)
        dist = variational_distance(shaper_output_distribution(ShaperSpec(L, sets.random_set, p)),
                                    target)
        bound = K * math.sqrt(math.log(2) / 2 * eps)
        rows.append({"epsilon": eps, "K": K, "delta": dist, "bound": bound,
                     "within_bound": dist <= bound + 1e-12})
    return rows


def rows_to_csv(rows, fh=None):
    if not rows:
        return ""
    buf = fh if fh is not None else io.StringIO()
    keys = list(rows[0].keys())
    w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (";".join(map(str, v)) if isinstance(v, (list, tuple)) else v)
                    for k, v in r.items()})
    return buf.getvalue() if fh is None else None

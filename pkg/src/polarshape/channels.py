"""Binary-input discrete memoryless channels."""
from dataclasses import dataclass

import numpy as np

from .core import InvalidArgument, entropy


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Dmc:
    """Transition table ``transitions[x, y] = W(y | x)`` for x in {0, 1}."""

    transitions: np.ndarray
    name: str = "table"
    params: tuple = ()

    def __post_init__(self):
        w = np.array(self.transitions, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != 2 or w.shape[1] < 1:
            raise InvalidArgument("transition table must be 2 x |Y|")
        if np.any(w < 0) or np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidArgument("each row must be a pmf (sum 1 within 1e-12)")
        w.setflags(write=False)
        object.__setattr__(self, "transitions", w)

    @property
    def output_size(self):
        return self.transitions.shape[1]

    def to_dict(self):
        if self.name != "table":
            return {"name": self.name, "params": list(self.params)}
        return {"table": self.transitions.tolist()}

    def __repr__(self):
        if self.name != "table":
            return f"Dmc({self.name}{tuple(self.params)})"
        return f"Dmc({self.transitions.tolist()})"


@dataclass(frozen=True)
class ChannelInfo:
    optimal_p: float
    capacity: float
    solver_tolerance: float
    iterations: int = 0


def builtin_channel(name, params):
    """Named channel: ``bsc(e)``, ``bec(e)``, ``zchannel(a)`` or
    ``asymmetric(w00, .., w0k, w10, .., w1k)`` (two rows, flattened)."""
    params = [float(v) for v in np.atleast_1d(params)]
    name = name.lower()

    def prob(v):
        if not 0.0 <= v <= 1.0:
            raise InvalidArgument(f"{name}: parameter {v} outside [0, 1]")
        return v

    if name == "bsc":
        if len(params) != 1:
            raise InvalidArgument("bsc takes one parameter")
        e = prob(params[0])
        t = [[1 - e, e], [e, 1 - e]]
    elif name == "bec":
        if len(params) != 1:
            raise InvalidArgument("bec takes one parameter")
        e = prob(params[0])
        t = [[1 - e, e, 0.0], [0.0, e, 1 - e]]
    elif name in ("zchannel", "z"):
        if len(params) != 1:
            raise InvalidArgument("zchannel takes one parameter")
        a = prob(params[0])
        t = [[1.0, 0.0], [a, 1 - a]]
        name = "zchannel"
    elif name == "asymmetric":
        if len(params) < 2 or len(params) % 2:
            raise InvalidArgument("asymmetric takes two rows of equal length")
        t = np.reshape(params, (2, -1))
    else:
        raise InvalidArgument(f"unknown channel {name!r}")
    return Dmc(np.array(t, dtype=np.float64), name=name, params=tuple(params))


def channel_from_config(cfg):
    """Build a channel from ``{"name": .., "params": [..]}`` or ``{"table": [[..], [..]]}``."""
    if isinstance(cfg, Dmc):
        return cfg
    if "table" in cfg:
        t = np.asarray(cfg["table"], dtype=np.float64)
        if t.ndim == 1:
            t = t.reshape(2, -1)
        return Dmc(t)
    if "name" in cfg:
        return builtin_channel(cfg["name"], cfg.get("params", []))
    raise InvalidArgument("channel config needs 'name' or 'table'")


def output_distribution(channel, p):
    return (1 - p) * channel.transitions[0] + p * channel.transitions[1]


def mutual_information(channel, p):
    """I(X; Y) in bits for X ~ Bern(p)."""
    if not isinstance(channel, Dmc):
        raise InvalidArgument("expected a Dmc")
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"p={p} outside [0, 1]")
    w = channel.transitions
    hyx = (1 - p) * entropy(w[0]) + p * entropy(w[1])
    return max(0.0, entropy(output_distribution(channel, p)) - hyx)


def _divergences(w, q):
    """D(W(.|x) || q W) in bits for both inputs."""
    out = q @ w
    d = np.zeros(2)
    for x in range(2):
        m = w[x] > 0
        d[x] = float((w[x, m] * np.log2(w[x, m] / out[m])).sum())
    return d


def optimal_input(channel, tol=1e-9, max_iter=10_000):
    """Capacity-achieving P(X = 1) by Blahut-Arimoto.

    Iterates until the gap between the upper bound ``max_x D(W(.|x) || qW)``
    and the current mutual information is below ``tol``.  When the rows are
    identical every input is optimal and ``p = 0`` is returned.
    """
    w = channel.transitions
    if np.allclose(w[0], w[1], rtol=0, atol=1e-15):
        return ChannelInfo(0.0, 0.0, tol, 0)
    q = np.array([0.5, 0.5])
    for it in range(1, max_iter + 1):
        d = _divergences(w, q)
        lower = float(q @ d)
        if d.max() - lower < tol:
            p = float(q[1])
            return ChannelInfo(p, mutual_information(channel, p), tol, it)
        q = q * np.exp2(d)
        q /= q.sum()
    raise SolverError(f"Blahut-Arimoto did not converge in {max_iter} iterations")


def optimal_input_golden(channel, tol=1e-9):
    """Golden-section search over p; I(p) is concave on [0, 1]."""
    g = (np.sqrt(5) - 1) / 2
    a, b = 0.0, 1.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = mutual_information(channel, c), mutual_information(channel, d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = mutual_information(channel, c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = mutual_information(channel, d)
    p = 0.5 * (a + b)
    return ChannelInfo(p, mutual_information(channel, p), tol, 0)


def transmit(channel, x, stream):
    """Pass bits ``x`` (any shape) through the channel, one uniform per use."""
    x = np.asarray(x, dtype=np.intp)
    u = stream.uniforms(x.size).reshape(x.shape)
    return transmit_with_uniforms(channel, x, u)


def transmit_with_uniforms(channel, x, u):
    cdf = np.cumsum(channel.transitions, axis=1)[:, :-1]
    c = cdf[np.asarray(x, dtype=np.intp)]
    return (u[..., None] >= c).sum(axis=-1).astype(np.intp)


def joint_leaf_llr(channel, p, y):
    """log[(1 - p) W(y|0)] - log[p W(y|1)] per output symbol."""
    w = channel.transitions
    y = np.asarray(y, dtype=np.intp)
    with np.errstate(divide="ignore"):
        l0 = np.log1p(-p) + np.log(w[0])
        l1 = np.log(p) + np.log(w[1])
        table = l0 - l1
    # both terms -inf: the symbol cannot occur at all
    table = np.where(np.isneginf(l0) & np.isneginf(l1), np.nan, table)
    return table[y]


def source_leaf_llr(p):
    with np.errstate(divide="ignore"):
        return float(np.log1p(-p) - np.log(p))

"""Command line front end.

Exit codes: 0 success, 1 invalid input, 3 solver or integration failure,
4 decode infrastructure failure.
"""
import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .awgn import IntegrationError, gap_table
from .channels import SolverError, channel_from_config, transmit
from .code import CodeSpec, DecodeFailure, decode_frame, encode
from .core import InvalidArgument, RandomStream

EXIT_INVALID = 1
EXIT_SOLVER = 3
EXIT_DECODE = 4


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _config(args):
    d = _load_json(args.config) if args.config else {}
    cfg = harness.SimConfig.from_dict(d)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.jobs is not None:
        cfg = replace(cfg, jobs=args.jobs)
    if args.frozen_zero:
        cfg = replace(cfg, frozen_zero=True)
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit_rows(rows, out, as_json=False):
    if as_json or (out and out.endswith(".json")):
        _emit(json.dumps(rows, indent=1, default=float), out)
    else:
        _emit(harness.rows_to_csv(rows), out)


def _floats(text):
    return [float(v) for v in text.split(",") if v]


def _ints(text):
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _bits(text):
    return np.array([int(c) for c in text.strip() if c in "01"], dtype=np.uint8)


def cmd_construct(args):
    cfg = _config(args)
    spec, _ = harness.construct(cfg)
    _emit(spec.dumps(), args.out)


def cmd_encode(args):
    spec = CodeSpec.from_dict(_load_json(args.code))
    seed = 0 if args.seed is None else args.seed
    if args.message is not None:
        msg = _bits(args.message)
    else:
        msg = RandomStream(seed, ("message",)).bits(spec.message_length)
    x = encode(spec, msg, seed)
    doc = {"common_seed": seed, "message": "".join(map(str, msg.tolist())),
           "codeword": "".join(map(str, x.tolist()))}
    if args.transmit:
        y = transmit(spec.channel, x, RandomStream(seed, ("channel",)))
        doc["received"] = y.tolist()
    _emit(json.dumps(doc, indent=1), args.out)


def cmd_decode(args):
    spec = CodeSpec.from_dict(_load_json(args.code))
    doc = _load_json(args.input)
    y = np.asarray(doc["received"] if "received" in doc else doc["codeword_symbols"])
    seed = doc.get("common_seed", 0) if args.seed is None else args.seed
    if y.size != spec.N:
        raise InvalidArgument(f"expected {spec.N} received symbols, got {y.size}")
    res = decode_frame(spec, y, seed)
    out = {"message": "".join(map(str, res.message.tolist()))}
    if "message" in doc:
        out["correct"] = out["message"] == doc["message"]
    _emit(json.dumps(out, indent=1), args.out)


def cmd_simulate(args):
    rep = harness.run_simulation(_config(args))
    if args.out and args.out.endswith(".csv"):
        _emit(harness.rows_to_csv([rep.to_dict()]), args.out)
    else:
        _emit(json.dumps(rep.to_dict(), indent=1), args.out)


def cmd_sweep(args):
    cfg = _config(args)
    values = args.values.split(",")
    if args.axis in ("M", "q"):
        values = [int(v) for v in values]
    elif args.axis == "epsilon":
        values = [float(v) for v in values]
    _emit_rows(harness.sweep(cfg, args.axis, values), args.out)


def cmd_shaper_dist(args):
    _emit_rows(harness.shaper_distance_experiment(args.p, args.L, _floats(args.eps)), args.out)


def cmd_awgn_table(args):
    rows = gap_table(_ints(args.m), _floats(args.snr), kinds=tuple(args.kind.split(",")))
    _emit(harness.rows_to_csv(rows), args.out)


def cmd_gallager_gap(args):
    if args.config:
        cfg = _config(args)
        ch, p = cfg.dmc(), cfg.p
    else:
        ch, p = channel_from_config(json.loads(args.channel)), args.p
    _emit_rows(harness.gallager_rows(ch, p, _ints(args.q)), args.out)


def build_parser():
    ap = argparse.ArgumentParser(prog="polarshape", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON simulation config")
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--seed", type=int, help="master / common seed (u64)")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--frozen-zero", action="store_true", help="pin frozen bits to zero")
        return p

    p = common(sub.add_parser("construct", help="build a code and write it as JSON"))
    p.set_defaults(func=cmd_construct)
    p = common(sub.add_parser("encode", help="encode a message"), config=False)
    p.add_argument("--code", required=True)
    p.add_argument("--message", help="bit string; random if omitted")
    p.add_argument("--transmit", action="store_true", help="also pass through the channel")
    p.set_defaults(func=cmd_encode)
    p = common(sub.add_parser("decode", help="decode received symbols"), config=False)
    p.add_argument("--code", required=True)
    p.add_argument("--input", required=True, help="JSON with 'received' symbols")
    p.set_defaults(func=cmd_decode)
    p = common(sub.add_parser("simulate", help="Monte Carlo FER run"))
    p.set_defaults(func=cmd_simulate)
    p = common(sub.add_parser("sweep", help="one run per axis value, CSV"))
    p.add_argument("--axis", required=True, choices=harness.SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma separated")
    p.set_defaults(func=cmd_sweep)
    p = common(sub.add_parser("shaper-dist", help="exact shaper distance table"), config=False)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--eps", default="0.2,0.1,0.05")
    p.set_defaults(func=cmd_shaper_dist)
    p = common(sub.add_parser("awgn-table", help="AWGN constellation gaps, CSV"), config=False)
    p.add_argument("--m", default="1-6")
    p.add_argument("--snr", default="1,10")
    p.add_argument("--kind", default="quadrature,dyadic")
    p.set_defaults(func=cmd_awgn_table)
    p = common(sub.add_parser("gallager-gap", help="Gallager shaper rate gap"))
    p.add_argument("--channel", default='{"name": "zchannel", "params": [0.3]}')
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", default="4,8,16,32,64,128,256")
    p.set_defaults(func=cmd_gallager_gap)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (SolverError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DecodeFailure as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except (InvalidArgument, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())

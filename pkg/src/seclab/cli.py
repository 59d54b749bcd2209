"""``seclab`` command line: every command prints one JSON document on stdout."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import corpus as corpus_mod
from .classes import classify
from .common import conditional_common_function, maximal_common_partition
from .dist import SUPPORT_EPS, load_table
from .entropy import evaluate, parse_quantity
from .errors import SeclabError
from .protocol import apply_protocol, load_protocol, verify_message_identity
from .quantum import concurrence_2q, embed, eof_2q, reduce_ab, theorem3_report
from .secrecy import decide_reversibility, intrinsic_information, winter_key_cost


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(obj, compact: bool) -> None:
    text = json.dumps(obj, default=_jsonable, separators=(",", ":")) if compact else json.dumps(obj, default=_jsonable, indent=2)
    sys.stdout.write(text + "\n")


def _table(args):
    return load_table(args.dist, support_eps=args.support_eps)


def _roles(args):
    return {"x": args.x, "y": args.y, "z": args.z}


def cmd_corpus(args):
    if args.action == "list":
        return {"entries": corpus_mod.manifest(), "generators": sorted(corpus_mod.GENERATORS)}
    if not args.name:
        raise corpus_mod.PreconditionError("corpus emit needs a NAME")
    return corpus_mod.corpus(args.name).to_dict()


def cmd_classify(args):
    return classify(_table(args), **_roles(args), tol=args.tol, max_rounds=args.max_rounds, seed=args.seed).to_dict()


def cmd_intrinsic(args):
    res = intrinsic_information(_table(args), **_roles(args), restarts=args.restarts, seed=args.seed,
                                zbar_card=args.zbar_card, local_only=args.local_only)
    return res.to_dict()


def cmd_keycost(args):
    res = winter_key_cost(_table(args), **_roles(args), w_card=args.w_card, restarts=args.restarts, seed=args.seed)
    return res.to_dict()


def cmd_reversible(args):
    return decide_reversibility(_table(args), **_roles(args), tol=args.tol, seed=args.seed).to_dict()


def cmd_embed(args):
    t = _table(args)
    order = (args.x, args.y, args.z)
    dims = tuple(len(t.labels(v)) for v in order)
    rho = reduce_ab(embed(t, order), dims)
    out = {"dims": list(dims), "purity": rho.purity}
    if dims[:2] == (2, 2):
        out["concurrence"] = concurrence_2q(rho)
        out["eof"] = eof_2q(rho)
    if args.report == "theorem3":
        out["theorem3"] = theorem3_report(t, **_roles(args), tol=args.tol).to_dict()
    return out


def cmd_partition(args):
    t = _table(args)
    if args.given:
        return conditional_common_function(t, args.x, args.y, tuple(args.given.split(","))).to_dict()
    part = maximal_common_partition(t, args.x, args.y)
    return {**part.to_dict(), "H(J)": part.entropy}


def cmd_protocol(args):
    t = _table(args)
    tr = apply_protocol(t, load_protocol(args.protocol), args.x, args.y)
    out = {"protocol": tr.to_dict(), "extended": tr.extended.to_dict()}
    if args.verify_eq7:
        out["message_identity"] = verify_message_identity(tr, args.z, args.tol).to_dict()
    return out


def cmd_entropy(args):
    t = _table(args)
    results = {}
    for text in args.quantity:
        q = parse_quantity(text)
        results[str(q)] = evaluate(t, q)
    return results


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="decision tolerance in bits")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="compact single-line JSON")
    common.add_argument("--support-eps", type=float, default=SUPPORT_EPS)
    roles = argparse.ArgumentParser(add_help=False)
    roles.add_argument("--x", default="X")
    roles.add_argument("--y", default="Y")
    roles.add_argument("--z", default="Z")

    p = argparse.ArgumentParser(prog="seclab", description="Secrecy reversibility analysis of tripartite distributions.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("corpus", parents=[common], help="list or emit built-in distributions")
    c.add_argument("action", choices=["list", "emit"])
    c.add_argument("name", nargs="?")
    c.set_defaults(func=cmd_corpus)

    def with_dist(name, func, help_text):
        sp = sub.add_parser(name, parents=[common, roles], help=help_text)
        sp.add_argument("dist", help="distribution JSON file")
        sp.set_defaults(func=func)
        return sp

    sp = with_dist("classify", cmd_classify, "run every class detector")
    sp.add_argument("--max-rounds", type=int, default=2)
    sp = with_dist("intrinsic", cmd_intrinsic, "minimize I(X:Y|Zbar) over channels")
    sp.add_argument("--zbar-card", type=int)
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--local-only", action="store_true")
    sp = with_dist("keycost", cmd_keycost, "upper-bound the key cost")
    sp.add_argument("--w-card", type=int)
    sp.add_argument("--restarts", type=int, default=4)
    with_dist("reversible", cmd_reversible, "decide secrecy reversibility")
    sp = with_dist("embed", cmd_embed, "quantum embedding and entanglement measures")
    sp.add_argument("--report", choices=["theorem3"])
    sp = with_dist("partition", cmd_partition, "maximal common partition")
    sp.add_argument("--given", help="comma-separated conditioning variables")
    sp = with_dist("protocol", cmd_protocol, "apply a public-discussion protocol")
    sp.add_argument("protocol", help="protocol JSON file")
    sp.add_argument("--verify-eq7", action="store_true", help="check the message identity for BI inputs")
    sp = with_dist("entropy", cmd_entropy, "evaluate H(..) / I(..) quantities")
    sp.add_argument("quantity", nargs="+", help="e.g. 'I(X:Y|Z)'")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except SeclabError as exc:
        sys.stderr.write(f"seclab: {exc}\n")
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"seclab: {exc}\n")
        return 2
    except Exception as exc:  # pragma: no cover - reported as an internal failure
        sys.stderr.write(f"seclab: internal error: {exc}\n")
        return 1
    _emit(result, args.json)
    return 0


if __name__ == "__main__":
    sys.exit(main())

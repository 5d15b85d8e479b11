"""natdual command line.

Exit codes: 0 all verdicts as expected, 1 a check failed, 2 usage or parse
error.
"""
import argparse
import json
import logging
import sys
import time

from . import __version__
from .catalog import manifest
from .config import DEFAULT
from .duality import SCOPE
from .errors import DualityError, ElaborationError
from .report import Cache, cache_key, digest, input_records, make_report, render
from .runner import Env, catalog_resolver, parse_command, run_command, verify_witness, _ordered_map
from .speclang import Command, KNOWN_COMMANDS, elaborate, parse

log = logging.getLogger("natdual")


class UsageError(Exception):
    pass


def _bounds(ns):
    b = DEFAULT
    if ns.op_limit is not None:
        b = b.with_(max_search=ns.op_limit)
    return b


def _load(path, verify=True):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(str(e))
    doc = parse(text)
    if doc.diagnostics:
        raise ElaborationError([_located(path, d) for d in doc.diagnostics])
    try:
        return elaborate(doc, verify=verify, resolver=catalog_resolver)
    except ElaborationError as e:
        raise ElaborationError([_located(path, d) for d in e.diagnostics])


def _located(path, d):
    return f"{path}:{d}"


def _env(ns):
    if getattr(ns, "file", None):
        return Env(_load(ns.file, not ns.no_verify), source=ns.file)
    return Env()


def execute(cmd, env, ns, jobs=None):
    """Run one command and return its report, through the cache."""
    bounds = _bounds(ns)
    args = {k: v for k, v in cmd.args.items() if k != "expect"}
    try:
        inputs = input_records(env, args)
    except KeyError as e:
        raise UsageError(f"unknown input {e}")
    cache = Cache() if not ns.no_cache else Cache("")
    key = cache_key(cmd.name, cmd.args, inputs, bounds)
    hit = cache.get(key)
    if hit is not None:
        return hit
    t0 = time.perf_counter()
    out = run_command(cmd, env, bounds, ns.jobs if jobs is None else jobs)
    ms = round((time.perf_counter() - t0) * 1000, 1) if ns.timing else None
    rep = make_report(out, inputs, bounds, ms)
    if out.verdict != "error":
        cache.put(key, rep)
    return rep


def _emit(rep, ns):
    text = render(rep, ns.format)
    if ns.output:
        with open(ns.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single(ns, name, **args):
    args = {k: str(v) for k, v in args.items() if v is not None}
    if getattr(ns, "expect", None):
        args["expect"] = ns.expect
    env = _env(ns)
    rep = execute(Command(name, args), env, ns)
    _emit(rep, ns)
    if rep["verdict"] == "error":
        print(f"natdual: error: {rep['detail'].get('error')}", file=sys.stderr)
    return 0 if rep["passed"] else 1


def _batch(ns, title, name, items):
    """items: (id, Command); results merged in input order."""
    env = _env(ns)
    if ns.jobs > 1 and len(items) > 1 and not getattr(ns, "file", None):
        reps = _ordered_map(_run_claim, [(c.name, c.args, _ns_dict(ns)) for _, c in items], ns.jobs)
    else:
        reps = [execute(c, env, ns) for _, c in items]
    results = []
    for (cid, _), rep in zip(items, reps):
        rep = dict(rep)
        rep["id"] = cid
        results.append(rep)
    passed = sum(r["passed"] for r in results)
    doc = {"command": title, "name": name, "results": results, "passed": passed,
           "total": len(results), "scope": SCOPE}
    _emit(doc, ns)
    return 0 if passed == len(results) else 1


def _ns_dict(ns):
    return {k: getattr(ns, k) for k in ("op_limit", "timing", "no_cache")}


def _run_claim(task):
    name, args, nsd = task
    ns = argparse.Namespace(jobs=1, **nsd)
    return execute(Command(name, dict(args)), Env(), ns, jobs=1)


# --------------------------------------------------------------------------
# subcommands

def cmd_parse(ns):
    el = _load(ns.file, not ns.no_verify)
    for kind, table in (("algebra", el.algebras), ("ego", el.egos), ("rel", el.relations),
                        ("check", el.checks)):
        for name in table:
            print(f"{kind} {name}")
    return 0


def cmd_check(ns):
    target = ns.target
    if target == "manifest":
        return cmd_manifest(ns)
    if target in KNOWN_COMMANDS:
        keys = ("algebra", "ego", "over", "rel", "rels", "retract", "k", "power", "size")
        args = {k: getattr(ns, k) for k in keys}
        if args["power"] is None and target in ("injectivity", "duality-subalgebras"):
            args["power"] = ns.power_bound
        if args["size"] is None and target == "injectivity":
            args["size"] = ns.size_bound
        return _single(ns, target, **args)
    ns.file = target
    el = _load(target, not ns.no_verify)
    names = [ns.name] if ns.name else list(el.checks)
    if ns.name and ns.name not in el.checks:
        raise UsageError(f"{target} has no check plan {ns.name!r}")
    items = [(f"{n}/{i}", c) for n in names for i, c in enumerate(el.checks[n])]
    return _batch(ns, "check", ns.name or target, items)


def cmd_manifest(ns):
    items = []
    skip = ns.skip or []
    for c in manifest():
        if ns.filter and ns.filter not in c.id:
            continue
        if any(s in c.id for s in skip):
            continue
        cmd = parse_command(c.line)
        cmd.args["expect"] = c.expected
        items.append((c.id, cmd))
    if not items:
        raise UsageError(f"no manifest claim matches {ns.filter!r}")
    ns.file = None
    return _batch(ns, "manifest", ns.filter, items)


def cmd_entails(ns):
    if ns.tuples is not None:
        ego = Env(_load(ns.file) if ns.file else None).ego(ns.ego)
        rows = [t for t in ns.tuples.replace(";", " ").split() if t]
        body = " ".join(f"({t})" for t in rows)
        arity = len(rows[0].split(",")) if rows else 1
        text = f"rel {ns.rel or 's'}/{arity} on {ego.over.name} = {{{body}}}\n"
        if ns.file:
            with open(ns.file) as fh:
                text = fh.read() + "\n" + text
        doc = parse(text)
        if doc.diagnostics:
            raise ElaborationError(doc.diagnostics)
        env = Env(elaborate(doc, resolver=catalog_resolver), source="inline")
        args = {"ego": ns.ego, "rel": ns.rel or "s"}
        if ns.expect:
            args["expect"] = ns.expect
        rep = execute(Command("entails", args), env, ns)
        _emit(rep, ns)
        return 0 if rep["passed"] else 1
    return _single(ns, "entails", ego=ns.ego, rel=ns.rel)


def cmd_verify(ns):
    with open(ns.report_file) as fh:
        rep = json.load(fh)
    reps = rep["results"] if "results" in rep else [rep]
    bad = 0
    for r in reps:
        label = r.get("id", r["command"])
        if r["witness"] is None:
            print(f"{label}: no witness")
            continue
        texts = {x["kind"]: [] for x in r["inputs"]}
        for x in r["inputs"]:
            if digest(x["text"]) != x["digest"]:
                print(f"{label}: digest mismatch for {x['id']}")
                bad += 1
                break
            texts[x["kind"]].append(x["text"])
        else:
            text = "\n".join(texts.get("algebra", []) + texts.get("rel", []) + texts.get("ego", []))
            env = Env(elaborate(parse(text)), source="report")
            ok = verify_witness(r["command"], r["args"], r["witness"], env, _bounds(ns))
            print(f"{label}: witness {'verified' if ok else 'REJECTED'}")
            bad += not ok
    return 0 if bad == 0 else 1


def cmd_report(ns):
    with open(ns.report_file) as fh:
        rep = json.load(fh)
    _emit(rep, ns)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--power-bound", type=int, default=3, help="largest power k swept")
    common.add_argument("--size-bound", type=int, default=27, help="largest substructure size swept")
    common.add_argument("--op-limit", type=int, default=None,
                        help=f"cap on enumerated solutions per search (default {DEFAULT.max_search})")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--timing", action="store_true", help="record elapsed_ms (breaks byte-identity)")
    common.add_argument("--format", choices=("json", "markdown"), default="json")
    common.add_argument("-o", "--output")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--no-verify", action="store_true", help="skip algebraicity check of egos")
    common.add_argument("--expect")

    p = argparse.ArgumentParser(prog="natdual", description="finite-level natural duality workbench")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse", cmd_parse, "parse and elaborate a spec file")
    sp.add_argument("file")

    sp = add("check", cmd_check, "run check plans from a file, one command, or the manifest")
    sp.add_argument("target", help="a spec file, a command name, or 'manifest'")
    sp.add_argument("name", nargs="?", help="check plan to run (default: all)")
    for flag in ("algebra", "ego", "over", "rel", "rels", "retract"):
        sp.add_argument(f"--{flag}")
    for flag in ("k", "power", "size"):
        sp.add_argument(f"--{flag}", type=int)
    sp.add_argument("--filter")
    sp.add_argument("--skip", action="append")
    sp.add_argument("--file", dest="decls", help=argparse.SUPPRESS)

    sp = add("manifest", cmd_manifest, "run the catalog's claims")
    sp.add_argument("--filter")
    sp.add_argument("--skip", action="append", help="skip claims whose id contains this")

    sp = add("entails", cmd_entails, "does the ego entail a relation?")
    sp.add_argument("--ego", required=True)
    sp.add_argument("--rel", help="relation name (declared in --file)")
    sp.add_argument("--tuples", help='inline relation, e.g. "0,0 0,1 1,1"')
    sp.add_argument("--file")

    sp = add("clone-entails", lambda ns: _single(ns, "clone-entails", rels=ns.rels, rel=ns.rel),
             "is a relation in Inv(Pol(R))?")
    sp.add_argument("--rels", required=True)
    sp.add_argument("--rel", required=True)
    sp.add_argument("--file", required=True)

    sp = add("duality", lambda ns: _single(ns, "duality", algebra=ns.algebra, ego=ns.ego),
             "is e_A an isomorphism?")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--ego", required=True)
    sp.add_argument("--file")

    sp = add("fullness", lambda ns: _single(ns, "fullness", ego=ns.ego, k=ns.k),
             "fullness on every closed substructure of ego^k")
    sp.add_argument("--ego", required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--file")

    sp = add("injectivity-sweep",
             lambda ns: _single(ns, "injectivity", ego=ns.ego, power=ns.power_bound, size=ns.size_bound),
             "search for a failure of injectivity within bounds")
    sp.add_argument("--ego", required=True)
    sp.add_argument("--file")

    sp = add("endoprimal", lambda ns: _single(ns, "endoprimal", algebra=ns.algebra, k=ns.k),
             "is every k-ary End-preserving operation a term?")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--file")

    sp = add("free-algebra", lambda ns: _single(ns, "free-algebra", algebra=ns.algebra, k=ns.k),
             "size of the k-generated free algebra")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--file")

    sp = add("verify-witness", cmd_verify, "re-check the witnesses in a saved report")
    sp.add_argument("report_file")

    sp = add("report", cmd_report, "re-render a saved report")
    sp.add_argument("report_file")
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(levelname)s: %(message)s")
    p = build_parser()
    try:
        ns = p.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if not hasattr(ns, "file"):
        ns.file = getattr(ns, "decls", None)
    if getattr(ns, "decls", None):
        ns.file = ns.decls
    try:
        return ns.fn(ns)
    except ElaborationError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return 2
    except (UsageError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"natdual: error: {e}", file=sys.stderr)
        return 2
    except DualityError as e:
        print(f"natdual: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

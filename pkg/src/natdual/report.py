"""Reports: content digests of the inputs, JSON and markdown renderings and
a small on-disk cache keyed by command, digests and bounds."""
import dataclasses
import hashlib
import json
import logging
import os
from pathlib import Path

from .duality import SCOPE
from .speclang import REFERENCE_ARGS, serialize_algebra, serialize_ego, serialize_relation

log = logging.getLogger("natdual")

REPORT_KEYS = ("command", "inputs", "verdict", "witness", "bounds", "elapsed_ms", "scope")


def digest(text):
    return hashlib.sha256(text.encode()).hexdigest()


def input_records(env, args):
    """One record per referenced object, with its text so the report can be
    re-checked on its own.  An ego brings its algebra along."""
    recs, seen = [], set()

    def add(kind, name, text, source):
        if (kind, name) in seen:
            return
        seen.add((kind, name))
        recs.append({"id": name, "kind": kind, "digest": digest(text), "source": source, "text": text})

    for key, val in sorted(args.items()):
        kind = REFERENCE_ARGS.get(key)
        if not kind:
            continue
        for name in val.split(","):
            if kind == "algebra":
                add("algebra", name, serialize_algebra(env.algebra(name)), env.origin("algebra", name))
            elif kind == "ego":
                ego = env.ego(name)
                add("algebra", ego.over.name, serialize_algebra(ego.over), env.origin("algebra", ego.over.name))
                add("ego", name, serialize_ego(ego), env.origin("ego", name))
            else:
                r, on = env.relation(name)
                add("algebra", on, serialize_algebra(env.algebra(on)), env.origin("algebra", on))
                add("rel", name, serialize_relation(name, r, on), env.origin("rel", name))
    order = {"algebra": 0, "rel": 1, "ego": 2}
    return sorted(recs, key=lambda r: (order[r["kind"]], r["id"]))


def bounds_record(bounds, args):
    out = dataclasses.asdict(bounds)
    out["power_bound"] = int(args["power"]) if "power" in args else None
    out["size_bound"] = int(args["size"]) if "size" in args else None
    return out


def make_report(outcome, inputs, bounds, elapsed_ms=None):
    return {
        "command": outcome.command,
        "args": dict(sorted(outcome.args.items())),
        "inputs": inputs,
        "verdict": outcome.verdict,
        "expected": outcome.expected,
        "passed": outcome.passed,
        "witness": outcome.witness,
        "detail": outcome.detail,
        "bounds": bounds_record(bounds, outcome.args),
        "elapsed_ms": elapsed_ms,
        "scope": SCOPE,
    }


def cache_key(command, args, inputs, bounds):
    blob = json.dumps({"command": command, "args": dict(sorted(args.items())),
                       "inputs": [(r["kind"], r["id"], r["digest"]) for r in inputs],
                       "bounds": dataclasses.asdict(bounds)}, sort_keys=True)
    return digest(blob)


class Cache:
    def __init__(self, root=None):
        root = root if root is not None else os.environ.get("DW_CACHE_DIR")
        self.root = Path(root) if root else None

    def get(self, key):
        if self.root is None:
            return None
        path = self.root / f"{key}.json"
        if not path.exists():
            return None
        try:
            rep = json.loads(path.read_text())
            if not isinstance(rep, dict) or any(k not in rep for k in REPORT_KEYS):
                raise ValueError("missing fields")
            return rep
        except (ValueError, OSError) as e:
            log.warning("cache entry %s is corrupt (%s); recomputing", path.name, e)
            return None

    def put(self, key, rep):
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = self.root / f".{key}.{os.getpid()}.tmp"
        tmp.write_text(dumps(rep))
        tmp.replace(self.root / f"{key}.json")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _cell(x):
    if x is None:
        return "-"
    if isinstance(x, (dict, list)):
        return "`" + json.dumps(x, sort_keys=True) + "`"
    return str(x)


def to_markdown(rep):
    if "results" in rep:
        lines = [f"# {rep['command']} {rep.get('name') or ''}".rstrip(), "",
                 f"scope: {rep['scope']}", "",
                 "| id | command | verdict | expected | result |", "|---|---|---|---|---|"]
        for r in rep["results"]:
            args = " ".join(f"{k}={v}" for k, v in r["args"].items())
            lines.append(f"| {r.get('id', '')} | {r['command']} {args} | {r['verdict']} | "
                         f"{_cell(r['expected'])} | {'pass' if r['passed'] else 'FAIL'} |")
        lines += ["", f"passed {rep['passed']} of {rep['total']}"]
        return "\n".join(lines) + "\n"
    lines = [f"# {rep['command']}", "",
             f"- verdict: **{rep['verdict']}**",
             f"- expected: {_cell(rep['expected'])}",
             f"- passed: {rep['passed']}",
             f"- witness: {_cell(rep['witness'])}",
             f"- elapsed_ms: {_cell(rep['elapsed_ms'])}",
             f"- scope: {rep['scope']}", "", "## inputs", ""]
    for r in rep["inputs"]:
        lines.append(f"- {r['kind']} `{r['id']}` ({r['source']}) sha256 `{r['digest']}`")
    lines += ["", "## bounds", ""]
    lines += [f"- {k}: {_cell(v)}" for k, v in sorted(rep["bounds"].items())]
    if rep.get("detail"):
        lines += ["", "## detail", ""]
        lines += [f"- {k}: {_cell(v)}" for k, v in sorted(rep["detail"].items())]
    return "\n".join(lines) + "\n"


def render(rep, fmt="json"):
    return dumps(rep) if fmt == "json" else to_markdown(rep)

"""A small text format for algebras, alter egos, relations and check plans.

    algebra dl-2 {
      size 2 labels 0 1
      op join/2 = [0 1 1 1]
      op bot/0 = [0]
    }
    ego two-T over dl-2 { rel le/2 = {(0,0) (0,1) (1,1)} }
    rel le/2 on dl-2 = {(0,0) (0,1) (1,1)}
    check smoke { duality algebra=dl-2 ego=two-T expect=iso ; }

Tables are flat, in lexicographic argument order.  ``#`` starts a comment.
Parsing never raises: problems come back as diagnostics ordered by
position, and the parser resynchronises at the next declaration.
"""
import re
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, Relation
from .errors import ElaborationError
from .structures import AlterEgo, PartialOperation, is_algebraic_over

DECL_KEYWORDS = ("algebra", "ego", "rel", "check")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<word>[A-Za-z0-9_'][A-Za-z0-9_'.-]*)
  | (?P<punct>[{}()\[\],/=;])
""", re.X)


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str          # "word", "punct" or "eof"
    text: str
    span: Span

    @property
    def is_nat(self):
        return self.kind == "word" and self.text.isdigit()

    @property
    def is_name(self):
        return self.kind == "word" and (self.text[0].isalpha() or self.text[0] == "_")

    def show(self):
        return "end of input" if self.kind == "eof" else repr(self.text)


@dataclass(frozen=True)
class Diagnostic:
    span: Span
    message: str
    expected: tuple = ()
    related: tuple = ()      # (Span, note) pairs

    def __str__(self):
        out = f"{self.span}: error: {self.message}"
        if self.expected:
            out += f" (expected {' or '.join(self.expected)})"
        for sp, note in self.related:
            out += f"\n  {sp}: note: {note}"
        return out


def tokenize(text):
    toks, diags = [], []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            diags.append(Diagnostic(Span(line, pos - start + 1), f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("word", "punct"):
            toks.append(Token(kind, m.group(), Span(line, pos - start + 1)))
        pos = m.end()
    toks.append(Token("eof", "", Span(line, pos - start + 1)))
    return toks, diags


# --------------------------------------------------------------------------
# syntax tree

@dataclass
class OpDef:
    name: str
    arity: int
    values: list
    span: Span
    domain: list = None          # partial operations only


@dataclass
class RelDef:
    name: str
    arity: int
    tuples: list
    span: Span


@dataclass
class RelRef:
    name: str
    span: Span


@dataclass
class AlgebraDecl:
    name: str
    size: int
    labels: list
    ops: list
    span: Span
    kind: str = "algebra"


@dataclass
class EgoDecl:
    name: str
    over: str
    items: list
    span: Span
    over_span: Span = None
    kind: str = "ego"


@dataclass
class RelationDecl:
    name: str
    arity: int
    on: str
    tuples: list
    span: Span
    on_span: Span = None
    kind: str = "rel"


@dataclass
class Command:
    name: str
    args: dict
    span: Span = None
    arg_spans: dict = field(default_factory=dict)

    def text(self):
        return " ".join([self.name] + [f"{k}={v}" for k, v in self.args.items()])


@dataclass
class CheckDecl:
    name: str
    commands: list
    span: Span
    kind: str = "check"


@dataclass
class SpecDocument:
    declarations: list
    diagnostics: list

    @property
    def ok(self):
        return not self.diagnostics

    def find(self, kind, name):
        for d in self.declarations:
            if d.kind == kind and d.name == name:
                return d
        return None


class _Abort(Exception):
    pass


class _Parser:
    def __init__(self, text):
        self.toks, self.diags = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, expected=(), span=None, related=()):
        self.diags.append(Diagnostic(span or self.tok.span, msg, tuple(expected), tuple(related)))

    def fail(self, expected):
        self.error(f"unexpected {self.tok.show()}", expected)
        raise _Abort

    def advance(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def punct(self, p):
        if self.tok.kind == "punct" and self.tok.text == p:
            return self.advance()
        self.fail([repr(p)])

    def keyword(self, kw):
        if self.tok.kind == "word" and self.tok.text == kw:
            return self.advance()
        self.fail([repr(kw)])

    def at(self, text):
        return self.tok.kind != "eof" and self.tok.text == text

    def name(self):
        if self.tok.is_name:
            return self.advance()
        self.fail(["NAME"])

    def nat(self):
        if self.tok.is_nat:
            return self.advance()
        self.fail(["NAT"])

    # -- grammar --------------------------------------------------------

    def document(self):
        decls = []
        while self.tok.kind != "eof":
            if not (self.tok.kind == "word" and self.tok.text in DECL_KEYWORDS):
                self.error(f"unexpected {self.tok.show()}", [repr(k) for k in DECL_KEYWORDS])
                self.recover()
                continue
            start = self.i
            try:
                decls.append(getattr(self, "decl_" + self.tok.text)())
            except _Abort:
                self.recover(start)
        return decls

    def _decl_start(self, j):
        t = self.toks[j]
        nxt = self.toks[j + 1] if j + 1 < len(self.toks) else t
        return t.kind == "word" and t.text in DECL_KEYWORDS and nxt.is_name

    def recover(self, start=None):
        """Resume after the brace closing the current declaration, or at the
        next declaration keyword, whichever comes first."""
        e = self.i
        if start is None:
            j = e + 1
            while self.toks[j].kind != "eof" and not self._decl_start(j):
                j += 1
            self.i = j
            return
        depth = 0
        for t in self.toks[start:e]:
            if t.kind == "punct":
                depth += {"{": 1, "}": -1}.get(t.text, 0)
        j = e
        while self.toks[j].kind != "eof":
            t = self.toks[j]
            if j > start and self._decl_start(j) and (depth <= 0 or t.text != "rel"):
                break
            if t.kind == "punct" and t.text in "{}":
                depth += 1 if t.text == "{" else -1
                if depth <= 0 and t.text == "}":
                    j += 1
                    break
            j += 1
        self.i = max(j, start + 1)

    def table(self):
        self.punct("[")
        vals = []
        while self.tok.is_nat:
            vals.append(self.advance())
        self.punct("]")
        return vals

    def tuples(self):
        self.punct("{")
        out = []
        while self.at("("):
            lp = self.advance()
            row = [int(self.nat().text)]
            while self.at(","):
                self.advance()
                row.append(int(self.nat().text))
            self.punct(")")
            out.append((lp.span, row))
        if not self.at("}"):
            self.fail(["'('", "'}'"])
        self.advance()
        return out

    def sig(self):
        n = self.name()
        self.punct("/")
        return n, int(self.nat().text)

    def check_range(self, toks, size, what):
        for t in toks:
            if int(t.text) >= size:
                self.error(f"value {t.text} exceeds carrier {size}", span=t.span)

    def decl_algebra(self):
        kw = self.keyword("algebra")
        name = self.name()
        self.punct("{")
        self.keyword("size")
        size_tok = self.nat()
        size = int(size_tok.text)
        if size == 0:
            self.error("carrier must be non-empty", span=size_tok.span)
        labels = None
        if self.at("labels"):
            self.advance()
            labels = []
            while self.tok.kind == "word" and self.tok.text != "op":
                labels.append(self.advance())
            if len(labels) != size:
                self.error(f"{len(labels)} labels for carrier {size}", span=kw.span)
            seen = {}
            for t in labels:
                if t.text in seen:
                    self.error(f"duplicate label {t.text!r}", span=t.span,
                               related=[(seen[t.text], "first used here")])
                seen.setdefault(t.text, t.span)
            labels = [t.text for t in labels]
        ops = []
        while self.at("op"):
            self.advance()
            n, ar = self.sig()
            self.punct("=")
            vals = self.table()
            if len(vals) != size ** ar:
                self.error(f"table for {n.text}/{ar} has {len(vals)} entries, expected {size ** ar}",
                           span=n.span)
            self.check_range(vals, size, n.text)
            ops.append(OpDef(n.text, ar, [int(v.text) for v in vals], n.span))
        if not self.at("}"):
            self.fail(["'op'", "'}'"] if labels is not None else ["'labels'", "'op'", "'}'"])
        self.advance()
        self.duplicates(ops, "operation")
        return AlgebraDecl(name.text, size, labels, ops, name.span)

    def decl_ego(self):
        self.keyword("ego")
        name = self.name()
        self.keyword("over")
        over = self.name()
        self.punct("{")
        items = []
        while True:
            if self.at("op"):
                self.advance()
                n, ar = self.sig()
                self.punct("=")
                vals = self.table()
                items.append(OpDef(n.text, ar, vals, n.span))
            elif self.at("partial"):
                self.advance()
                n, ar = self.sig()
                self.keyword("dom")
                dom = self.tuples()
                for sp, row in dom:
                    if len(row) != ar:
                        self.error(f"domain tuple of length {len(row)} for {n.text}/{ar}", span=sp)
                self.punct("=")
                vals = self.table()
                if len(vals) != len(dom):
                    self.error(f"{len(vals)} values for a domain of {len(dom)} tuples", span=n.span)
                items.append(OpDef(n.text, ar, vals, n.span, domain=dom))
            elif self.at("rel"):
                self.advance()
                n = self.name()
                if self.at("/"):
                    self.advance()
                    ar = int(self.nat().text)
                    self.punct("=")
                    tups = self.tuples()
                    self._arity_check(tups, ar, n.text)
                    items.append(RelDef(n.text, ar, tups, n.span))
                else:
                    items.append(RelRef(n.text, n.span))
            elif self.at("}"):
                self.advance()
                break
            else:
                self.fail(["'op'", "'partial'", "'rel'", "'}'"])
        self.duplicates(items, "symbol")
        return EgoDecl(name.text, over.text, items, name.span, over.span)

    def _arity_check(self, tups, ar, name):
        for sp, row in tups:
            if len(row) != ar:
                self.error(f"tuple of length {len(row)} in {name}/{ar}", span=sp)

    def decl_rel(self):
        self.keyword("rel")
        n, ar = self.sig()
        self.keyword("on")
        on = self.name()
        self.punct("=")
        tups = self.tuples()
        self._arity_check(tups, ar, n.text)
        return RelationDecl(n.text, ar, on.text, tups, n.span, on.span)

    def decl_check(self):
        self.keyword("check")
        name = self.name()
        self.punct("{")
        cmds = []
        while not self.at("}"):
            if not self.tok.is_name:
                self.fail(["command", "'}'"])
            c = self.advance()
            args, spans = {}, {}
            while self.tok.kind == "word":
                key = self.advance()
                self.punct("=")
                parts = [self.value()]
                while self.at(","):
                    self.advance()
                    parts.append(self.value())
                if key.text in args:
                    self.error(f"repeated argument {key.text!r}", span=key.span,
                               related=[(spans[key.text], "first given here")])
                args[key.text] = ",".join(parts)
                spans[key.text] = key.span
            self.punct(";")
            cmds.append(Command(c.text, args, c.span, spans))
        self.advance()
        if not cmds:
            self.error("check plan has no commands", span=name.span)
        return CheckDecl(name.text, cmds, name.span)

    def value(self):
        if self.tok.kind == "word":
            return self.advance().text
        self.fail(["value"])

    def duplicates(self, items, what):
        seen = {}
        for it in items:
            if it.name in seen:
                self.error(f"duplicate {what} {it.name!r}", span=it.span,
                           related=[(seen[it.name], "first defined here")])
            else:
                seen[it.name] = it.span


def parse(text):
    """Parse a document; never raises.  Check ``doc.diagnostics``."""
    p = _Parser(text)
    decls = p.document()
    seen = {}
    for d in decls:
        key = (d.kind, d.name)
        if key in seen:
            p.error(f"duplicate {d.kind} name {d.name!r}", span=d.span,
                    related=[(seen[key], "first defined here")])
        else:
            seen[key] = d.span
    diags = sorted(p.diags, key=lambda d: (d.span.line, d.span.col))
    return SpecDocument(decls, diags)


# --------------------------------------------------------------------------
# elaboration

@dataclass
class Elaboration:
    algebras: dict
    egos: dict
    relations: dict          # name -> (Relation, algebra name)
    checks: dict             # name -> list of Command


KNOWN_COMMANDS = {
    "algebraic": ("ego",),
    "duality": ("algebra", "ego"),
    "endodual": ("algebra", "over"),
    "duality-subalgebras": ("algebra", "ego", "power"),
    "fullness": ("ego", "k"),
    "injectivity": ("ego", "power", "size"),
    "entails": ("ego", "rel"),
    "clone-entails": ("rels", "rel"),
    "endoprimal": ("algebra", "k"),
    "free-algebra": ("algebra", "k"),
    "retract": ("algebra", "k", "retract"),
    "core": ("algebra",),
}
REFERENCE_ARGS = {"algebra": "algebra", "over": "algebra", "retract": "algebra", "ego": "ego",
                  "rel": "rel", "rels": "rel"}
INT_ARGS = ("k", "power", "size")


def elaborate(doc, verify=True, resolver=None):
    """Resolve a parsed document into algebras, egos, relations and check
    plans.  Egos are checked for algebraicity unless ``verify`` is off.
    ``resolver(kind, name)`` may supply objects not declared in the
    document (the cli passes the catalog)."""
    if doc.diagnostics:
        raise ElaborationError(doc.diagnostics)
    diags = []
    algebras, egos, relations, checks = {}, {}, {}, {}

    def err(span, msg, related=()):
        diags.append(Diagnostic(span, msg, (), tuple(related)))

    def lookup(kind, name):
        table = {"algebra": algebras, "ego": egos, "rel": relations}[kind]
        if name in table:
            return table[name]
        if resolver is not None:
            try:
                obj = resolver(kind, name)
            except KeyError:
                obj = None
            if obj is not None:
                return obj
        return None

    def in_range(vals, m, name, span):
        for v in vals:
            v = int(getattr(v, "text", v))
            if v >= m:
                err(getattr(span, "span", span), f"value {v} exceeds carrier {m} in {name}")
                return False
        return True

    for d in doc.declarations:
        if d.kind == "algebra":
            ops = {}
            for op in d.ops:
                arr = np.array(op.values, dtype=np.int64)
                ops[op.name] = arr.reshape(()) if op.arity == 0 else arr.reshape((d.size,) * op.arity)
            try:
                algebras[d.name] = FiniteAlgebra(d.name, d.size, ops, d.labels)
            except ValueError as e:
                err(d.span, str(e))
        elif d.kind == "rel":
            A = lookup("algebra", d.on)
            if A is None:
                err(d.on_span, f"relation {d.name!r} is on undefined algebra {d.on!r}")
                continue
            rows = [tuple(r) for _, r in d.tuples]
            if all(in_range(r, A.size, d.name, d.span) for r in rows):
                relations[d.name] = (Relation(d.arity, frozenset(rows)), A.name)
        elif d.kind == "ego":
            A = lookup("algebra", d.over)
            if A is None:
                err(d.over_span, f"ego {d.name!r} is over undefined algebra {d.over!r}")
                continue
            m = A.size
            G, H, R, ok = {}, {}, {}, True
            for it in d.items:
                if isinstance(it, RelRef):
                    got = lookup("rel", it.name)
                    if got is None:
                        err(it.span, f"undefined relation {it.name!r}")
                        ok = False
                    elif got[1] != A.name:
                        err(it.span, f"relation {it.name!r} is on {got[1]!r}, not {A.name!r}")
                        ok = False
                    else:
                        R[it.name] = got[0]
                elif isinstance(it, RelDef):
                    rows = [tuple(r) for _, r in it.tuples]
                    ok &= all(in_range(r, m, it.name, it.span) for r in rows)
                    R[it.name] = Relation(it.arity, frozenset(rows))
                elif it.domain is None:
                    if len(it.values) != m ** it.arity:
                        err(it.span, f"table for {it.name}/{it.arity} has {len(it.values)} entries, "
                                     f"expected {m ** it.arity}")
                        ok = False
                        continue
                    ok &= in_range(it.values, m, it.name, it.span)
                    arr = np.array([int(v.text) for v in it.values], dtype=np.int64)
                    G[it.name] = arr.reshape(()) if it.arity == 0 else arr.reshape((m,) * it.arity)
                else:
                    dom = [tuple(r) for _, r in it.domain]
                    vals = [int(v.text) for v in it.values]
                    ok &= all(in_range(r, m, it.name, it.span) for r in dom) and in_range(vals, m, it.name, it.span)
                    if len(set(dom)) != len(dom):
                        err(it.span, f"repeated domain tuple in {it.name}")
                        ok = False
                    H[it.name] = PartialOperation(it.arity, dict(zip(dom, vals)))
            if not ok:
                continue
            ego = AlterEgo(d.name, A, G=G, H=H, R=R)
            if verify:
                rep = is_algebraic_over(ego)
                for sym, v in rep.failures():
                    err(d.span, f"ego {d.name!r}: {sym} is not algebraic over {A.name!r} "
                                f"(closure fails at {v[0]})")
                if not rep.ok:
                    continue
            egos[d.name] = ego
        else:
            for c in d.commands:
                if c.name not in KNOWN_COMMANDS:
                    err(c.span, f"unknown operation {c.name!r}",
                        [(c.span, "known: " + ", ".join(sorted(KNOWN_COMMANDS)))])
                    continue
                for key in KNOWN_COMMANDS[c.name]:
                    if key not in c.args:
                        err(c.span, f"{c.name} needs {key}=")
                for key, val in c.args.items():
                    sp = c.arg_spans.get(key, c.span)
                    if key in INT_ARGS and not val.isdigit():
                        err(sp, f"{key} must be a natural number")
                    kind = REFERENCE_ARGS.get(key)
                    if kind:
                        for part in val.split(","):
                            if lookup(kind, part) is None:
                                err(sp, f"undefined {kind} {part!r}")
            checks[d.name] = d.commands
    if diags:
        raise ElaborationError(sorted(diags, key=lambda d: (d.span.line, d.span.col)))
    return Elaboration(algebras, egos, relations, checks)


def load(text, verify=True, resolver=None):
    return elaborate(parse(text), verify, resolver)


# --------------------------------------------------------------------------
# serialisation

def _flat(arr):
    return " ".join(str(int(v)) for v in np.asarray(arr).ravel())


def _tuples(rows):
    return "{" + " ".join("(" + ",".join(str(x) for x in r) + ")" for r in sorted(rows)) + "}"


def serialize_algebra(A):
    lines = [f"algebra {A.name} {{", f"  size {A.size}"]
    if A.labels is not None:
        lines.append("  labels " + " ".join(A.labels))
    for sym, arr in A.ops.items():
        arr = np.asarray(getattr(arr, "values", arr))
        lines.append(f"  op {sym}/{arr.ndim} = [{_flat(arr)}]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_ego(ego):
    lines = [f"ego {ego.name} over {ego.over.name} {{"]
    for sym, arr in ego.G.items():
        lines.append(f"  op {sym}/{arr.ndim} = [{_flat(arr)}]")
    for sym, p in ego.H.items():
        dom = p.domain
        lines.append(f"  partial {sym}/{p.arity} dom {_tuples(dom)} = [{' '.join(str(p.mapping[t]) for t in dom)}]")
    for sym, r in ego.R.items():
        lines.append(f"  rel {sym}/{r.arity} = {_tuples(r.tuples)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_relation(name, r, on):
    return f"rel {name}/{r.arity} on {on} = {_tuples(r.tuples)}\n"


def serialize(obj):
    if isinstance(obj, FiniteAlgebra):
        return serialize_algebra(obj)
    if isinstance(obj, AlterEgo):
        return serialize_ego(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def serialize_catalog(entries=None):
    from .catalog import load_catalog
    entries = load_catalog() if entries is None else entries
    algs = [e.obj for e in entries if e.kind == "algebra"]
    have = {A.name for A in algs}
    for e in entries:
        if e.kind == "ego" and e.obj.over.name not in have:
            algs.append(e.obj.over)
            have.add(e.obj.over.name)
    parts = [serialize_algebra(A) for A in algs]
    parts += [serialize_ego(e.obj) for e in entries if e.kind == "ego"]
    return "\n".join(parts)

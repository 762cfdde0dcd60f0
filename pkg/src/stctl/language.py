"""Model and property languages: lexer, recursive-descent parsers, printers.

Model files::

    agent V1 {
      clock x1;
      init idle;
      loc idle { }
      loc deciding { invariant x1 <= 8; labels busy; }
      edge idle -> deciding on start_1 reset { x1 };
    }

Property files hold one line such as ``#synth <<V1>> E F[0;8] voted_1_1``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from .model import (
    Agent,
    AtomicConstraint,
    Diagnostic,
    Edge,
    Location,
    Network,
    Span,
    validate_network,
)
from .zones import Interval, ZoneError


class ParseError(Exception):
    """Raised with every diagnostic collected while reading an input."""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<directive>\#[A-Za-z_]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<nat>[0-9]+)
  | (?P<sym><<|>>|<=|>=|->|[<>=&|!(){}\[\];,.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | nat | sym | directive | eof
    text: str
    span: Span


def tokenize(text: str) -> List[Token]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError([Diagnostic("error", "lexical",
                                         f"unexpected character {text[pos]!r}",
                                         Span(line, col, pos, 1))])
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(Token(kind, s, Span(line, col, pos, len(s))))
            col += len(s)
        pos = m.end()
    toks.append(Token("eof", "", Span(line, col, len(text), 0)))
    return toks


class _Cursor:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident", "directive") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: Optional[Token] = None, kind: str = "syntax"):
        t = tok or self.tok
        shown = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError([Diagnostic("error", kind, f"{msg}, found {shown}", t.span)])

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}")
        return self.advance()

    def nat(self) -> Token:
        if self.tok.kind != "nat":
            self.fail("expected a natural number")
        return self.advance()


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

_RELS = ("<", "<=", "=", ">=", ">")


def _parse_guard(cur: _Cursor):
    atoms = []
    while True:
        name = cur.ident("clock name")
        if cur.tok.kind != "sym" or cur.tok.text not in _RELS:
            cur.fail("expected a comparison operator")
        rel = cur.advance().text
        bound = int(cur.nat().text)
        atoms.append((name, rel, bound))
        if not cur.at("&"):
            return atoms
        cur.advance()


def parse_model(text: str) -> Network:
    """Parse and validate a model; raises :class:`ParseError` on any error."""
    cur = _Cursor(text)
    raw_agents = []
    while cur.tok.kind != "eof":
        raw_agents.append(_parse_agent(cur))
    if not raw_agents:
        cur.fail("expected 'agent'")
    net = _resolve(raw_agents)
    whole = Span(1, 1, 0, max(len(text), 1))
    errors = [d if d.span else Diagnostic(d.severity, d.kind, d.message, whole)
              for d in validate_network(net) if d.is_error]
    if errors:
        raise ParseError(errors)
    return net


def _parse_agent(cur: _Cursor) -> dict:
    cur.expect("agent")
    name = cur.ident("agent name")
    cur.expect("{")
    clocks = []
    if cur.at("clock"):
        cur.advance()
        clocks.append(cur.ident("clock name"))
        while cur.at(","):
            cur.advance()
            clocks.append(cur.ident("clock name"))
        cur.expect(";")
    cur.expect("init")
    init = cur.ident("location name")
    cur.expect(";")
    locs = []
    while cur.at("loc"):
        cur.advance()
        lname = cur.ident("location name")
        cur.expect("{")
        inv, labels = [], []
        if cur.at("invariant"):
            cur.advance()
            inv = _parse_guard(cur)
            cur.expect(";")
        if cur.at("labels"):
            cur.advance()
            labels.append(cur.ident("label"))
            while cur.at(","):
                cur.advance()
                labels.append(cur.ident("label"))
            cur.expect(";")
        cur.expect("}")
        locs.append((lname, inv, labels))
    if not locs:
        cur.fail("expected 'loc'")
    edges = []
    while cur.at("edge"):
        cur.advance()
        src = cur.ident("location name")
        cur.expect("->")
        dst = cur.ident("location name")
        cur.expect("on")
        act = cur.ident("action name")
        guard, resets = [], []
        if cur.at("when"):
            cur.advance()
            guard = _parse_guard(cur)
        if cur.at("reset"):
            cur.advance()
            cur.expect("{")
            resets.append(cur.ident("clock name"))
            while cur.at(","):
                cur.advance()
                resets.append(cur.ident("clock name"))
            cur.expect("}")
        cur.expect(";")
        edges.append((src, dst, act, guard, resets))
    cur.expect("}")
    return dict(name=name, clocks=clocks, init=init, locs=locs, edges=edges)


def _resolve(raw_agents: List[dict]) -> Network:
    diags: List[Diagnostic] = []

    def err(kind, msg, tok):
        diags.append(Diagnostic("error", kind, msg, tok.span))

    clock_names: List[str] = []
    clock_ids: Dict[str, int] = {}
    agent_names = set()
    for ra in raw_agents:
        if ra["name"].text in agent_names:
            err("duplicate-agent", f"duplicate agent {ra['name'].text!r}", ra["name"])
        agent_names.add(ra["name"].text)
        for t in ra["clocks"]:
            if t.text in clock_ids:
                err("duplicate-clock", f"duplicate clock {t.text!r}", t)
                continue
            clock_ids[t.text] = len(clock_names)
            clock_names.append(t.text)

    action_names: List[str] = []
    action_ids: Dict[str, int] = {}

    def clock(t):
        if t.text not in clock_ids:
            err("unknown-clock", f"undeclared clock {t.text!r}", t)
            return None
        return clock_ids[t.text]

    def guard(atoms):
        out = []
        for name, rel, bound in atoms:
            c = clock(name)
            if c is not None:
                out.append(AtomicConstraint(c, rel, bound))
        return tuple(out)

    agents = []
    for gid, ra in enumerate(raw_agents):
        loc_ids: Dict[str, int] = {}
        locations = []
        for lname, inv, labels in ra["locs"]:
            if lname.text in loc_ids:
                err("duplicate-location", f"duplicate location {lname.text!r}", lname)
                continue
            loc_ids[lname.text] = len(locations)
            locations.append(Location(len(locations), lname.text, guard(inv),
                                      frozenset(t.text for t in labels)))

        def loc(t):
            if t.text not in loc_ids:
                err("unknown-location", f"undeclared location {t.text!r} in agent {ra['name'].text!r}", t)
                return None
            return loc_ids[t.text]

        init = loc(ra["init"])
        for _lname, inv, _labels in ra["locs"]:
            for name, rel, _bound in inv:
                if rel == "<":
                    err("strict-invariant",
                        "strict upper bound '<' is not supported in invariants", name)
        if init is not None and not all(a.holds(0) for a in locations[init].invariant):
            err("initial-invariant", "initial invariant unsatisfiable at clock values 0", ra["init"])
        edges = []
        for src, dst, act, g, resets in ra["edges"]:
            s, d = loc(src), loc(dst)
            if act.text not in action_ids:
                action_ids[act.text] = len(action_names)
                action_names.append(act.text)
            rs = [clock(t) for t in resets]
            for t in resets:
                if t.text in clock_ids and t.text not in {c.text for c in ra["clocks"]}:
                    err("foreign-clock", f"edge resets clock {t.text!r} of another agent", t)
            gg = guard(g)
            if s is None or d is None or None in rs:
                continue
            edges.append(Edge(s, action_ids[act.text], gg, frozenset(rs), d))
        own = tuple(clock_ids[t.text] for t in ra["clocks"] if t.text in clock_ids)
        agents.append(Agent(gid, ra["name"].text, own, locations, edges,
                            init if init is not None else 0))
    if diags:
        raise ParseError(diags)
    return Network(agents, clock_names, action_names)


def _fmt_guard(n: Network, atoms) -> str:
    return " & ".join(f"{n.clock_names[a.clock]} {a.relation} {a.bound}" for a in atoms)


def pretty_print_model(n: Network) -> str:
    lines = []
    for g in n.agents:
        lines.append(f"agent {g.name} {{")
        if g.clocks:
            lines.append("  clock " + ", ".join(n.clock_names[c] for c in g.clocks) + ";")
        lines.append(f"  init {g.locations[g.initial].name};")
        for loc in g.locations:
            body = []
            if loc.invariant:
                body.append(f"invariant {_fmt_guard(n, loc.invariant)};")
            if loc.labels:
                body.append("labels " + ", ".join(sorted(loc.labels)) + ";")
            inner = " ".join(body)
            lines.append(f"  loc {loc.name} {{ {inner + ' ' if inner else ''}}}")
        for e in g.edges:
            s = (f"  edge {g.locations[e.source].name} -> {g.locations[e.target].name}"
                 f" on {n.action_names[e.action]}")
            if e.guard:
                s += f" when {_fmt_guard(n, e.guard)}"
            if e.resets:
                s += " reset { " + ", ".join(n.clock_names[c] for c in sorted(e.resets)) + " }"
            lines.append(s + ";")
        lines.append("}")
    return "\n".join(lines) + "\n"


def network_signature(n: Network):
    """Id-free structural summary used to compare networks up to renumbering."""
    agents = []
    for g in n.agents:
        def gname(atoms):
            return tuple(sorted((n.clock_names[a.clock], a.relation, a.bound) for a in atoms))

        locs = tuple(sorted((loc.name, gname(loc.invariant), tuple(sorted(loc.labels)))
                            for loc in g.locations))
        edges = tuple(sorted(
            (g.locations[e.source].name, n.action_names[e.action], gname(e.guard),
             tuple(sorted(n.clock_names[c] for c in e.resets)), g.locations[e.target].name)
            for e in g.edges))
        agents.append((g.name, tuple(sorted(n.clock_names[c] for c in g.clocks)),
                       g.locations[g.initial].name, locs, edges))
    return tuple(sorted(agents))


# ---------------------------------------------------------------------------
# property
# ---------------------------------------------------------------------------

class Mode(enum.Enum):
    CHECK = "check"
    SYNTH = "synth"


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class LocRef:
    agent: str
    location: str


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class TemporalObjective:
    """``quantifier left operator_interval right`` with operator U or R.

    F and G are accepted by the parser and stored in their normalised form
    (``true U`` and ``false R``); :attr:`sugar` recovers the short form.
    """

    quantifier: str  # "A" | "E"
    operator: str  # "U" | "R"
    interval: Interval
    left: object
    right: object

    @property
    def sugar(self) -> str:
        if self.operator == "U" and self.left == TRUE:
            return "F"
        if self.operator == "R" and self.left == FALSE:
            return "G"
        return self.operator


@dataclass(frozen=True)
class StctlProperty:
    mode: Mode
    coalition: FrozenSet[int]
    coalition_names: Tuple[str, ...]
    objective: TemporalObjective


def _parse_sf(cur: _Cursor):
    left = _parse_conj(cur)
    while cur.at("|"):
        cur.advance()
        left = Or(left, _parse_conj(cur))
    return left


def _parse_conj(cur: _Cursor):
    left = _parse_unary(cur)
    while cur.at("&"):
        cur.advance()
        left = And(left, _parse_unary(cur))
    return left


def _parse_unary(cur: _Cursor):
    if cur.at("!"):
        cur.advance()
        return Not(_parse_unary(cur))
    if cur.at("("):
        cur.advance()
        f = _parse_sf(cur)
        cur.expect(")")
        return f
    if cur.at("<<"):
        raise ParseError([Diagnostic("error", "nested-strategic",
                                     "nested strategic operators unsupported", cur.tok.span)])
    t = cur.ident("proposition")
    if t.text == "true":
        return TRUE
    if t.text == "false":
        return FALSE
    if cur.at("."):
        cur.advance()
        loc = cur.ident("location name")
        return _Spanned(LocRef(t.text, loc.text), t.span)
    return _Spanned(Prop(t.text), t.span)


class _Spanned:
    # carries source spans through to resolution, then unwrapped
    __slots__ = ("node", "span")

    def __init__(self, node, span):
        self.node = node
        self.span = span


def _parse_interval(cur: _Cursor):
    start = cur.tok
    if not (cur.at("[") or cur.at("(")):
        cur.fail("expected '[' or '(' to open an interval")
    lstrict = cur.advance().text == "("
    lo = int(cur.nat().text)
    cur.expect(";")
    if cur.at("inf"):
        cur.advance()
        hi = None
    else:
        hi = int(cur.nat().text)
    if not (cur.at("]") or cur.at(")")):
        cur.fail("expected ']' or ')' to close an interval")
    ustrict = cur.advance().text == ")"
    if hi is None and not ustrict:
        raise ParseError([Diagnostic("error", "malformed-interval",
                                     "an infinite upper bound must be open: use 'inf)'", start.span)])
    if hi is not None and lo > hi:
        raise ParseError([Diagnostic("error", "malformed-interval",
                                     f"malformed interval: lower bound {lo} > upper bound {hi}",
                                     start.span)])
    try:
        return Interval(lo, hi, lstrict, ustrict)
    except ZoneError as exc:
        raise ParseError([Diagnostic("error", "malformed-interval", str(exc), start.span)])


def _is_temporal(cur: _Cursor, names) -> bool:
    return (cur.tok.kind == "ident" and cur.tok.text in names
            and cur.peek().kind == "sym" and cur.peek().text in ("[", "("))


def parse_property(text: str, n: Network) -> StctlProperty:
    cur = _Cursor(text)
    if cur.tok.kind != "directive" or cur.tok.text not in ("#check", "#synth"):
        cur.fail("expected '#check' or '#synth'")
    mode = Mode.CHECK if cur.advance().text == "#check" else Mode.SYNTH
    cur.expect("<<")
    names = [cur.ident("agent name")]
    while cur.at(","):
        cur.advance()
        names.append(cur.ident("agent name"))
    cur.expect(">>")
    if cur.at("<<"):
        raise ParseError([Diagnostic("error", "nested-strategic",
                                     "nested strategic operators unsupported", cur.tok.span)])
    if not (cur.at("A") or cur.at("E")):
        cur.fail("expected path quantifier 'A' or 'E'")
    quant = cur.advance().text
    if _is_temporal(cur, ("F", "G")):
        op = cur.advance().text
        interval = _parse_interval(cur)
        right = _parse_sf(cur)
        left = TRUE if op == "F" else FALSE
        op = "U" if op == "F" else "R"
    else:
        left = _parse_sf(cur)
        if not _is_temporal(cur, ("U", "R")):
            cur.fail("expected temporal operator 'U' or 'R' with an interval")
        op = cur.advance().text
        interval = _parse_interval(cur)
        right = _parse_sf(cur)
    if cur.at("<<"):
        raise ParseError([Diagnostic("error", "nested-strategic",
                                     "nested strategic operators unsupported", cur.tok.span)])
    if cur.tok.kind != "eof":
        cur.fail("unexpected trailing input")

    diags: List[Diagnostic] = []
    coalition = set()
    for t in names:
        g = n.agent_named(t.text)
        if g is None:
            diags.append(Diagnostic("error", "unknown-agent", f"unknown agent {t.text!r}", t.span))
        else:
            coalition.add(g.id)
    props = n.propositions
    left = _resolve_sf(left, n, props, diags)
    right = _resolve_sf(right, n, props, diags)
    if diags:
        raise ParseError(diags)
    ordered = tuple(g.name for g in n.agents if g.id in coalition)
    return StctlProperty(mode, frozenset(coalition), ordered,
                         TemporalObjective(quant, op, interval, left, right))


def _resolve_sf(f, n: Network, props, diags):
    if isinstance(f, _Spanned):
        node = f.node
        if isinstance(node, Prop) and node.name not in props:
            diags.append(Diagnostic("error", "unknown-proposition",
                                    f"unknown proposition {node.name!r}", f.span))
        if isinstance(node, LocRef):
            g = n.agent_named(node.agent)
            if g is None:
                diags.append(Diagnostic("error", "unknown-agent",
                                        f"unknown agent {node.agent!r}", f.span))
            elif g.location_named(node.location) is None:
                diags.append(Diagnostic("error", "unknown-location",
                                        f"agent {node.agent!r} has no location {node.location!r}",
                                        f.span))
        return node
    if isinstance(f, Not):
        return Not(_resolve_sf(f.arg, n, props, diags))
    if isinstance(f, (And, Or)):
        return type(f)(_resolve_sf(f.left, n, props, diags), _resolve_sf(f.right, n, props, diags))
    return f


def compile_formula(f, n: Network) -> Callable[[Tuple[int, ...]], bool]:
    """Turn a resolved state formula into a predicate over location vectors."""
    if isinstance(f, Const):
        v = f.value
        return lambda locs: v
    if isinstance(f, Prop):
        pairs = n.propositions.get(f.name, frozenset())
        return lambda locs: any(locs[g] == l for g, l in pairs)
    if isinstance(f, LocRef):
        g = n.agent_named(f.agent)
        lid = g.location_named(f.location).id
        gid = g.id
        return lambda locs: locs[gid] == lid
    if isinstance(f, Not):
        a = compile_formula(f.arg, n)
        return lambda locs: not a(locs)
    if isinstance(f, And):
        a, b = compile_formula(f.left, n), compile_formula(f.right, n)
        return lambda locs: a(locs) and b(locs)
    if isinstance(f, Or):
        a, b = compile_formula(f.left, n), compile_formula(f.right, n)
        return lambda locs: a(locs) or b(locs)
    raise TypeError(f"not a state formula: {f!r}")


_PREC = {Or: 1, And: 2, Not: 3}


def format_formula(f, parent: int = 0) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, LocRef):
        return f"{f.agent}.{f.location}"
    prec = _PREC[type(f)]
    if isinstance(f, Not):
        s = "!" + format_formula(f.arg, prec)
    else:
        sym = " | " if isinstance(f, Or) else " & "
        # left-associative: the right operand needs parentheses at equal precedence
        s = format_formula(f.left, prec) + sym + format_formula(f.right, prec + 1)
    return f"({s})" if prec < parent else s


def pretty_print_property(p: StctlProperty) -> str:
    o = p.objective
    head = f"#{p.mode.value} <<{', '.join(p.coalition_names)}>> {o.quantifier} "
    op = o.sugar
    if op in ("F", "G"):
        return head + f"{op}{o.interval} {format_formula(o.right)}"
    return head + f"{format_formula(o.left)} {op}{o.interval} {format_formula(o.right)}"

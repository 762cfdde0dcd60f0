"""Domain model of a network of timed-automaton agents."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Span:
    """Source position (1-based line/column) and length in characters."""

    line: int
    column: int
    offset: int = 0
    length: int = 1

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    kind: str
    message: str
    span: Optional[Span] = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity}: {self.message}"


@dataclass(frozen=True)
class AtomicConstraint:
    clock: int
    relation: str
    bound: int

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    def holds(self, value: float) -> bool:
        r, c = self.relation, self.bound
        if r == "<":
            return value < c
        if r == "<=":
            return value <= c
        if r == "=":
            return value == c
        if r == ">=":
            return value >= c
        return value > c

    @property
    def is_upper(self) -> bool:
        return self.relation in ("<", "<=", "=")


Guard = Tuple[AtomicConstraint, ...]


@dataclass(frozen=True)
class Location:
    id: int
    name: str
    invariant: Guard = ()
    labels: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class Edge:
    source: int
    action: int
    guard: Guard
    resets: FrozenSet[int]
    target: int


@dataclass
class Agent:
    id: int
    name: str
    clocks: Tuple[int, ...]
    locations: List[Location]
    edges: List[Edge]
    initial: int

    def location_named(self, name: str) -> Optional[Location]:
        for loc in self.locations:
            if loc.name == name:
                return loc
        return None


@dataclass
class Network:
    """A network of agents.

    ``action_owners`` is derived from the edges when not supplied.  Clock and
    action identifiers are global and dense; location identifiers are dense
    per agent.
    """

    agents: List[Agent]
    clock_names: List[str]
    action_names: List[str]
    action_owners: Optional[List[FrozenSet[int]]] = None
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.action_owners is None:
            owners = [set() for _ in self.action_names]
            for g in self.agents:
                for e in g.edges:
                    if 0 <= e.action < len(owners):
                        owners[e.action].add(g.id)
            self.action_owners = [frozenset(s) for s in owners]

    @property
    def nclocks(self) -> int:
        return len(self.clock_names)

    @property
    def propositions(self) -> Dict[str, FrozenSet[Tuple[int, int]]]:
        table: Dict[str, set] = {}
        for g in self.agents:
            for loc in g.locations:
                for p in loc.labels:
                    table.setdefault(p, set()).add((g.id, loc.id))
        return {p: frozenset(v) for p, v in sorted(table.items())}

    def agent_named(self, name: str) -> Optional[Agent]:
        for g in self.agents:
            if g.name == name:
                return g
        return None

    def action_id(self, name: str) -> int:
        return self.action_names.index(name)

    def initial_locations(self) -> Tuple[int, ...]:
        return tuple(g.initial for g in self.agents)

    def outgoing(self, agent: int, loc: int) -> Dict[int, Tuple[Edge, ...]]:
        """Edges leaving ``loc`` grouped by action id (sorted by action id)."""
        key = ("out", agent, loc)
        got = self._cache.get(key)
        if got is None:
            by_action: Dict[int, list] = {}
            for e in self.agents[agent].edges:
                if e.source == loc:
                    by_action.setdefault(e.action, []).append(e)
            got = {a: tuple(by_action[a]) for a in sorted(by_action)}
            self._cache[key] = got
        return got

    def available_actions(self, agent: int, loc: int) -> Tuple[int, ...]:
        return tuple(self.outgoing(agent, loc))

    def max_constants(self) -> List[int]:
        """Largest constant compared against each clock in guards or invariants."""
        m = [0] * self.nclocks
        for g in self.agents:
            atoms = [a for loc in g.locations for a in loc.invariant]
            atoms += [a for e in g.edges for a in e.guard]
            for a in atoms:
                if 0 <= a.clock < len(m):
                    m[a.clock] = max(m[a.clock], a.bound)
        return m


def owners_of(n: Network, action: int) -> FrozenSet[int]:
    if not 0 <= action < len(n.action_names):
        raise KeyError(f"unknown action id {action}")
    return n.action_owners[action]


def _err(kind, msg):
    return Diagnostic("error", kind, msg)


def _check_guard(n: Network, atoms: Sequence[AtomicConstraint], where: str, out: list):
    for a in atoms:
        if not 0 <= a.clock < n.nclocks:
            out.append(_err("unknown-clock", f"{where}: unknown clock id {a.clock}"))
        if a.bound < 0:
            out.append(_err("negative-constant", f"{where}: negative constant {a.bound}"))


def _satisfiable_at_zero(atoms: Sequence[AtomicConstraint]) -> bool:
    return all(a.holds(0) for a in atoms)


def _satisfiable(atoms: Sequence[AtomicConstraint]) -> bool:
    lo: Dict[int, Tuple[float, bool]] = {}
    hi: Dict[int, Tuple[float, bool]] = {}
    for a in atoms:
        if a.relation in (">", ">=", "="):
            cur = lo.get(a.clock, (0, False))
            cand = (a.bound, a.relation == ">")
            if cand > cur:
                lo[a.clock] = cand
        if a.relation in ("<", "<=", "="):
            cur = hi.get(a.clock, (float("inf"), True))
            cand = (a.bound, a.relation == "<")
            if (cand[0], not cand[1]) < (cur[0], not cur[1]):
                hi[a.clock] = cand
    for c, (lv, ls) in lo.items():
        hv, hs = hi.get(c, (float("inf"), True))
        if lv > hv or (lv == hv and (ls or hs)):
            return False
    for c, (hv, hs) in hi.items():
        if hv == 0 and hs:
            return False
    return True


def validate_network(n: Network) -> List[Diagnostic]:
    """Semantic checks; any error-severity diagnostic makes the network unusable."""
    out: List[Diagnostic] = []
    for name, count in Counter(g.name for g in n.agents).items():
        if count > 1:
            out.append(_err("duplicate-agent", f"duplicate agent name {name!r}"))
    for name, count in Counter(n.clock_names).items():
        if count > 1:
            out.append(_err("duplicate-clock", f"duplicate clock name {name!r}"))
    for name, count in Counter(n.action_names).items():
        if count > 1:
            out.append(_err("duplicate-action", f"duplicate action name {name!r}"))

    edge_owners = [set() for _ in n.action_names]
    for idx, g in enumerate(n.agents):
        if g.id != idx:
            out.append(_err("bad-agent-id", f"agent {g.name!r} has id {g.id}, expected {idx}"))
        for name, count in Counter(loc.name for loc in g.locations).items():
            if count > 1:
                out.append(_err("duplicate-location", f"{g.name}: duplicate location {name!r}"))
        for lid, loc in enumerate(g.locations):
            if loc.id != lid:
                out.append(_err("bad-location-id", f"{g.name}.{loc.name}: id {loc.id}, expected {lid}"))
        nloc = len(g.locations)
        for c in g.clocks:
            if not 0 <= c < n.nclocks:
                out.append(_err("unknown-clock", f"{g.name}: owns unknown clock id {c}"))
        if not 0 <= g.initial < nloc:
            out.append(_err("unknown-location", f"{g.name}: initial location id {g.initial} undefined"))
        for loc in g.locations:
            where = f"{g.name}.{loc.name} invariant"
            _check_guard(n, loc.invariant, where, out)
            for a in loc.invariant:
                if a.relation == "<":
                    out.append(_err("strict-invariant",
                                    f"{where}: strict upper bound '<' is not supported in invariants"))
            if not _satisfiable(loc.invariant):
                out.append(Diagnostic("warning", "unsatisfiable-invariant",
                                      f"{where} is unsatisfiable; location unreachable"))
        if 0 <= g.initial < nloc:
            init = g.locations[g.initial]
            if not _satisfiable_at_zero(init.invariant):
                out.append(_err("initial-invariant",
                                f"{g.name}.{init.name}: initial invariant unsatisfiable at clock values 0"))
        for e in g.edges:
            where = f"{g.name} edge"
            if not (0 <= e.source < nloc and 0 <= e.target < nloc):
                out.append(_err("unknown-location", f"{where}: dangling location id"))
            if not 0 <= e.action < len(n.action_names):
                out.append(_err("unknown-action", f"{where}: unknown action id {e.action}"))
            else:
                edge_owners[e.action].add(g.id)
            _check_guard(n, e.guard, where, out)
            for c in e.resets:
                if not 0 <= c < n.nclocks:
                    out.append(_err("unknown-clock", f"{where}: resets unknown clock id {c}"))
                elif c not in g.clocks:
                    out.append(_err("foreign-clock", f"{where}: resets clock {n.clock_names[c]!r} "
                                                     f"it does not declare"))
    for a, name in enumerate(n.action_names):
        declared = n.action_owners[a] if a < len(n.action_owners) else frozenset()
        if frozenset(edge_owners[a]) != declared:
            out.append(_err("inconsistent-owners",
                            f"action {name!r}: declared owners {sorted(declared)} "
                            f"differ from edge owners {sorted(edge_owners[a])}"))
    return out

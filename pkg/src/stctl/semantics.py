"""Symbolic semantics of the agent product.

Zones range over every network clock plus one extra *formula clock* (id
``n.nclocks``) that is never reset and measures time since the start.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .model import AtomicConstraint, Edge, Network
from .zones import (
    EMPTY,
    Bound,
    Dbm,
    extrapolate,
    intersect,
    reset,
    time_elapse,
)

GlobalLocation = Tuple[int, ...]


class SemanticsError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    action: int
    participants: Tuple[Tuple[int, Edge], ...]  # (agent id, edge), sorted by agent

    @property
    def agents(self) -> Tuple[int, ...]:
        return tuple(g for g, _ in self.participants)

    def target(self, loc: GlobalLocation) -> GlobalLocation:
        out = list(loc)
        for g, e in self.participants:
            out[g] = e.target
        return tuple(out)


@dataclass(frozen=True)
class SymbolicCore:
    loc: GlobalLocation
    zone: Dbm


def atom_constraints(a: AtomicConstraint):
    """Raw-index DBM constraints for one atomic clock comparison."""
    i = a.clock + 1
    r, c = a.relation, a.bound
    out = []
    if r in ("<", "<=", "="):
        out.append((i, 0, Bound(c, r == "<")))
    if r in (">", ">=", "="):
        out.append((0, i, Bound(-c, r == ">")))
    return out


class Semantics:
    """Cached symbolic successor machinery for one network.

    ``formula_bound`` is the maximal constant used for the formula clock when
    extrapolating (the largest finite endpoint of the property interval).
    """

    def __init__(self, n: Network, formula_bound: int = 0):
        self.net = n
        self.nclk = n.nclocks + 1
        self.formula_clock = n.nclocks
        self.max_const = list(n.max_constants()) + [formula_bound]
        self._inv: Dict[GlobalLocation, object] = {}
        self._moves: Dict[GlobalLocation, list] = {}
        self._upper_atoms: Dict[GlobalLocation, tuple] = {}
        self._atom_zone: Dict[tuple, object] = {}

    # -- zones of constraint sets --------------------------------------
    def constraint_zone(self, atoms: Sequence[AtomicConstraint]):
        key = tuple(atoms)
        z = self._atom_zone.get(key)
        if z is None:
            cons = [c for a in atoms for c in atom_constraints(a)]
            z = Dbm.from_constraints(self.nclk, cons)
            self._atom_zone[key] = z
        return z

    def invariant_atoms(self, loc: GlobalLocation) -> Tuple[AtomicConstraint, ...]:
        return tuple(a for g, l in zip(self.net.agents, loc) for a in g.locations[l].invariant)

    def invariant(self, loc: GlobalLocation):
        z = self._inv.get(loc)
        if z is None:
            z = self.constraint_zone(self.invariant_atoms(loc))
            self._inv[loc] = z
        return z

    def upper_atoms(self, loc: GlobalLocation):
        got = self._upper_atoms.get(loc)
        if got is None:
            got = tuple(a for a in self.invariant_atoms(loc) if a.is_upper)
            self._upper_atoms[loc] = got
        return got

    # -- moves ------------------------------------------------------------
    def candidate_moves(self, loc: GlobalLocation) -> list:
        """All syntactic moves at ``loc`` with their cached zone data.

        Each entry is ``(move, guard_zone, reset_clocks, target, takeable)``
        where ``takeable`` is the set of valuations from which the move can
        fire (guard holds and the target invariant holds after the reset).
        """
        got = self._moves.get(loc)
        if got is not None:
            return got
        n = self.net
        got = []
        for a, owners in enumerate(n.action_owners):
            if not owners:
                continue
            choices = []
            for g in sorted(owners):
                edges = n.outgoing(g, loc[g]).get(a)
                if not edges:
                    break
                choices.append([(g, e) for e in edges])
            else:
                for combo in itertools.product(*choices):
                    m = Move(a, tuple(combo))
                    got.append(self._compile_move(loc, m))
        self._moves[loc] = got
        return got

    def _compile_move(self, loc, m: Move):
        atoms = [x for _, e in m.participants for x in e.guard]
        guard = self.constraint_zone(atoms)
        resets = frozenset(c for _, e in m.participants for c in e.resets)
        target = m.target(loc)
        pre_inv = []
        blocked = False
        for a in self.invariant_atoms(target):
            if a.clock in resets:
                if not a.holds(0):
                    blocked = True
            else:
                pre_inv.append(a)
        takeable = EMPTY if blocked else intersect(guard, self.constraint_zone(pre_inv))
        return m, guard, tuple(sorted(resets)), target, takeable

    def landing(self, zone, entry) -> object:
        """Valuations right after firing ``entry``'s move from ``zone`` (no delay)."""
        _, guard, resets, target, takeable = entry
        if takeable.is_empty:
            return EMPTY
        z = intersect(zone, guard)
        if z.is_empty:
            return EMPTY
        z = reset(z, resets)
        return intersect(z, self.invariant(target))

    def delay_closure(self, zone, loc: GlobalLocation):
        return intersect(time_elapse(zone), self.invariant(loc))

    def extrapolate(self, zone):
        return extrapolate(zone, self.max_const)


def _semantics(n: Network, formula_bound: int = 0) -> Semantics:
    key = ("semantics", formula_bound)
    sem = n._cache.get(key)
    if sem is None:
        sem = Semantics(n, formula_bound)
        n._cache[key] = sem
    return sem


def initial_core(n: Network) -> SymbolicCore:
    sem = _semantics(n)
    loc = n.initial_locations()
    z = intersect(time_elapse(Dbm.zero(sem.nclk)), sem.invariant(loc))
    if z.is_empty:
        raise SemanticsError("initial zone is empty: the initial invariant excludes every delay")
    return SymbolicCore(loc, z)


def enabled_moves(n: Network, c: SymbolicCore) -> List[Move]:
    sem = _semantics(n)
    out = []
    for entry in sem.candidate_moves(c.loc):
        if not sem.landing(c.zone, entry).is_empty:
            out.append(entry[0])
    return out


def apply_move(n: Network, c: SymbolicCore, m: Move, max_const: Optional[Sequence[int]] = None
               ) -> SymbolicCore:
    sem = _semantics(n)
    entry = next((e for e in sem.candidate_moves(c.loc) if e[0] == m), None)
    if entry is None:
        raise SemanticsError(f"move {m} is not available at {c.loc}")
    z = sem.landing(c.zone, entry)
    if z.is_empty:
        raise SemanticsError(f"move {m} is disabled in this zone")
    z = sem.delay_closure(z, entry[3])
    mc = sem.max_const if max_const is None else list(max_const)
    z = extrapolate(z, mc)
    return SymbolicCore(entry[3], z)


def reachable_cores(n: Network, max_const: Optional[Sequence[int]] = None) -> List[SymbolicCore]:
    """Forward zone graph with exact (location, zone) deduplication."""
    sem = _semantics(n)
    root = initial_core(n)
    mc = sem.max_const if max_const is None else list(max_const)
    root = SymbolicCore(root.loc, extrapolate(root.zone, mc))
    seen = {(root.loc, root.zone.key())}
    out = [root]
    queue = deque([root])
    while queue:
        c = queue.popleft()
        for m in enabled_moves(n, c):
            s = apply_move(n, c, m, mc)
            k = (s.loc, s.zone.key())
            if k not in seen:
                seen.add(k)
                out.append(s)
                queue.append(s)
    return out


def reachable_locations(n: Network) -> set:
    return {c.loc for c in reachable_cores(n)}


"""Memoryless imperfect-information strategies.

A strategy maps a coalition agent's *location* (never clock values, never
history) to the action it commits to there.  Values are immutable; every
update returns a new strategy.
"""
from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple

from .model import Network

Binding = Tuple[Tuple[int, int], int]  # ((agent, location), action)


class StrategyError(ValueError):
    pass


class Strategy:
    __slots__ = ("coalition", "_choices", "_hash")

    def __init__(self, coalition: Iterable[int], choices: Optional[Dict[Tuple[int, int], int]] = None):
        self.coalition: FrozenSet[int] = frozenset(coalition)
        self._choices: Dict[Tuple[int, int], int] = dict(choices or {})
        for (g, _), _a in self._choices.items():
            if g not in self.coalition:
                raise StrategyError(f"binding for agent {g} outside the coalition")
        self._hash = None

    def _check(self, agent: int):
        if agent not in self.coalition:
            raise StrategyError(f"agent {agent} is not in the coalition; it has no choices")

    def choice_of(self, agent: int, loc: int) -> Optional[int]:
        self._check(agent)
        return self._choices.get((agent, loc))

    def is_compatible(self, agent: int, loc: int, action: int) -> bool:
        self._check(agent)
        got = self._choices.get((agent, loc))
        return got is None or got == action

    def extend(self, agent: int, loc: int, action: int) -> "Strategy":
        if not self.is_compatible(agent, loc, action):
            raise StrategyError(
                f"agent {agent} already commits to action {self._choices[(agent, loc)]} at location {loc}")
        if (agent, loc) in self._choices:
            return self
        new = dict(self._choices)
        new[(agent, loc)] = action
        return Strategy(self.coalition, new)

    def bindings(self) -> Iterator[Binding]:
        return iter(sorted(self._choices.items()))

    def domain(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(self._choices)

    def restrict(self, keys: Iterable[Tuple[int, int]]) -> "Strategy":
        keep = set(keys)
        return Strategy(self.coalition, {k: v for k, v in self._choices.items() if k in keep})

    def __len__(self):
        return len(self._choices)

    def __eq__(self, other):
        return (isinstance(other, Strategy) and self.coalition == other.coalition
                and self._choices == other._choices)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.coalition, frozenset(self._choices.items())))
        return self._hash

    def __repr__(self):
        return f"Strategy({dict(sorted(self._choices.items()))})"


def choice_of(s: Strategy, agent: int, loc: int) -> Optional[int]:
    return s.choice_of(agent, loc)


def is_compatible(s: Strategy, agent: int, loc: int, action: int) -> bool:
    return s.is_compatible(agent, loc, action)


def extend(s: Strategy, agent: int, loc: int, action: int) -> Strategy:
    return s.extend(agent, loc, action)


def canonical_form(s: Strategy, reachable_locals: Iterable[Tuple[int, int]]) -> Strategy:
    """Drop bindings on local states the outcome never visits."""
    return s.restrict(reachable_locals)


def binding_rows(s: Strategy, n: Network):
    """``(agent, location, action)`` name triples sorted by agent then location name."""
    rows = [(n.agents[g].name, n.agents[g].locations[l].name, n.action_names[a])
            for (g, l), a in s.bindings()]
    return sorted(rows)


def render_strategy(s: Strategy, n: Network) -> str:
    return "\n".join(f"{g}.{l} -> {a}" for g, l, a in binding_rows(s, n))

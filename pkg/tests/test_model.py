import pytest

from stctl.language import parse_model
from stctl.model import (
    Agent,
    AtomicConstraint,
    Edge,
    Location,
    Network,
    owners_of,
    validate_network,
)
from stctl.voting import generate_voting


def one_agent(locations, edges=(), clocks=("x",), actions=()):
    g = Agent(0, "A", tuple(range(len(clocks))), list(locations), list(edges), 0)
    return Network([g], list(clocks), list(actions))


def kinds(diags):
    return [d.kind for d in diags if d.is_error]


def test_minimal_network_is_valid():
    n = one_agent([Location(0, "l0")])
    assert validate_network(n) == []


def test_unknown_guard_clock_is_reported():
    n = one_agent([Location(0, "l0")], [Edge(0, 0, (AtomicConstraint(3, ">=", 1),), frozenset(), 0)],
                  actions=["a"])
    diags = validate_network(n)
    assert kinds(diags) == ["unknown-clock"]
    assert "3" in diags[0].message


def test_unknown_clock_name_in_text_is_named():
    text = "agent A { clock x; init l0; loc l0 { } edge l0 -> l0 on a when z >= 1; }"
    with pytest.raises(Exception) as exc:
        parse_model(text)
    (d,) = exc.value.diagnostics
    assert d.kind == "unknown-clock" and "'z'" in d.message


def test_unsatisfiable_initial_invariant():
    inv = (AtomicConstraint(0, "<=", 0), AtomicConstraint(0, ">=", 1))
    diags = validate_network(one_agent([Location(0, "l0", inv)]))
    assert "initial-invariant" in kinds(diags)
    assert any("initial invariant unsatisfiable" in d.message for d in diags)


def test_strict_invariants_are_rejected():
    diags = validate_network(one_agent([Location(0, "l0", (AtomicConstraint(0, "<", 2),))]))
    assert "strict-invariant" in kinds(diags)


def test_unsatisfiable_non_initial_invariant_is_a_warning():
    inv = (AtomicConstraint(0, "<=", 1), AtomicConstraint(0, ">=", 2))
    diags = validate_network(one_agent([Location(0, "l0"), Location(1, "l1", inv)]))
    assert kinds(diags) == []
    assert [d.kind for d in diags] == ["unsatisfiable-invariant"]


def test_dangling_and_foreign_references():
    x = Agent(0, "A", (0,), [Location(0, "l0")], [Edge(0, 0, (), frozenset({1}), 4)], 0)
    y = Agent(1, "B", (1,), [Location(0, "m0")], [], 0)
    diags = validate_network(Network([x, y], ["x", "y"], ["a"]))
    assert sorted(kinds(diags)) == ["foreign-clock", "unknown-location"]


def test_declared_owners_must_match_edges():
    n = one_agent([Location(0, "l0")], [Edge(0, 0, (), frozenset(), 0)], actions=["a"])
    n.action_owners = [frozenset({0, 5})]
    assert "inconsistent-owners" in kinds(validate_network(n))


def test_owners_private_and_shared():
    text = """
    agent P { init l0; loc l0 { } edge l0 -> l0 on think; }
    agent Q { init l0; loc l0 { } edge l0 -> l0 on handshake; }
    agent R { init l0; loc l0 { } edge l0 -> l0 on handshake; }
    """
    n = parse_model(text)
    assert owners_of(n, n.action_id("think")) == {0}
    assert owners_of(n, n.action_id("handshake")) == {1, 2}
    with pytest.raises(KeyError):
        owners_of(n, 99)


def test_voting_vote_action_is_private():
    n = parse_model(generate_voting(2, 2, [1])[0])
    v1 = n.agent_named("V1").id
    assert owners_of(n, n.action_id("vote1_1")) == {v1}
    assert owners_of(n, n.action_id("start_2")) == {n.agent_named("V2").id, n.agent_named("EC").id}


def test_outgoing_groups_by_action():
    n = parse_model("agent A { init l0; loc l0 { } loc l1 { } "
                    "edge l0 -> l1 on b; edge l0 -> l0 on a; edge l0 -> l1 on a; }")
    out = n.outgoing(0, 0)
    # action ids follow first use, and groups are ordered by id
    assert list(out) == [n.action_id("b"), n.action_id("a")] == [0, 1]
    assert len(out[n.action_id("a")]) == 2
    assert n.available_actions(0, 1) == ()


def test_atomic_constraint_holds():
    assert AtomicConstraint(0, "<=", 2).holds(2)
    assert not AtomicConstraint(0, "<", 2).holds(2)
    assert AtomicConstraint(0, "=", 0).is_upper and not AtomicConstraint(0, ">", 0).is_upper
    with pytest.raises(ValueError):
        AtomicConstraint(0, "!=", 1)


def test_max_constants_and_propositions():
    n = parse_model("agent A { clock x, y; init l0; loc l0 { invariant x <= 4; labels p; } "
                    "loc l1 { labels p, q; } edge l0 -> l1 on a when y > 6; }")
    assert n.max_constants() == [4, 6]
    assert n.propositions == {"p": frozenset({(0, 0), (0, 1)}), "q": frozenset({(0, 1)})}

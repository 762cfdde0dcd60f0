"""Generator for the scalable voting benchmark family."""
from __future__ import annotations

from typing import Iterable, Tuple

GUARD_BOUND = 8


def _check(v: int, c: int, coalition) -> list:
    if v < 1 or c < 1:
        raise ValueError("voters and candidates must be at least 1")
    coal = sorted(set(coalition))
    if not coal:
        raise ValueError("the coalition must not be empty")
    bad = [k for k in coal if not 1 <= k <= v]
    if bad:
        raise ValueError(f"coalition members {bad} are not voters 1..{v}")
    return coal


def generate_voting(v: int, c: int, coalition: Iterable[int]) -> Tuple[str, str]:
    """Model and property text for ``v`` voters, ``c`` candidates and a voter coalition.

    Voter ``V{i}`` starts voting through a ``start_{i}`` handshake with the
    election agent ``EC`` and then picks candidate ``j`` with ``vote{j}_{i}``
    within 8 time units.  The property keeps the proposition ``voted_1_1``
    whatever the coalition size.
    """
    coal = _check(v, c, coalition)
    out = []
    for i in range(1, v + 1):
        out.append(f"agent V{i} {{")
        out.append(f"  clock x_{i};")
        out.append("  init idle;")
        out.append("  loc idle { }")
        out.append("  loc deciding { }")
        for j in range(1, c + 1):
            out.append(f"  loc voted_{j} {{ labels voted_{i}_{j}; }}")
        out.append(f"  edge idle -> deciding on start_{i} reset {{ x_{i} }};")
        for j in range(1, c + 1):
            out.append(f"  edge deciding -> voted_{j} on vote{j}_{i} when x_{i} <= {GUARD_BOUND};")
        out.append("}")
    out.append("agent EC {")
    out.append("  init open;")
    out.append("  loc open { }")
    for i in range(1, v + 1):
        out.append(f"  edge open -> open on start_{i};")
    out.append("}")
    model = "\n".join(out) + "\n"
    members = ", ".join(f"V{k}" for k in coal)
    prop = f"#synth <<{members}>> E F[0;{GUARD_BOUND}] voted_1_1\n"
    return model, prop

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stctl.zones import (
    EMPTY,
    Bound,
    Dbm,
    Interval,
    ZoneError,
    canonicalize,
    constrain,
    covered_by,
    extrapolate,
    includes,
    intersect,
    render,
    reset,
    split_on_interval,
    subtract,
    time_elapse,
)
from stctl.zones import _kernels as K

from zone_oracle import feasible, grid, random_dbm, random_matrix, satisfied

X, Y = 1, 2  # raw matrix indices of clocks 0 and 1


def le(v):
    return Bound(v, False)


def lt(v):
    return Bound(v, True)


def zone(k, *cons):
    return Dbm.from_constraints(k, cons)


def upper(i, b):
    return (i, 0, b)


def lower(i, v, strict=False):
    return (0, i, Bound(-v, strict))


# -- bounds and intervals ----------------------------------------------------

def test_bound_order_strict_is_tighter():
    assert lt(3) < le(3)
    assert le(2) < lt(3)
    assert le(7) < Bound.inf()


def test_bound_encoding_roundtrip():
    for b in (le(0), lt(0), le(-4), lt(5), Bound.inf()):
        assert Bound.decode(b.encode()) == b


def test_bound_addition_strict_if_either_is():
    assert le(1) + le(2) == le(3)
    assert le(1) + lt(2) == lt(3)
    assert (le(1) + Bound.inf()).value == math.inf


def test_infinite_bound_must_be_strict():
    with pytest.raises(ZoneError):
        Bound(math.inf, False)


def test_interval_validation_and_text():
    assert str(Interval(0, 8)) == "[0;8)"
    assert str(Interval(0, 8, upper_strict=False)) == "[0;8]"
    assert str(Interval(1)) == "[1;inf)"
    with pytest.raises(ZoneError):
        Interval(3, 2)
    with pytest.raises(ZoneError):
        Interval(2, 2, upper_strict=True)
    assert Interval(0, 8, upper_strict=False).max_constant == 8
    assert Interval(3).max_constant == 3


# -- operation examples --------------------------------------------------------

def test_canonicalize_adds_implied_upper_bound():
    z = zone(2, upper(X, le(3)), (Y, X, le(2)))
    assert z.bound(Y, 0) == le(5)


def test_contradictory_bounds_are_empty():
    assert zone(1, upper(X, le(1)), lower(X, 2)) is EMPTY


def test_canonicalize_is_identity_on_canonical():
    z = zone(2, upper(X, le(3)), (Y, X, le(2)))
    assert np.array_equal(canonicalize(Dbm(z.m)).m, z.m)


def test_intersect_examples():
    a, b = zone(1, upper(X, le(2))), zone(1, upper(X, le(3)))
    assert intersect(a, b) == a
    assert intersect(zone(1, lower(X, 2)), zone(1, upper(X, le(1)))) is EMPTY
    assert intersect(zone(2, (X, Y, le(1))), zone(2, (Y, X, le(-2)))) is EMPTY


def test_intersect_dimension_mismatch():
    with pytest.raises(ZoneError):
        intersect(Dbm.zero(1), Dbm.zero(2))


def test_time_elapse_examples():
    z = time_elapse(Dbm.zero(2))
    assert render(z, ["x", "y"]) == "0 <= x & 0 <= y & x - y = 0"
    w = zone(2, lower(X, 1), upper(X, le(2)), (X, Y, le(0)), (Y, X, le(0)))
    assert render(time_elapse(w), ["x", "y"]) == "1 <= x & 1 <= y & x - y = 0"
    assert time_elapse(EMPTY) is EMPTY


def test_reset_examples():
    diag = time_elapse(Dbm.zero(2))
    assert render(reset(diag, [0]), ["x", "y"]) == "x = 0 & 0 <= y"
    assert reset(diag, []) == diag
    open_x = zone(1, lower(X, 1, strict=True), upper(X, lt(3)))
    assert reset(open_x, [0]) == Dbm.zero(1)


def test_includes_examples():
    a, b = zone(1, upper(X, le(3))), zone(1, upper(X, le(2)))
    assert includes(a, b)
    assert not includes(b, a)
    assert includes(a, a)
    assert includes(a, EMPTY) and not includes(EMPTY, a)


def test_extrapolate_examples():
    assert extrapolate(zone(1, upper(X, le(7))), [2]) == Dbm.universe(1)
    assert extrapolate(zone(1, upper(X, le(2))), [2]) == zone(1, upper(X, le(2)))
    assert extrapolate(zone(1, lower(X, 9)), [2]) == zone(1, lower(X, 2, strict=True))


def test_split_on_interval_examples():
    z = zone(1, upper(X, le(10)))
    inside, before, after = split_on_interval(z, 0, Interval(0, 8, upper_strict=False))
    assert before is None
    assert inside == zone(1, upper(X, le(8)))
    assert after == zone(1, lower(X, 8, strict=True), upper(X, le(10)))

    small = zone(1, upper(X, le(3)))
    assert split_on_interval(small, 0, Interval(0, 8, upper_strict=False)) == (small, None, None)

    late = zone(1, lower(X, 9))
    assert split_on_interval(late, 0, Interval(0, 8, upper_strict=False)) == (None, None, late)


def test_split_left_open_interval_puts_boundary_before():
    z = Dbm.universe(1)
    inside, before, after = split_on_interval(z, 0, Interval(2, 4, lower_strict=True))
    assert before == zone(1, upper(X, le(2)))
    assert inside == zone(1, lower(X, 2, strict=True), upper(X, lt(4)))
    assert after == zone(1, lower(X, 4))


def test_render_golden():
    z = zone(2, upper(X, le(3)), (Y, X, le(2)))
    assert render(z, ["x", "y"]) == "0 <= x & x <= 3 & 0 <= y & y <= 5 & y - x <= 2"
    assert render(zone(2, (X, Y, lt(2))), ["x", "y"]) == "0 <= x & 0 <= y & x - y < 2"
    assert render(EMPTY) == "false"
    assert render(Dbm.universe(1)) == "0 <= x0"


def test_subtract_is_disjoint_cover():
    z = zone(2, upper(X, le(4)), upper(Y, le(4)))
    w = zone(2, lower(X, 1), upper(X, le(2)), (X, Y, lt(0)))
    pieces = subtract(z, w)
    for a in range(len(pieces)):
        assert intersect(pieces[a], w) is EMPTY
        for b in range(a + 1, len(pieces)):
            assert intersect(pieces[a], pieces[b]) is EMPTY
    assert covered_by(z, pieces + [w])
    assert not covered_by(z, pieces)


def test_covered_by_needs_the_union():
    z = zone(1, upper(X, le(4)))
    left, right = zone(1, upper(X, le(2))), zone(1, lower(X, 2), upper(X, le(5)))
    assert covered_by(z, [left, right])
    assert not covered_by(z, [left])
    assert not covered_by(z, [zone(1, upper(X, lt(2))), zone(1, lower(X, 2, strict=True))])


def test_operations_do_not_mutate_inputs():
    z = zone(2, upper(X, le(3)))
    before = z.m.copy()
    time_elapse(z), reset(z, [0]), extrapolate(z, [1, 1]), constrain(z, Y, 0, le(1))
    assert np.array_equal(z.m, before)
    with pytest.raises(ValueError):
        z.m[0, 0] = 7


def test_half_integer_grid_misses_strict_two_clock_zones():
    # 0 < x < y < 1: non-empty, yet no half-integer point witnesses it
    z = zone(2, lower(X, 0, strict=True), (X, Y, lt(0)), upper(Y, lt(1)))
    assert z is not EMPTY
    half = grid(2, step=0.5, top=6.0)
    assert not feasible(z.m, half)
    assert feasible(z.m, grid(2))


# -- kernels -------------------------------------------------------------------

@pytest.mark.skipif(not K.NUMBA_AVAILABLE, reason="numba not installed")
def test_numba_and_numpy_kernels_agree():
    rng = np.random.default_rng(7)
    for _ in range(300):
        k = int(rng.integers(1, 4))
        m = random_matrix(rng, k)
        a, b = m.copy(), m.copy()
        assert K.close_np(a) == K.close_nb(b)
        if not K.close_np(m.copy()):
            continue
        assert np.array_equal(a, b)
        for f_np, f_nb, args in (
            (K.up_np, K.up_nb, ()),
            (K.reset_np, K.reset_nb, (np.array([1], dtype=np.int64),)),
            (K.extrapolate_np, K.extrapolate_nb, (np.array([0] + [2] * k, dtype=np.int64),)),
        ):
            p, q = a.copy(), a.copy()
            f_np(p, *args)
            f_nb(q, *args)
            assert np.array_equal(p, q)
        assert K.includes_np(a, b) == K.includes_nb(a, b)


# -- randomized algebra (1000 DBMs) -------------------------------------------

N_RANDOM = 1000
GRIDS = {k: grid(k) for k in (1, 2, 3)}


def random_suite(seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(N_RANDOM):
        k = int(rng.integers(1, 4))
        yield rng, k, random_dbm(rng, k)


def check_random_dbm(rng, k, raw):
    """Every algebraic law on one random DBM; returns a list of failures."""
    bad = []
    z = canonicalize(raw)
    pts = GRIDS[k]
    if (z is EMPTY) == feasible(raw.m, pts):
        bad.append("emptiness disagrees with grid oracle")
    if z is EMPTY:
        return bad
    if not np.array_equal(canonicalize(Dbm(z.m)).m, z.m):
        bad.append("canonicalize not idempotent")
    if not np.array_equal(satisfied(z.m, pts), satisfied(raw.m, pts)):
        bad.append("canonicalize changed the solution set")

    up = time_elapse(z)
    if time_elapse(up) != up:
        bad.append("time_elapse not idempotent")
    if not includes(up, z):
        bad.append("time_elapse not extensive")

    # includes: reflexive, agrees with the grid, antisymmetric, transitive
    if not includes(z, z):
        bad.append("includes not reflexive")
    w = random_dbm(rng, k)
    w = canonicalize(w)
    if w is not EMPTY:
        sz, sw = satisfied(z.m, pts), satisfied(w.m, pts)
        if includes(z, w) != bool(np.all(sz[sw])):
            bad.append("includes disagrees with grid oracle")
        if includes(z, w) and includes(w, z) and z != w:
            bad.append("includes not antisymmetric")
        mid = intersect(z, w)
        low = intersect(mid, zone(k, upper(1, le(int(rng.integers(0, 6))))))
        if mid is not EMPTY and not (includes(z, mid) and includes(mid, low) and includes(z, low)):
            bad.append("includes not transitive")

    lo = int(rng.integers(0, 5))
    hi = None if rng.random() < 0.3 else lo + int(rng.integers(0, 4))
    if hi == lo:
        iv = Interval(lo, hi, upper_strict=False)
    else:
        iv = Interval(lo, hi, lower_strict=bool(rng.random() < 0.3),
                      upper_strict=bool(rng.random() < 0.5) if hi is not None else True)
    f = int(rng.integers(0, k))
    parts = [p for p in split_on_interval(z, f, iv) if p is not None]
    for a in range(len(parts)):
        if not includes(z, parts[a]):
            bad.append("split part escapes the zone")
        for b in range(a + 1, len(parts)):
            if intersect(parts[a], parts[b]) is not EMPTY:
                bad.append("split parts overlap")
    if not covered_by(z, parts):
        bad.append("split parts do not cover the zone")
    return bad


def test_random_dbm_algebra():
    failures = []
    for n, (rng, k, raw) in enumerate(random_suite()):
        failures += [(n, msg) for msg in check_random_dbm(rng, k, raw)]
    assert failures == []


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_extrapolate_only_widens(k, seed):
    rng = np.random.default_rng(seed)
    z = canonicalize(random_dbm(rng, k))
    if z is EMPTY:
        return
    mc = [int(v) for v in rng.integers(0, 6, size=k)]
    e = extrapolate(z, mc)
    assert includes(e, z)
    assert extrapolate(e, mc) == e

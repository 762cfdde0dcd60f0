"""Hot DBM kernels.

Bounds are packed into int64 as ``2 * c + (1 if non-strict else 0)`` so that
the natural integer order coincides with bound tightness: ``(c, <)`` sorts
just below ``(c, <=)``.  Infinity is the single value :data:`INF`.

Two implementations live side by side.  The numba one is the default; set
``STCTL_NUMBA=0`` in the environment to force the pure-numpy path (also used
automatically when numba cannot be imported).
"""
import os

import numpy as np

INF = np.int64(1 << 60)
LE_ZERO = np.int64(1)
LT_ZERO = np.int64(0)


def _numba_requested():
    flag = os.environ.get("STCTL_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False

USING_NUMBA = NUMBA_AVAILABLE and _numba_requested()


# ---------------------------------------------------------------------------
# pure numpy path
# ---------------------------------------------------------------------------

def _add_np(a, b):
    s = ((a >> 1) + (b >> 1)) * 2 + (a & b & 1)
    return np.where((a == INF) | (b == INF), INF, s)


def close_np(m):
    """Floyd-Warshall closure in place. Returns False when the zone is empty."""
    n = m.shape[0]
    for k in range(n):
        np.minimum(m, _add_np(m[:, k:k + 1], m[k:k + 1, :]), out=m)
        if np.any(np.diagonal(m) < LE_ZERO):
            return False
    return True


def up_np(m):
    m[1:, 0] = INF


def reset_np(m, clocks):
    for x in clocks:
        m[x, :] = m[0, :]
        m[:, x] = m[:, 0]
        m[x, x] = LE_ZERO


def extrapolate_np(m, maxc):
    # maxc[0] must be 0 (the reference clock).
    n = m.shape[0]
    consts = m >> 1
    too_big = (m != INF) & (consts > maxc.reshape(n, 1))
    too_small = (m != INF) & (consts < -maxc.reshape(1, n))
    out = np.where(too_big, INF, m)
    out = np.where(too_small & ~too_big, (-maxc.reshape(1, n)) * 2, out)
    np.fill_diagonal(out, LE_ZERO)
    m[:, :] = out


def includes_np(a, b):
    return bool(np.all(a >= b))


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _add_nb(a, b):
        if a == INF or b == INF:
            return INF
        return ((a >> 1) + (b >> 1)) * 2 + (a & b & 1)

    @njit(cache=True)
    def close_nb(m):
        n = m.shape[0]
        for k in range(n):
            for i in range(n):
                mik = m[i, k]
                if mik == INF:
                    continue
                for j in range(n):
                    mkj = m[k, j]
                    if mkj == INF:
                        continue
                    s = _add_nb(mik, mkj)
                    if s < m[i, j]:
                        m[i, j] = s
            for i in range(n):
                if m[i, i] < LE_ZERO:
                    return False
        return True

    @njit(cache=True)
    def up_nb(m):
        for i in range(1, m.shape[0]):
            m[i, 0] = INF

    @njit(cache=True)
    def reset_nb(m, clocks):
        n = m.shape[0]
        for x in clocks:
            for j in range(n):
                m[x, j] = m[0, j]
                m[j, x] = m[j, 0]
            m[x, x] = LE_ZERO

    @njit(cache=True)
    def extrapolate_nb(m, maxc):
        n = m.shape[0]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                v = m[i, j]
                if v == INF:
                    continue
                c = v >> 1
                if c > maxc[i]:
                    m[i, j] = INF
                elif c < -maxc[j]:
                    m[i, j] = -maxc[j] * 2

    @njit(cache=True)
    def includes_nb(a, b):
        n = a.shape[0]
        for i in range(n):
            for j in range(n):
                if a[i, j] < b[i, j]:
                    return False
        return True


if USING_NUMBA:
    close = close_nb
    up = up_nb
    reset = reset_nb
    extrapolate = extrapolate_nb
    includes = includes_nb
else:
    close = close_np
    up = up_np
    reset = reset_np
    extrapolate = extrapolate_np
    includes = includes_np


def backend():
    return "numba" if USING_NUMBA else "numpy"

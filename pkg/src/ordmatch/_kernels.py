"""Compiled batch kernels behind every algorithm in :mod:`ordmatch.algorithms`.

Conventions shared by all kernels:

* ``out[t, x]`` receives the y matched to x in trial t (-1 = unmatched).
* ``states[t]`` is the [key, counter] pair of trial t's random stream.
* preference arrays hold only the revealed prefix of each list; a query
  past the end returns ``BUDGET`` instead of reading further.
* audit arrays are private scratch copies; the caller merges them.
"""

import numba
import numpy as np

from .rng import next_uniform, randbelow

OK = 0
BUDGET = 1
PREFIX = 2
BOOKKEEPING = 3

_jit = numba.njit(cache=True, nogil=True)


@_jit
def _shuffle(a, m, st):
    for i in range(m - 1, 0, -1):
        j = randbelow(st, i + 1)
        tmp = a[i]
        a[i] = a[j]
        a[j] = tmp


@_jit
def _top(v, prefs, ptr, taken_other, audit):
    """Most preferred remaining partner of v, or -1 past the revealed depth."""
    r = ptr[v]
    depth = prefs.shape[1]
    while r < depth and taken_other[prefs[v, r]]:
        r += 1
    if r >= depth:
        return -1
    ptr[v] = r
    if r > audit[v]:
        audit[v] = r
    return prefs[v, r]


@_jit
def _complete(row, taken_y, xs, ys, st):
    """Uniform random perfect matching of the still-free agents:
    free ys are shuffled and assigned to free xs in index order."""
    n = row.size
    nx = 0
    for x in range(n):
        if row[x] < 0:
            xs[nx] = x
            nx += 1
    ny = 0
    for y in range(n):
        if not taken_y[y]:
            ys[ny] = y
            ny += 1
    if nx != ny:
        return BOOKKEEPING
    _shuffle(ys, ny, st)
    for i in range(nx):
        row[xs[i]] = ys[i]
        taken_y[ys[i]] = True
    return OK


@_jit
def _cross(xs, nx, ys, ny, row, st, rest_x, rest_y, cnt):
    """Random injective pairing between xs[:nx] and ys[:ny]; the surplus of
    the larger side (a uniform subset) is appended to rest_x / rest_y."""
    if nx <= ny:
        _shuffle(ys, ny, st)
        for i in range(nx):
            row[xs[i]] = ys[i]
        for i in range(nx, ny):
            rest_y[cnt[1]] = ys[i]
            cnt[1] += 1
    else:
        _shuffle(xs, nx, st)
        for i in range(ny):
            row[xs[i]] = ys[i]
        for i in range(ny, nx):
            rest_x[cnt[0]] = xs[i]
            cnt[0] += 1


@_jit
def _chain_walk(x, px, py, ptr_x, ptr_y, taken_x, taken_y, audit_x, audit_y, vis_x, vis_y, stamp, res):
    x1 = x
    y1 = _top(x1, px, ptr_x, taken_y, audit_x)
    if y1 < 0:
        return BUDGET
    vis_x[x1] = stamp
    vis_y[y1] = stamp
    moved_y = True
    while True:
        tx = _top(x1, px, ptr_x, taken_y, audit_x)
        ty = _top(y1, py, ptr_y, taken_x, audit_y)
        if tx < 0 or ty < 0:
            return BUDGET
        if tx == y1 and ty == x1:
            break
        if moved_y:
            x1 = ty
            if vis_x[x1] == stamp:
                break
            vis_x[x1] = stamp
            moved_y = False
        else:
            y1 = tx
            if vis_y[y1] == stamp:
                break
            vis_y[y1] = stamp
            moved_y = True
    res[0] = x1
    res[1] = y1
    return OK


@_jit
def chain_walk_once(x, px, py, taken_x, taken_y, audit_x, audit_y, res):
    n = taken_x.size
    ptr_x = np.zeros(n, np.int64)
    ptr_y = np.zeros(n, np.int64)
    vis_x = np.full(n, -1, np.int64)
    vis_y = np.full(n, -1, np.int64)
    return _chain_walk(x, px, py, ptr_x, ptr_y, taken_x, taken_y, audit_x, audit_y, vis_x, vis_y, 0, res)


@_jit
def _greedy_undominated(k, px, py, st, row, taken_x, taken_y, ptr_x, ptr_y, free, pos,
                        audit_x, audit_y, vis_x, vis_y, stamp0, m0x, m0y, res):
    """k rounds of: uniform free x, chain walk, take the undominated edge."""
    n = row.size
    for i in range(n):
        free[i] = i
        pos[i] = i
    cnt = n
    for r in range(k):
        x = free[randbelow(st, cnt)]
        code = _chain_walk(x, px, py, ptr_x, ptr_y, taken_x, taken_y,
                           audit_x, audit_y, vis_x, vis_y, stamp0 + r, res)
        if code != OK:
            return code
        x1 = res[0]
        y1 = res[1]
        j = pos[x1]
        cnt -= 1
        last = free[cnt]
        free[j] = last
        pos[last] = j
        row[x1] = y1
        taken_x[x1] = True
        taken_y[y1] = True
        m0x[r] = x1
        m0y[r] = y1
    return OK


@_jit
def rsd_partial_batch(prefs_x, rounds, states, out, audit_x):
    """RSD for ``rounds`` rounds, then a uniform random completion.
    rounds=0 is the plain random perfect matching."""
    ntr, n = out.shape
    free = np.empty(n, np.int64)
    ptr = np.empty(n, np.int64)
    taken_y = np.empty(n, np.bool_)
    xs = np.empty(n, np.int64)
    ys = np.empty(n, np.int64)
    for t in range(ntr):
        st = states[t]
        row = out[t]
        for i in range(n):
            free[i] = i
            ptr[i] = 0
            taken_y[i] = False
            row[i] = -1
        cnt = n
        for r in range(rounds):
            i = randbelow(st, cnt)
            x = free[i]
            cnt -= 1
            free[i] = free[cnt]
            y = _top(x, prefs_x, ptr, taken_y, audit_x)
            if y < 0:
                return BUDGET
            row[x] = y
            taken_y[y] = True
        code = _complete(row, taken_y, xs, ys, st)
        if code != OK:
            return code
    return OK


@_jit
def two_sided_batch(px, py, k, mode, keep, p_m1, states, out, audit_x, audit_y):
    """Two-sided family.

    mode 0: greedy undominated k-matching only (partial output)
    mode 1: k undominated rounds then random completion (low-alpha algorithm)
    mode 2: greedy/random mixture (alpha >= 1/2 algorithm), keeping ``keep``
            greedy edges in the second branch
    """
    ntr, n = out.shape
    taken_x = np.empty(n, np.bool_)
    taken_y = np.empty(n, np.bool_)
    ptr_x = np.empty(n, np.int64)
    ptr_y = np.empty(n, np.int64)
    free = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    vis_x = np.full(n, -1, np.int64)
    vis_y = np.full(n, -1, np.int64)
    m0x = np.empty(n, np.int64)
    m0y = np.empty(n, np.int64)
    xs = np.empty(n, np.int64)
    ys = np.empty(n, np.int64)
    xa = np.empty(n, np.int64)
    ya = np.empty(n, np.int64)
    rest_x = np.empty(n, np.int64)
    rest_y = np.empty(n, np.int64)
    rest_x2 = np.empty(n, np.int64)
    rest_y2 = np.empty(n, np.int64)
    idx = np.empty(n, np.int64)
    cnt = np.zeros(2, np.int64)
    res = np.empty(2, np.int64)
    stamp = 0
    for t in range(ntr):
        st = states[t]
        row = out[t]
        for i in range(n):
            taken_x[i] = False
            taken_y[i] = False
            ptr_x[i] = 0
            ptr_y[i] = 0
            row[i] = -1
        code = _greedy_undominated(k, px, py, st, row, taken_x, taken_y, ptr_x, ptr_y, free, pos,
                                   audit_x, audit_y, vis_x, vis_y, stamp, m0x, m0y, res)
        stamp += k
        if code != OK:
            return code
        if mode == 0:
            continue
        if mode == 1 or next_uniform(st) < p_m1:
            code = _complete(row, taken_y, xs, ys, st)
            if code != OK:
                return code
            continue
        # second branch: keep a uniform subset of the greedy edges, then
        # cross-match the dropped greedy endpoints with the never-matched ones
        nb = 0
        for x in range(n):
            if not taken_x[x]:
                xs[nb] = x
                nb += 1
        nb_y = 0
        for y in range(n):
            if not taken_y[y]:
                ys[nb_y] = y
                nb_y += 1
        for i in range(k):
            idx[i] = i
        _shuffle(idx, k, st)
        na = 0
        for i in range(keep, k):
            e = idx[i]
            xa[na] = m0x[e]
            ya[na] = m0y[e]
            row[m0x[e]] = -1
            na += 1
        cnt[0] = 0
        cnt[1] = 0
        _cross(xa, na, ys, nb_y, row, st, rest_x, rest_y, cnt)
        _cross(xs, nb, ya, na, row, st, rest_x, rest_y, cnt)
        if cnt[0] != cnt[1]:
            return BOOKKEEPING
        c = cnt[0]
        cnt[0] = 0
        cnt[1] = 0
        _cross(rest_x, c, rest_y, c, row, st, rest_x2, rest_y2, cnt)
    return OK


@_jit
def _greedy_prefix(prefix, k, row, taken_y, audit_pos, m0x, m0y):
    length = prefix.shape[0]
    got = 0
    p = 0
    while got < k:
        if p >= length:
            return PREFIX
        x = prefix[p, 0]
        y = prefix[p, 1]
        if p > audit_pos[0]:
            audit_pos[0] = p
        if row[x] < 0 and not taken_y[y]:
            row[x] = y
            taken_y[y] = True
            m0x[got] = x
            m0y[got] = y
            got += 1
        p += 1
    return OK


@_jit
def total_order_batch(prefix, k, mode, c, p_m1, states, out, audit_pos):
    """Total-order family.

    mode 0: greedy k-matching along the revealed prefix (deterministic)
    mode 2: greedy/random mixture; the second branch random-matches ``c``
            sampled never-matched agents per side and cross-matches the
            rest with the greedy endpoints
    """
    ntr, n = out.shape
    taken_y = np.empty(n, np.bool_)
    m0x = np.empty(n, np.int64)
    m0y = np.empty(n, np.int64)
    xs = np.empty(n, np.int64)
    ys = np.empty(n, np.int64)
    xa = np.empty(n, np.int64)
    ya = np.empty(n, np.int64)
    rest_x = np.empty(n, np.int64)
    rest_y = np.empty(n, np.int64)
    rest_x2 = np.empty(n, np.int64)
    rest_y2 = np.empty(n, np.int64)
    cnt = np.zeros(2, np.int64)
    for t in range(ntr):
        st = states[t]
        row = out[t]
        for i in range(n):
            taken_y[i] = False
            row[i] = -1
        code = _greedy_prefix(prefix, k, row, taken_y, audit_pos, m0x, m0y)
        if code != OK:
            return code
        if mode == 0:
            continue
        if next_uniform(st) < p_m1:
            code = _complete(row, taken_y, xs, ys, st)
            if code != OK:
                return code
            continue
        nb = 0
        for x in range(n):
            if row[x] < 0:
                xs[nb] = x
                nb += 1
        nb_y = 0
        for y in range(n):
            if not taken_y[y]:
                ys[nb_y] = y
                nb_y += 1
        if nb != nb_y or c > nb:
            return BOOKKEEPING
        _shuffle(xs, nb, st)
        _shuffle(ys, nb, st)
        for i in range(c):
            row[xs[i]] = ys[i]
        na = nb - c
        for i in range(na):
            xa[i] = xs[c + i]
            ya[i] = ys[c + i]
        for i in range(k):
            row[m0x[i]] = -1
        cnt[0] = 0
        cnt[1] = 0
        _cross(xa, na, m0y, k, row, st, rest_x, rest_y, cnt)
        _cross(m0x, k, ya, na, row, st, rest_x, rest_y, cnt)
        if cnt[0] != cnt[1]:
            return BOOKKEEPING
        r = cnt[0]
        cnt[0] = 0
        cnt[1] = 0
        _cross(rest_x, r, rest_y, r, row, st, rest_x2, rest_y2, cnt)
    return OK

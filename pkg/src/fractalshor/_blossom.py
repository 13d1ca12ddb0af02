"""Exact maximum-weight perfect matching on a dense graph (blossom algorithm).

Array-based O(n^3) primal-dual implementation.  Node ids are 1-based;
1..n are vertices, ids above n are blossoms (slot 0 is the null sentinel).
Edge weights are doubled on entry so dual variables stay integral.  All
arithmetic is int64; callers quantize float weights.

Every function is numba-jitted when numba is importable; the pure-Python
path runs the same code (slowly), keeping behavior identical.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

INF = np.int64(1) << np.int64(62)
LAST_STATS = None


@njit(cache=True)
def _e_delta(lab, eu, ev, ew, x, y):
    return lab[eu[x, y]] + lab[ev[x, y]] - ew[x, y]


@njit(cache=True)
def _update_slack(lab, eu, ev, ew, slack, slack_val, u, x):
    cand = _e_delta(lab, eu, ev, ew, u, x)
    if slack[x] == 0 or cand < slack_val[x]:
        slack[x] = u
        slack_val[x] = cand


@njit(cache=True)
def _set_slack(lab, eu, ev, ew, slack, slack_val, st, S, n, x):
    slack[x] = 0
    slack_val[x] = INF
    for u in range(1, n + 1):
        if ew[u, x] > 0 and st[u] != x and S[st[u]] == 0:
            _update_slack(lab, eu, ev, ew, slack, slack_val, u, x)


@njit(cache=True)
def _q_push(flower, flower_len, q, qtail, stack, n, x):
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        if y <= n:
            q[qtail] = y
            qtail += 1
        else:
            for i in range(flower_len[y]):
                stack[sp] = flower[y, i]
                sp += 1
    return qtail


@njit(cache=True)
def _set_st(flower, flower_len, st, stack, n, x, b):
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        st[y] = b
        if y > n:
            for i in range(flower_len[y]):
                stack[sp] = flower[y, i]
                sp += 1


@njit(cache=True)
def _get_pr(flower, flower_len, b, xr):
    pr = 0
    for i in range(flower_len[b]):
        if flower[b, i] == xr:
            pr = i
            break
    if pr % 2 == 1:
        # Reverse flower[b][1:] so the entry child sits at an even position.
        lo, hi = 1, flower_len[b] - 1
        while lo < hi:
            tmp = flower[b, lo]
            flower[b, lo] = flower[b, hi]
            flower[b, hi] = tmp
            lo += 1
            hi -= 1
        pr = flower_len[b] - pr
    return pr


@njit(cache=True)
def _set_match(flower, flower_len, flower_from, match, eu, ev, n, u0, v0, tasks):
    tp = 0
    tasks[tp, 0] = u0
    tasks[tp, 1] = v0
    tp += 1
    while tp > 0:
        tp -= 1
        u = tasks[tp, 0]
        v = tasks[tp, 1]
        match[u] = ev[u, v]
        if u > n:
            xr = flower_from[u, eu[u, v]]
            pr = _get_pr(flower, flower_len, u, xr)
            for i in range(pr):
                tasks[tp, 0] = flower[u, i]
                tasks[tp, 1] = flower[u, i ^ 1]
                tp += 1
            tasks[tp, 0] = xr
            tasks[tp, 1] = v
            tp += 1
            # Rotate flower[u] left by pr.
            size = flower_len[u]
            tmp = np.empty(size, dtype=flower.dtype)
            for i in range(size):
                tmp[i] = flower[u, (i + pr) % size]
            for i in range(size):
                flower[u, i] = tmp[i]


@njit(cache=True)
def _augment(flower, flower_len, flower_from, match, st, pa, eu, ev, n, u, v, tasks):
    while True:
        xnv = st[match[u]]
        _set_match(flower, flower_len, flower_from, match, eu, ev, n, u, v, tasks)
        if xnv == 0:
            return
        _set_match(flower, flower_len, flower_from, match, eu, ev, n, xnv, st[pa[xnv]], tasks)
        u = st[pa[xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(st, match, pa, vis, state, u, v):
    state[1] += 1
    t = state[1]
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        tmp = u
        u = v
        v = tmp
    return 0


@njit(cache=True)
def _add_blossom(
    lab, eu, ev, ew, slack, slack_val, st, pa, S, match, vis, flower, flower_len, flower_from,
    q, qtail, stack, state, n, u, lca, v,
):
    b = n + 1
    while b <= state[0] and st[b] != 0:
        b += 1
    if b > state[0]:
        state[0] = b
    lab[b] = 0
    S[b] = 0
    match[b] = match[lca]
    flower_len[b] = 0
    flower[b, 0] = lca
    flower_len[b] = 1
    x = u
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        xm = st[match[x]]
        flower[b, flower_len[b]] = xm
        flower_len[b] += 1
        qtail = _q_push(flower, flower_len, q, qtail, stack, n, xm)
        x = st[pa[xm]]
    lo, hi = 1, flower_len[b] - 1
    while lo < hi:
        tmp = flower[b, lo]
        flower[b, lo] = flower[b, hi]
        flower[b, hi] = tmp
        lo += 1
        hi -= 1
    x = v
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        xm = st[match[x]]
        flower[b, flower_len[b]] = xm
        flower_len[b] += 1
        qtail = _q_push(flower, flower_len, q, qtail, stack, n, xm)
        x = st[pa[xm]]
    _set_st(flower, flower_len, st, stack, n, b, b)
    for x in range(1, state[0] + 1):
        ew[b, x] = 0
        ew[x, b] = 0
    for x in range(1, n + 1):
        flower_from[b, x] = 0
    for i in range(flower_len[b]):
        xs = flower[b, i]
        for x in range(1, state[0] + 1):
            if ew[xs, x] > 0 and st[x] != b:
                if ew[b, x] == 0 or _e_delta(lab, eu, ev, ew, xs, x) < _e_delta(lab, eu, ev, ew, b, x):
                    eu[b, x] = eu[xs, x]
                    ev[b, x] = ev[xs, x]
                    ew[b, x] = ew[xs, x]
                    eu[x, b] = ev[xs, x]
                    ev[x, b] = eu[xs, x]
                    ew[x, b] = ew[xs, x]
        if xs <= n:
            flower_from[b, xs] = xs
        else:
            for x in range(1, n + 1):
                if flower_from[xs, x] != 0:
                    flower_from[b, x] = xs
    state[4] += 1
    pa[b] = pa[lca]
    # Edges from other S-trees recorded on the absorbed slots are dead;
    # rebuild the S-S slack candidate for the new outer node.
    _set_slack(lab, eu, ev, ew, slack, slack_val, st, S, n, b)
    return qtail


@njit(cache=True)
def _expand_blossom(
    lab, eu, ev, ew, slack, slack_val, st, pa, S, match, flower, flower_len, flower_from,
    q, qtail, stack, n, b,
):
    for i in range(flower_len[b]):
        _set_st(flower, flower_len, st, stack, n, flower[b, i], flower[b, i])
    xr = flower_from[b, eu[b, pa[b]]]
    pr = _get_pr(flower, flower_len, b, xr)
    i = 0
    while i < pr:
        xs = flower[b, i]
        xns = flower[b, i + 1]
        pa[xs] = eu[xns, xs]
        S[xs] = 1
        S[xns] = 0
        slack[xs] = 0
        _set_slack(lab, eu, ev, ew, slack, slack_val, st, S, n, xns)
        qtail = _q_push(flower, flower_len, q, qtail, stack, n, xns)
        i += 2
    S[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, flower_len[b]):
        xs = flower[b, i]
        S[xs] = -1
        _set_slack(lab, eu, ev, ew, slack, slack_val, st, S, n, xs)
    st[b] = 0
    flower_len[b] = 0
    return qtail


@njit(cache=True)
def _on_found_edge(
    lab, eu, ev, ew, slack, slack_val, st, pa, S, match, vis, flower, flower_len, flower_from,
    q, qtail, stack, tasks, state, n, e_u, e_v,
):
    # Returns (augmented, new qtail).
    u = st[e_u]
    v = st[e_v]
    if S[v] == -1:
        pa[v] = e_u
        S[v] = 1
        nu = st[match[v]]
        slack[v] = 0
        slack[nu] = 0
        S[nu] = 0
        qtail = _q_push(flower, flower_len, q, qtail, stack, n, nu)
    elif S[v] == 0:
        lca = _get_lca(st, match, pa, vis, state, u, v)
        if lca == 0:
            _augment(flower, flower_len, flower_from, match, st, pa, eu, ev, n, u, v, tasks)
            _augment(flower, flower_len, flower_from, match, st, pa, eu, ev, n, v, u, tasks)
            return True, qtail
        else:
            qtail = _add_blossom(
                lab, eu, ev, ew, slack, slack_val, st, pa, S, match, vis, flower, flower_len,
                flower_from, q, qtail, stack, state, n, u, lca, v,
            )
    return False, qtail


@njit(cache=True)
def _matching_core(n, w2, lab0, adj, adeg):
    """w2: (n+1, n+1) doubled weights, 1-indexed, 0 = missing edge.

    lab0: initial dual per vertex (1-indexed, even values, feasible:
    lab0[u] + lab0[v] >= w2[u, v] for every edge).  Returns the match array
    (index 0 unused); match[u] = 0 on failure.
    """
    sz = 2 * n + 2
    eu = np.zeros((sz, sz), dtype=np.int32)
    ev = np.zeros((sz, sz), dtype=np.int32)
    ew = np.zeros((sz, sz), dtype=np.int64)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            eu[u, v] = u
            ev[u, v] = v
            if u != v:
                ew[u, v] = w2[u, v]
    lab = np.zeros(sz, dtype=np.int64)
    for u in range(1, n + 1):
        lab[u] = lab0[u]
    match = np.zeros(sz, dtype=np.int32)
    slack = np.zeros(sz, dtype=np.int32)
    slack_val = np.full(sz, INF, dtype=np.int64)
    st = np.zeros(sz, dtype=np.int32)
    for x in range(1, n + 1):
        st[x] = x
    pa = np.zeros(sz, dtype=np.int32)
    S = np.full(sz, -1, dtype=np.int32)
    vis = np.zeros(sz, dtype=np.int32)
    flower = np.empty((sz, sz), dtype=np.int32)
    flower_len = np.zeros(sz, dtype=np.int32)
    flower_from = np.empty((sz, sz), dtype=np.int32)
    q = np.empty(sz * sz, dtype=np.int32)
    stack = np.empty(sz * 2, dtype=np.int32)
    tasks = np.empty((sz * 4, 2), dtype=np.int32)
    # state: [n_x, lca timestamp, pops, dual adjustments, blossoms, expansions]
    state = np.zeros(8, dtype=np.int64)
    state[0] = n
    max_adjust = 50 * n + 200

    while True:
        for x in range(sz):
            S[x] = -1
            slack[x] = 0
            slack_val[x] = INF
        qhead = 0
        qtail = 0
        free_found = False
        for x in range(1, state[0] + 1):
            if st[x] == x and match[x] == 0:
                free_found = True
                S[x] = 0
                qtail = _q_push(flower, flower_len, q, qtail, stack, n, x)
        if not free_found:
            break
        aug = False
        adjustments = 0
        while not aug:
            adjustments += 1
            state[3] += 1
            if adjustments > max_adjust:
                for x in range(sz):
                    match[x] = 0
                return match, state, lab
            while qhead < qtail and not aug:
                u = q[qhead]
                qhead += 1
                state[2] += 1
                if S[st[u]] != 0:
                    continue
                for idx in range(adeg[u]):
                    v = adj[u, idx]
                    if ew[u, v] > 0 and st[u] != st[v]:
                        if _e_delta(lab, eu, ev, ew, u, v) == 0:
                            done, qtail = _on_found_edge(
                                lab, eu, ev, ew, slack, slack_val, st, pa, S, match, vis, flower,
                                flower_len, flower_from, q, qtail, stack, tasks, state,
                                n, u, v,
                            )
                            if done:
                                aug = True
                                break
                        else:
                            _update_slack(lab, eu, ev, ew, slack, slack_val, u, st[v])
            if aug:
                break
            d = INF
            for b in range(n + 1, state[0] + 1):
                if st[b] == b and S[b] == 1:
                    half_lab = lab[b] // 2
                    if half_lab < d:
                        d = half_lab
            for x in range(1, state[0] + 1):
                if st[x] == x and slack[x] != 0 and st[slack[x]] != x:
                    sd = slack_val[x]
                    if S[x] == -1:
                        if sd < d:
                            d = sd
                    elif S[x] == 0:
                        hd = sd // 2
                        if hd < d:
                            d = hd
            if d >= INF:
                # No augmenting structure: perfect matching impossible.
                for x in range(sz):
                    match[x] = 0
                return match, state, lab
            for u in range(1, n + 1):
                if S[st[u]] == 0:
                    lab[u] -= d
                elif S[st[u]] == 1:
                    lab[u] += d
            for x in range(1, state[0] + 1):
                if st[x] == x and slack[x] != 0:
                    if S[x] == -1:
                        slack_val[x] -= d
                    elif S[x] == 0:
                        slack_val[x] -= 2 * d
            for b in range(n + 1, state[0] + 1):
                if st[b] == b:
                    if S[b] == 0:
                        lab[b] += 2 * d
                    elif S[b] == 1:
                        lab[b] -= 2 * d
            for x in range(1, state[0] + 1):
                if (
                    st[x] == x
                    and slack[x] != 0
                    and st[slack[x]] != x
                    and slack_val[x] <= 0
                    and S[x] != 1
                ):
                    done, qtail = _on_found_edge(
                        lab, eu, ev, ew, slack, slack_val, st, pa, S, match, vis, flower,
                        flower_len, flower_from, q, qtail, stack, tasks, state,
                        n, slack[x], x,
                    )
                    if done:
                        aug = True
                        break
            if aug:
                break
            for b in range(n + 1, state[0] + 1):
                if st[b] == b and S[b] == 1 and lab[b] == 0:
                    state[5] += 1
                    qtail = _expand_blossom(
                        lab, eu, ev, ew, slack, slack_val, st, pa, S, match, flower, flower_len,
                        flower_from, q, qtail, stack, n, b,
                    )
    return match, state, lab


def max_weight_perfect_matching(
    weights: np.ndarray,
    duals: np.ndarray | None = None,
    return_duals: bool = False,
):
    """weights: (n, n) symmetric int64, entries > 0 (0 = no edge), n even.

    duals: optional feasible warm-start duals (duals[u] + duals[v] >= w).
    Returns mate array (n,) with mate[i] = j (plus the final vertex duals
    when return_duals is set), or raises if no perfect matching exists.
    """
    n = weights.shape[0]
    if n == 0:
        out = np.zeros(0, dtype=np.int64)
        return (out, out.astype(np.float64)) if return_duals else out
    if n % 2 != 0:
        raise ValueError("perfect matching needs an even vertex count")
    w2 = np.zeros((n + 1, n + 1), dtype=np.int64)
    w2[1:, 1:] = 2 * weights.astype(np.int64)
    lab0 = np.zeros(n + 1, dtype=np.int64)
    if duals is None:
        lab0[1:] = 2 * ((int(weights.max()) + 1) // 2)
    else:
        lab0[1:] = 2 * duals.astype(np.int64)
    adj, adeg = _full_adjacency(n)
    match, stats, lab = _matching_core(n, w2, lab0, adj, adeg)
    global LAST_STATS
    LAST_STATS = stats
    if np.any(match[1 : n + 1] == 0):
        raise RuntimeError("graph has no perfect matching")
    mate = match[1 : n + 1].astype(np.int64) - 1
    if return_duals:
        return mate, lab[1 : n + 1] / 2.0
    return mate


def _full_adjacency(n: int) -> tuple[np.ndarray, np.ndarray]:
    adj = np.empty((n + 1, n), dtype=np.int32)
    adj[:, :] = np.arange(1, n + 1, dtype=np.int32)[None, :]
    adeg = np.full(n + 1, n, dtype=np.int32)
    adeg[0] = 0
    return adj, adeg


def min_weight_perfect_matching(
    weights: np.ndarray, missing: np.int64 = INF, k_candidates: int = 0
) -> np.ndarray:
    """Minimum-weight perfect matching for int64 costs (`missing` = no edge).

    Warm-starts the duals at half the nearest-neighbor cost per vertex, a
    feasible point that is usually close to tight.

    k_candidates > 0 solves on the symmetrized k-nearest-neighbor subgraph
    first and certifies optimality against the full edge set via the final
    duals (omitted-edge feasibility y_u + y_v >= w' suffices: odd-set duals
    only strengthen it).  Violated edges are added and the solve repeats, so
    the result is exactly the full-graph optimum.
    """
    n = weights.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    finite = weights < missing
    np.fill_diagonal(finite, False)
    if not finite.any():
        raise RuntimeError("graph has no edges")
    big = np.int64(weights[finite].max()) + np.int64(1)
    transformed = np.where(finite, big - weights, np.int64(0)).astype(np.int64)
    np.fill_diagonal(transformed, 0)
    # Min-land dual y_u = floor(min_v w[u, v] / 2) is feasible
    # (y_u + y_v <= w[u, v] for all edges); map to max-land duals big - y.
    wrow = np.where(finite, weights, np.int64(1) << np.int64(61)).astype(np.int64)
    np.fill_diagonal(wrow, np.int64(1) << np.int64(61))
    y = np.minimum(wrow.min(axis=1) // 2, (np.int64(1) << np.int64(60)))
    duals = big - y
    if k_candidates <= 0 or k_candidates >= n - 1 or n < 8:
        return max_weight_perfect_matching(transformed, duals=duals)
    return _sparse_certified(transformed, finite, duals, k_candidates)


def _sparse_certified(w_max_land, finite, duals, k):
    n = w_max_land.shape[0]
    order = np.argsort(-w_max_land, axis=1, kind="stable")  # best (heaviest max-land) first
    cand = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    cand[rows, order[:, :k].ravel()] = True
    cand |= cand.T
    cand &= finite
    lab0 = np.zeros(n + 1, dtype=np.int64)
    lab0[1:] = 2 * duals
    w2_full = np.zeros((n + 1, n + 1), dtype=np.int64)
    w2_full[1:, 1:] = 2 * w_max_land
    for _attempt in range(12):
        w2 = np.where(cand, 2 * w_max_land, np.int64(0)).astype(np.int64)
        w2p = np.zeros((n + 1, n + 1), dtype=np.int64)
        w2p[1:, 1:] = w2
        adj, adeg = _adjacency_from_mask(cand)
        match, stats, lab = _matching_core(n, w2p, lab0, adj, adeg)
        global LAST_STATS
        LAST_STATS = stats
        if np.any(match[1 : n + 1] == 0):
            # Candidate subgraph infeasible: densify and retry.
            k = min(n - 1, 2 * k + 1)
            if k >= n - 1:
                return max_weight_perfect_matching(w_max_land, duals=duals)
            order_k = order[:, :k]
            cand[:, :] = False
            rows = np.repeat(np.arange(n), k)
            cand[rows, order_k.ravel()] = True
            cand |= cand.T
            cand &= finite
            continue
        # Certificate: lab_u + lab_v >= 2*w' on every finite omitted edge.
        labv = lab[1 : n + 1]
        viol = (labv[:, None] + labv[None, :]) < w2_full[1:, 1:]
        viol &= finite & ~cand
        if not viol.any():
            return match[1 : n + 1].astype(np.int64) - 1
        cand |= viol | viol.T
    # Safety net: exact dense solve.
    return max_weight_perfect_matching(w_max_land, duals=duals)


def _adjacency_from_mask(cand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = cand.shape[0]
    deg = cand.sum(axis=1).astype(np.int32)
    width = max(1, int(deg.max()))
    adj = np.zeros((n + 1, width), dtype=np.int32)
    adeg = np.zeros(n + 1, dtype=np.int32)
    adeg[1:] = deg
    for u in range(n):
        adj[u + 1, : deg[u]] = np.flatnonzero(cand[u]).astype(np.int32) + 1
    return adj, adeg

"""Hot numeric kernels.

Every function here is nopython-compatible and wrapped by
``maybe_jit``: with numba present (and ``EXTOPO_NO_NUMBA`` unset) they
are JIT-compiled; otherwise the same code runs interpreted.  Both paths
produce identical results.
"""

from __future__ import annotations

import numpy as np

from ._backend import maybe_jit


@maybe_jit
def _find(parent: np.ndarray, x: int) -> int:
    ## path halving
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@maybe_jit
def _ascending_sweep(eu, ev, rank, vorder, n):
    """Union-find pass over edges sorted by the ascending order.

    ``rank[v]`` is the position of vertex ``v`` in the ascending
    (value, id) order and ``vorder`` its inverse.  Each merge pairs the
    younger component's minimum vertex with the merging edge; edges that
    close a cycle are flagged.  Also reports per-component extreme
    vertices (minimum in ascending order, maximum in ascending order).

    Returns (ord_birth_vertex, ord_edge_pos, n_ord, cycle_mask,
    comp_min_vertex, comp_max_vertex, n_comp).
    """
    m = eu.shape[0]
    parent = np.empty(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    comp_min = np.empty(n, dtype=np.int64)
    for v in range(n):
        parent[v] = v
        comp_min[v] = v
    ord_birth = np.empty(m, dtype=np.int64)
    ord_edge = np.empty(m, dtype=np.int64)
    cycle = np.zeros(m, dtype=np.bool_)
    n_ord = 0
    for i in range(m):
        ru = _find(parent, eu[i])
        rv = _find(parent, ev[i])
        if ru == rv:
            cycle[i] = True
            continue
        mu = comp_min[ru]
        mv = comp_min[rv]
        if rank[mu] > rank[mv]:
            younger, elder = mu, mv
        else:
            younger, elder = mv, mu
        ord_birth[n_ord] = younger
        ord_edge[n_ord] = i
        n_ord += 1
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
        comp_min[ru] = elder
    ## per-component extremes in ascending rank
    minrank = np.full(n, n, dtype=np.int64)
    maxrank = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        r = _find(parent, v)
        rk = rank[v]
        if rk < minrank[r]:
            minrank[r] = rk
        if rk > maxrank[r]:
            maxrank[r] = rk
    cmin = np.empty(n, dtype=np.int64)
    cmax = np.empty(n, dtype=np.int64)
    n_comp = 0
    for v in range(n):
        if parent[v] == v:
            cmin[n_comp] = vorder[minrank[v]]
            cmax[n_comp] = vorder[maxrank[v]]
            n_comp += 1
    return ord_birth, ord_edge, n_ord, cycle, cmin, cmax, n_comp


@maybe_jit
def _descending_sweep(eu, ev, rank, n):
    """Mirror pass over edges sorted by the descending order.

    A component is born at its vertex of largest ascending rank; each
    merge pairs the younger component's birth vertex (the one of smaller
    rank) with the merging edge.  Cycle-closing edges are flagged.

    Returns (rel_birth_vertex, rel_edge_pos, n_rel, cycle_mask).
    """
    m = eu.shape[0]
    parent = np.empty(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    comp_first = np.empty(n, dtype=np.int64)
    for v in range(n):
        parent[v] = v
        comp_first[v] = v
    rel_birth = np.empty(m, dtype=np.int64)
    rel_edge = np.empty(m, dtype=np.int64)
    cycle = np.zeros(m, dtype=np.bool_)
    n_rel = 0
    for i in range(m):
        ru = _find(parent, eu[i])
        rv = _find(parent, ev[i])
        if ru == rv:
            cycle[i] = True
            continue
        fu = comp_first[ru]
        fv = comp_first[rv]
        if rank[fu] < rank[fv]:
            younger, elder = fu, fv
        else:
            younger, elder = fv, fu
        rel_birth[n_rel] = younger
        rel_edge[n_rel] = i
        n_rel += 1
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
        comp_first[ru] = elder
    return rel_birth, rel_edge, n_rel, cycle


@maybe_jit
def _root_forest(n, tu, tv, tslot):
    """Root the forest given by tree edges (tu, tv).

    ``tslot[i]`` is the cycle-coordinate slot of tree edge i (-1 when the
    edge is not an ascending cycle edge).  Returns (parent, depth,
    up_slot) where up_slot[v] is the slot of the edge from v to its
    parent (-1 at roots and for non-slot edges).
    """
    t = tu.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for i in range(t):
        deg[tu[i]] += 1
        deg[tv[i]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    adj = np.empty(2 * t, dtype=np.int64)
    aslot = np.empty(2 * t, dtype=np.int64)
    cursor = indptr[:n].copy()
    for i in range(t):
        u, v = tu[i], tv[i]
        adj[cursor[u]] = v
        aslot[cursor[u]] = tslot[i]
        cursor[u] += 1
        adj[cursor[v]] = u
        aslot[cursor[v]] = tslot[i]
        cursor[v] += 1
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    up_slot = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        if visited[s]:
            continue
        visited[s] = True
        head, tail = 0, 1
        queue[0] = s
        while head < tail:
            v = queue[head]
            head += 1
            for idx in range(indptr[v], indptr[v + 1]):
                w = adj[idx]
                if not visited[w]:
                    visited[w] = True
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    up_slot[w] = aslot[idx]
                    queue[tail] = w
                    tail += 1
    return parent, depth, up_slot


@maybe_jit
def _pair_cycles(n, tu, tv, tslot, cu, cv, own_slot):
    """Pair each forest-closing edge with a cycle-coordinate slot.

    Tree edges (tu, tv) with slot weights ``tslot`` (-1 when an edge
    carries no slot) form the starting forest.  The remaining edges
    (cu, cv) are processed in the given order; edge i pairs with the
    smallest achievable maximum slot over cycles through it in the
    forest plus the edges inserted before it.  That value is the maximum
    of the edge's own slot and the bottleneck (minimax) slot between its
    endpoints, read off a minimum spanning forest maintained under
    insertion: after each query the edge swaps in whenever its slot
    undercuts the path maximum, evicting the bottleneck edge.

    The forest is held as parent pointers with per-node edge weights.
    Queries climb both endpoints alternately with stamps until the walks
    meet, so the cost tracks the path length, not the tree depth; a swap
    re-roots the cut side by reversing one parent chain.

    Returns low[i] = paired slot per closing edge, -1 when the cycle
    carries no slot at all (callers reject that as malformed).
    """
    parent, depth, up_w = _root_forest(n, tu, tv, tslot)
    ## depth goes stale once edges swap in; the walks never use it
    c = cu.shape[0]
    low = np.empty(c, dtype=np.int64)
    stamp_a = np.full(n, -1, dtype=np.int64)
    stamp_b = np.full(n, -1, dtype=np.int64)
    for i in range(c):
        a = cu[i]
        b = cv[i]
        w = own_slot[i]
        stamp_a[a] = i
        stamp_b[b] = i
        if stamp_a[b] == i:
            meet = b
        else:
            xa = a
            xb = b
            meet = -1
            while meet == -1:
                if xa != -2:
                    p = parent[xa]
                    if p == -1:
                        xa = -2
                    else:
                        xa = p
                        if stamp_b[xa] == i:
                            meet = xa
                            break
                        stamp_a[xa] = i
                if xb != -2:
                    p = parent[xb]
                    if p == -1:
                        xb = -2
                    else:
                        xb = p
                        if stamp_a[xb] == i:
                            meet = xb
                            break
                        stamp_b[xb] = i
        best = -1
        best_node = -1
        best_on_b = False
        x = a
        while x != meet:
            if up_w[x] > best:
                best = up_w[x]
                best_node = x
                best_on_b = False
            x = parent[x]
        x = b
        while x != meet:
            if up_w[x] > best:
                best = up_w[x]
                best_node = x
                best_on_b = True
            x = parent[x]
        if w >= best:
            ## the new edge is its own cycle's bottleneck (slots are
            ## distinct, so equality only happens at -1): forest unchanged
            low[i] = w
        else:
            low[i] = best
            if best_on_b:
                end_new, end_far = b, a
            else:
                end_new, end_far = a, b
            ## cut the bottleneck edge, re-root the cut side at end_new
            ## by reversing the chain up to it, and hang it off end_far
            x = end_new
            prev = end_far
            pw = w
            while True:
                p = parent[x]
                wx = up_w[x]
                parent[x] = prev
                up_w[x] = pw
                prev = x
                pw = wx
                if x == best_node:
                    break
                x = p
    return low


@maybe_jit
def _betweenness_raw(indptr, indices, n):
    """Shortest-path betweenness accumulation over all sources.

    Each unordered pair is counted twice (once per direction); the caller
    halves and normalizes.  Predecessors are recognized on the fly via
    the breadth-first distance array.
    """
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            v = order[head]
            head += 1
            for idx in range(indptr[v], indptr[v + 1]):
                w = indices[idx]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for oi in range(tail - 1, -1, -1):
            w = order[oi]
            coeff = (1.0 + delta[w]) / sigma[w]
            for idx in range(indptr[w], indptr[w + 1]):
                v = indices[idx]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


@maybe_jit
def _closeness_values(indptr, indices, n):
    """Per-vertex closeness: (reachable - 1) / sum of distances within
    the vertex's component; 0 for vertices that reach nothing."""
    out = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for v in range(n):
            dist[v] = -1
        dist[s] = 0
        order[0] = s
        head, tail = 0, 1
        total = 0
        while head < tail:
            v = order[head]
            head += 1
            total += dist[v]
            for idx in range(indptr[v], indptr[v + 1]):
                w = indices[idx]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
        if tail > 1:
            out[s] = (tail - 1.0) / total
    return out


@maybe_jit
def _kth_largest_tents(lo, hi, grid, k_max):
    """levels[k, j] = (k+1)-th largest tent value at grid[j] over the
    intervals [lo[p], hi[p]]; 0 when fewer than k+1 tents are positive.

    A tent over [lo, hi] is min(t - lo, hi - t) clipped at 0: slope +-1,
    peak (hi - lo) / 2 at the midpoint.
    """
    npts = lo.shape[0]
    t_len = grid.shape[0]
    out = np.zeros((k_max, t_len), dtype=np.float64)
    for j in range(t_len):
        t = grid[j]
        for p in range(npts):
            h = t - lo[p]
            h2 = hi[p] - t
            if h2 < h:
                h = h2
            if h <= 0.0:
                continue
            if h > out[k_max - 1, j]:
                pos = k_max - 1
                while pos > 0 and out[pos - 1, j] < h:
                    out[pos, j] = out[pos - 1, j]
                    pos -= 1
                out[pos, j] = h
    return out

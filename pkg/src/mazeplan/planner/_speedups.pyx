# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled planning loop.

Mirrors planner.core.plan_python step for step: same splitmix64 stream,
same arithmetic expressions, same tie rules. Any divergence from the pure
Python backend is a bug; the test suite compares the two bit for bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, sqrt
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _rng_random(unsigned long long *state) noexcept nogil:
    state[0] = state[0] + 0x9E3779B97F4A7C15ULL
    return <double>(_mix64(state[0]) >> 11) * INV_2_53


cdef int _cmp_long(const void *a, const void *b) noexcept nogil:
    cdef long x = (<const long *>a)[0]
    cdef long y = (<const long *>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef struct Workspace:
    double *xs
    double *ys
    double *cost
    long *parent
    long *first_child
    long *next_sib
    long *prev_sib
    long *bucket_head
    long *bucket_next
    long *nbr
    long *stack
    long n


cdef inline bint _segment_free(const unsigned char[:, ::1] occ, int width, int height,
                               double ax, double ay, double bx, double by,
                               double resolution) noexcept nogil:
    cdef double dist = sqrt((bx - ax) * (bx - ax) + (by - ay) * (by - ay))
    cdef long steps = <long>ceil(dist / resolution)
    if steps < 1:
        steps = 1
    cdef long k
    cdef double t, x, y
    cdef long ix, iy
    for k in range(steps + 1):
        t = <double>k / <double>steps
        x = ax + (bx - ax) * t
        y = ay + (by - ay) * t
        if x < 0.0 or y < 0.0:
            return False
        ix = <long>x
        iy = <long>y
        if ix >= width or iy >= height or occ[iy, ix]:
            return False
    return True


def run_plan(const unsigned char[:, ::1] occ,
             const int[:, ::1] support,
             bint has_support,
             double alpha,
             double start_x, double start_y,
             double goal_x, double goal_y,
             double goal_radius, double step, double rewire_radius,
             double resolution,
             unsigned long long seed, long max_iter, bint optimize):
    """Run the full planning loop; returns
    (goal_idx, iterations, biased, xs, ys, parent, cost) with arrays trimmed
    to the node count."""
    cdef int height = occ.shape[0]
    cdef int width = occ.shape[1]
    cdef long n_support = support.shape[0] if has_support else 0
    cdef double eff_alpha = alpha if has_support else 0.0

    cdef long cap = max_iter + 1
    # Bucket cell size only affects speed, never results: the ring search is
    # exact. Small cells keep nearest-neighbor scans short in dense trees.
    cdef double cell = step if step >= 3.0 else 1.0
    cdef int ncx = <int>(width / cell) + 1
    cdef int ncy = <int>(height / cell) + 1
    cdef long n_cells = <long>ncx * ncy

    cdef Workspace w
    w.xs = <double *>malloc(cap * sizeof(double))
    w.ys = <double *>malloc(cap * sizeof(double))
    w.cost = <double *>malloc(cap * sizeof(double))
    w.parent = <long *>malloc(cap * sizeof(long))
    w.first_child = <long *>malloc(cap * sizeof(long))
    w.next_sib = <long *>malloc(cap * sizeof(long))
    w.prev_sib = <long *>malloc(cap * sizeof(long))
    w.bucket_head = <long *>malloc(n_cells * sizeof(long))
    w.bucket_next = <long *>malloc(cap * sizeof(long))
    w.nbr = <long *>malloc(cap * sizeof(long))
    w.stack = <long *>malloc(cap * sizeof(long))
    if (w.xs == NULL or w.ys == NULL or w.cost == NULL or w.parent == NULL or
            w.first_child == NULL or w.next_sib == NULL or w.prev_sib == NULL or
            w.bucket_head == NULL or w.bucket_next == NULL or w.nbr == NULL or
            w.stack == NULL):
        _free_workspace(&w)
        raise MemoryError()

    cdef long i
    for i in range(n_cells):
        w.bucket_head[i] = -1

    # Root node.
    w.xs[0] = start_x
    w.ys[0] = start_y
    w.cost[0] = 0.0
    w.parent[0] = -1
    w.first_child[0] = -1
    w.next_sib[0] = -1
    w.prev_sib[0] = -1
    w.n = 1
    _bucket_insert(&w, 0, cell, ncx, ncy)

    cdef unsigned long long state = seed
    cdef long it = 0
    cdef long biased = 0
    cdef long goal_idx = -1
    cdef bint done = False

    cdef double u, rx, ry, nx, ny, dx, dy, dist, best_cost, through, new_cost, dgx, dgy
    cdef long ni, si, new_idx, n_nbr, j, idx, best

    for it in range(1, max_iter + 1):
        u = _rng_random(&state)
        if u < eff_alpha:
            biased += 1
            si = <long>(_rng_random(&state) * n_support)
            rx = <double>support[si, 0] + _rng_random(&state)
            ry = <double>support[si, 1] + _rng_random(&state)
        else:
            rx = _rng_random(&state) * width
            ry = _rng_random(&state) * height

        ni = _nearest(&w, rx, ry, cell, ncx, ncy)
        dx = rx - w.xs[ni]
        dy = ry - w.ys[ni]
        dist = sqrt(dx * dx + dy * dy)
        if dist <= step:
            nx = rx
            ny = ry
        else:
            nx = w.xs[ni] + step * dx / dist
            ny = w.ys[ni] + step * dy / dist

        if not _segment_free(occ, width, height, w.xs[ni], w.ys[ni], nx, ny, resolution):
            continue

        # Gather neighbors within the rewire radius, ascending index.
        n_nbr = _neighbors(&w, nx, ny, rewire_radius, cell, ncx, ncy)
        qsort(w.nbr, n_nbr, sizeof(long), _cmp_long)

        # Best collision-free parent.
        best = -1
        best_cost = 1e308
        for j in range(n_nbr):
            idx = w.nbr[j]
            dx = w.xs[idx] - nx
            dy = w.ys[idx] - ny
            through = w.cost[idx] + sqrt(dx * dx + dy * dy)
            if through < best_cost and _segment_free(
                    occ, width, height, w.xs[idx], w.ys[idx], nx, ny, resolution):
                best = idx
                best_cost = through
        if best < 0:
            best = ni

        new_idx = _add_node(&w, nx, ny, best, cell, ncx, ncy)

        # Rewire: re-parent neighbors that strictly improve through new_idx.
        new_cost = w.cost[new_idx]
        for j in range(n_nbr):
            idx = w.nbr[j]
            if idx == best:
                continue
            dx = w.xs[idx] - nx
            dy = w.ys[idx] - ny
            dist = sqrt(dx * dx + dy * dy)
            if new_cost + dist < w.cost[idx] and _segment_free(
                    occ, width, height, nx, ny, w.xs[idx], w.ys[idx], resolution):
                _reparent(&w, idx, new_idx)

        dgx = nx - goal_x
        dgy = ny - goal_y
        if sqrt(dgx * dgx + dgy * dgy) <= goal_radius:
            if not optimize:
                goal_idx = new_idx
                done = True
                break

    if optimize and not done:
        # Best-cost non-root node inside the goal disk (nodes never move, so
        # this equals tracking entries as they happen).
        best_cost = 1e308
        for i in range(1, w.n):
            dgx = w.xs[i] - goal_x
            dgy = w.ys[i] - goal_y
            if sqrt(dgx * dgx + dgy * dgy) <= goal_radius and w.cost[i] < best_cost:
                goal_idx = i
                best_cost = w.cost[i]

    cdef long n = w.n
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    cost = np.empty(n, dtype=np.float64)
    parent = np.empty(n, dtype=np.int64)
    cdef double[::1] xs_v = xs
    cdef double[::1] ys_v = ys
    cdef double[::1] cost_v = cost
    cdef long[::1] parent_v = parent
    for i in range(n):
        xs_v[i] = w.xs[i]
        ys_v[i] = w.ys[i]
        cost_v[i] = w.cost[i]
        parent_v[i] = w.parent[i]
    _free_workspace(&w)
    return goal_idx, it, biased, xs, ys, parent, cost


cdef void _free_workspace(Workspace *w) noexcept nogil:
    free(w.xs); free(w.ys); free(w.cost); free(w.parent)
    free(w.first_child); free(w.next_sib); free(w.prev_sib)
    free(w.bucket_head); free(w.bucket_next); free(w.nbr); free(w.stack)


cdef inline long _cell_index(double x, double y, double cell, int ncx, int ncy) noexcept nogil:
    cdef long cx = <long>(x / cell)
    cdef long cy = <long>(y / cell)
    if cx < 0:
        cx = 0
    elif cx >= ncx:
        cx = ncx - 1
    if cy < 0:
        cy = 0
    elif cy >= ncy:
        cy = ncy - 1
    return cy * ncx + cx


cdef inline void _bucket_insert(Workspace *w, long i, double cell, int ncx, int ncy) noexcept nogil:
    cdef long c = _cell_index(w.xs[i], w.ys[i], cell, ncx, ncy)
    w.bucket_next[i] = w.bucket_head[c]
    w.bucket_head[c] = i


cdef long _nearest(Workspace *w, double x, double y, double cell, int ncx, int ncy) noexcept nogil:
    """Ring search outward from the query cell; exact, lowest-index ties."""
    cdef long cx = <long>(x / cell)
    cdef long cy = <long>(y / cell)
    if cx < 0:
        cx = 0
    elif cx >= ncx:
        cx = ncx - 1
    if cy < 0:
        cy = 0
    elif cy >= ncy:
        cy = ncy - 1

    cdef long best = -1
    cdef double best_d2 = 1e308
    cdef long max_r = ncx if ncx > ncy else ncy
    cdef long r, bx, by, i, x0, x1, y0, y1, side
    cdef double dx, dy, d2, ring_min
    for r in range(max_r + 1):
        if best >= 0 and r >= 1:
            ring_min = (r - 1) * cell
            if ring_min * ring_min > best_d2:
                break
        # Walk only the ring perimeter (Chebyshev distance exactly r).
        x0 = cx - r if cx - r > 0 else 0
        x1 = cx + r if cx + r < ncx - 1 else ncx - 1
        y0 = cy - r if cy - r > 0 else 0
        y1 = cy + r if cy + r < ncy - 1 else ncy - 1
        for by in range(y0, y1 + 1):
            if by == cy - r or by == cy + r:
                for bx in range(x0, x1 + 1):
                    i = w.bucket_head[by * ncx + bx]
                    while i >= 0:
                        dx = w.xs[i] - x
                        dy = w.ys[i] - y
                        d2 = dx * dx + dy * dy
                        if d2 < best_d2 or (d2 == best_d2 and i < best):
                            best = i
                            best_d2 = d2
                        i = w.bucket_next[i]
            else:
                for side in range(2):
                    bx = cx - r if side == 0 else cx + r
                    if bx < 0 or bx >= ncx:
                        continue
                    i = w.bucket_head[by * ncx + bx]
                    while i >= 0:
                        dx = w.xs[i] - x
                        dy = w.ys[i] - y
                        d2 = dx * dx + dy * dy
                        if d2 < best_d2 or (d2 == best_d2 and i < best):
                            best = i
                            best_d2 = d2
                        i = w.bucket_next[i]
    return best


cdef long _neighbors(Workspace *w, double x, double y, double radius,
                     double cell, int ncx, int ncy) noexcept nogil:
    """Collect node indices within radius of (x, y) into w.nbr."""
    cdef long x0 = <long>((x - radius) / cell)
    cdef long x1 = <long>((x + radius) / cell)
    cdef long y0 = <long>((y - radius) / cell)
    cdef long y1 = <long>((y + radius) / cell)
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if x1 >= ncx:
        x1 = ncx - 1
    if y1 >= ncy:
        y1 = ncy - 1
    cdef double r2 = radius * radius
    cdef long count = 0
    cdef long bx, by, i
    cdef double dx, dy
    for by in range(y0, y1 + 1):
        for bx in range(x0, x1 + 1):
            i = w.bucket_head[by * ncx + bx]
            while i >= 0:
                dx = w.xs[i] - x
                dy = w.ys[i] - y
                if dx * dx + dy * dy <= r2:
                    w.nbr[count] = i
                    count += 1
                i = w.bucket_next[i]
    return count


cdef long _add_node(Workspace *w, double x, double y, long parent,
                    double cell, int ncx, int ncy) noexcept nogil:
    cdef long i = w.n
    cdef double dx = x - w.xs[parent]
    cdef double dy = y - w.ys[parent]
    w.xs[i] = x
    w.ys[i] = y
    w.parent[i] = parent
    w.cost[i] = w.cost[parent] + sqrt(dx * dx + dy * dy)
    w.first_child[i] = -1
    w.prev_sib[i] = -1
    w.next_sib[i] = w.first_child[parent]
    if w.first_child[parent] >= 0:
        w.prev_sib[w.first_child[parent]] = i
    w.first_child[parent] = i
    w.n += 1
    _bucket_insert(w, i, cell, ncx, ncy)
    return i


cdef void _reparent(Workspace *w, long i, long new_parent) noexcept nogil:
    """Re-hang node i under new_parent and recompute subtree costs."""
    cdef long old = w.parent[i]
    # Unlink from the old parent's child list.
    if w.prev_sib[i] >= 0:
        w.next_sib[w.prev_sib[i]] = w.next_sib[i]
    else:
        w.first_child[old] = w.next_sib[i]
    if w.next_sib[i] >= 0:
        w.prev_sib[w.next_sib[i]] = w.prev_sib[i]
    # Link under the new parent.
    w.parent[i] = new_parent
    w.prev_sib[i] = -1
    w.next_sib[i] = w.first_child[new_parent]
    if w.first_child[new_parent] >= 0:
        w.prev_sib[w.first_child[new_parent]] = i
    w.first_child[new_parent] = i
    # Recompute costs over the moved subtree.
    cdef long top = 0
    cdef long j, c, p
    cdef double dx, dy
    w.stack[top] = i
    top += 1
    while top > 0:
        top -= 1
        j = w.stack[top]
        p = w.parent[j]
        dx = w.xs[j] - w.xs[p]
        dy = w.ys[j] - w.ys[p]
        w.cost[j] = w.cost[p] + sqrt(dx * dx + dy * dy)
        c = w.first_child[j]
        while c >= 0:
            w.stack[top] = c
            top += 1
            c = w.next_sib[c]

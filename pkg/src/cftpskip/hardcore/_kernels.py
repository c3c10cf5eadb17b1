"""Compiled inner loops for the hard-core bounding chains.

Bounds are stored as ``status`` (0 = C, 1 = B, 2 = D) plus neighbour
counters ``nb``/``nd``. Letter codes: ``v`` removes v, ``n + v`` adds v
(swap variant for the Dyer-Greenhill chain), ``2n + v`` is the
Dyer-Greenhill add without swap, and -1 is SHARP.

Active letters of the Gibbs bound live in ``act`` (length 2n) and their
weights in a segment tree whose internal nodes are always recomputed from
their children, so sums never drift.

Kernels return negative codes on failure: -1 budget exhausted, -2 stuck
chain, -3 a stored letter was passive (contraction bug), -4 embedding
violated, -5 wrong SHARP count.
"""
import numpy as np
from numba import njit

IN_C = 0
IN_B = 1
IN_D = 2
SHARP_CODE = -1

ERR_BUDGET = -1
ERR_STUCK = -2
ERR_CONTRACTION = -3
ERR_EMBEDDING = -4
ERR_SHARPS = -5

_opts = dict(cache=True, nogil=True)


# ----------------------------------------------------------------- bounds


@njit(**_opts)
def set_status(indptr, indices, status, nb, nd, v, new):
    """Move v to `new`, fixing neighbour counters; return the change in |D|."""
    old = status[v]
    if old == new:
        return 0
    for k in range(indptr[v], indptr[v + 1]):
        w = indices[k]
        if old == IN_B:
            nb[w] -= 1
        elif old == IN_D:
            nd[w] -= 1
        if new == IN_B:
            nb[w] += 1
        elif new == IN_D:
            nd[w] += 1
    status[v] = new
    return (1 if new == IN_D else 0) - (1 if old == IN_D else 0)


@njit(**_opts)
def recount(indptr, indices, status, nb, nd):
    n = status.size
    nb[:] = 0
    nd[:] = 0
    n_d = 0
    for v in range(n):
        if status[v] == IN_D:
            n_d += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if status[w] == IN_B:
                nb[v] += 1
            elif status[w] == IN_D:
                nd[v] += 1
    return n_d


@njit(**_opts)
def reset_top(indptr, status, nb, nd):
    n = status.size
    for v in range(n):
        status[v] = IN_D
        nb[v] = 0
        nd[v] = indptr[v + 1] - indptr[v]
    return n


@njit(**_opts)
def _b_neighbor(indptr, indices, status, v):
    for k in range(indptr[v], indptr[v + 1]):
        if status[indices[k]] == IN_B:
            return indices[k]
    return -1


@njit(**_opts)
def _d_neighbor(indptr, indices, status, v):
    for k in range(indptr[v], indptr[v + 1]):
        if status[indices[k]] == IN_D:
            return indices[k]
    return -1


@njit(**_opts)
def apply_letter(indptr, indices, status, nb, nd, code, n, dg, out):
    """Apply one letter to the bound; changed vertices go to `out`.

    Returns the change in |D|.
    """
    out[0] = -1
    out[1] = -1
    if code < 0:
        return 0
    kind = code // n
    v = code - kind * n
    if kind == 0:
        if status[v] != IN_C:
            out[0] = v
            return set_status(indptr, indices, status, nb, nd, v, IN_C)
        return 0
    if kind == 1 and dg:
        kb = nb[v]
        kd = nd[v]
        if kb == 1:
            u = _b_neighbor(indptr, indices, status, v)
            out[0] = v
            out[1] = u
            if kd == 0:
                dd = set_status(indptr, indices, status, nb, nd, u, IN_C)
                return dd + set_status(indptr, indices, status, nb, nd, v, IN_B)
            dd = set_status(indptr, indices, status, nb, nd, u, IN_D)
            return dd + set_status(indptr, indices, status, nb, nd, v, IN_D)
        if kb > 1:
            return 0
        if kb == 0 and kd == 1:
            # the lone D-neighbour is either swapped out or absent
            u = _d_neighbor(indptr, indices, status, v)
            out[0] = v
            out[1] = u
            dd = set_status(indptr, indices, status, nb, nd, u, IN_C)
            return dd + set_status(indptr, indices, status, nb, nd, v, IN_B)
    # plain add (Gibbs rule)
    if nb[v] == 0:
        new = IN_B if nd[v] == 0 else IN_D
        if status[v] != new:
            out[0] = v
            return set_status(indptr, indices, status, nb, nd, v, new)
    return 0


# ------------------------------------------------------- activity flags


@njit(**_opts)
def refresh_flags(status, nb, nd, act, w, n):
    """Recompute the Gibbs activity of removal and addition of w.

    Returns a bitmask: 1 if the removal flag changed, 2 if the addition flag did.
    """
    s = status[w]
    r = 1 if s != IN_C else 0
    a = 1 if (nb[w] == 0 and (s == IN_C or (s == IN_D and nd[w] == 0))) else 0
    changed = 0
    if act[w] != r:
        act[w] = r
        changed |= 1
    if act[n + w] != a:
        act[n + w] = a
        changed |= 2
    return changed


@njit(**_opts)
def refresh_all_flags(status, nb, nd, act):
    n = status.size
    for w in range(n):
        refresh_flags(status, nb, nd, act, w, n)


# ------------------------------------------------------------ segment tree


@njit(**_opts)
def tree_size(m):
    size = 1
    while size < m:
        size *= 2
    return size


@njit(**_opts)
def tree_set(tree, size, i, val):
    j = size + i
    if tree[j] == val:
        return
    tree[j] = val
    j >>= 1
    while j >= 1:
        tree[j] = tree[2 * j] + tree[2 * j + 1]
        j >>= 1


@njit(**_opts)
def tree_build(tree, size):
    for j in range(size - 1, 0, -1):
        tree[j] = tree[2 * j] + tree[2 * j + 1]


@njit(**_opts)
def tree_sample(tree, size, rng):
    """Index drawn proportionally to leaf weights (root must be positive)."""
    while True:
        u = rng.random() * tree[1]
        j = 1
        while j < size:
            left = tree[2 * j]
            if u < left:
                j = 2 * j
            else:
                u -= left
                j = 2 * j + 1
        if tree[j] > 0.0:
            return j - size


@njit(**_opts)
def base_weights(lam, n):
    w = np.empty(2 * n)
    for v in range(n):
        w[v] = 1.0 / (n * (lam[v] + 1.0))
        w[n + v] = lam[v] / (n * (lam[v] + 1.0))
    return w


@njit(**_opts)
def _refresh_around(indptr, indices, status, nb, nd, act, other, tree, size, w, x, n):
    """Refresh flags of x and N(x) for one chain; leaf = weight if active in either chain."""
    y = x
    k = indptr[x]
    while True:
        ch = refresh_flags(status, nb, nd, act, y, n)
        if ch & 1:
            tree_set(tree, size, y, w[y] if (act[y] or other[y]) else 0.0)
        if ch & 2:
            c = n + y
            tree_set(tree, size, c, w[c] if (act[c] or other[c]) else 0.0)
        if k >= indptr[x + 1]:
            break
        y = indices[k]
        k += 1


# ----------------------------------------------------------------- draws


@njit(**_opts)
def draw_base(lam, ps, dg, n, rng):
    v = int(rng.random() * n)
    if v >= n:
        v = n - 1
    if rng.random() * (lam[v] + 1.0) < lam[v]:
        if dg and rng.random() >= ps:
            return 2 * n + v
        return n + v
    return v


# ------------------------------------------------------------ forward runs


@njit(**_opts)
def forward_plain(indptr, indices, lam, ps, dg, rng, max_steps, status, nb, nd):
    n = status.size
    out = np.empty(2, np.int64)
    n_d = reset_top(indptr, status, nb, nd)
    steps = 0
    while n_d > 0:
        if steps >= max_steps:
            return ERR_BUDGET
        code = draw_base(lam, ps, dg, n, rng)
        n_d += apply_letter(indptr, indices, status, nb, nd, code, n, dg, out)
        steps += 1
    return steps


@njit(**_opts)
def _init_flags_tree(status, nb, nd, act, other, tree, size, w, n):
    tree[:] = 0.0
    for y in range(n):
        refresh_flags(status, nb, nd, act, y, n)
    for c in range(2 * n):
        if act[c] or other[c]:
            tree[size + c] = w[c]
    tree_build(tree, size)


@njit(**_opts)
def forward_oracle(indptr, indices, lam, rng, max_steps, status, nb, nd):
    """Gibbs bounding chain driven by D conditioned on the active letters."""
    n = status.size
    w = base_weights(lam, n)
    size = tree_size(2 * n)
    tree = np.zeros(2 * size)
    act = np.zeros(2 * n, np.uint8)
    none = np.zeros(2 * n, np.uint8)
    out = np.empty(2, np.int64)
    n_d = reset_top(indptr, status, nb, nd)
    _init_flags_tree(status, nb, nd, act, none, tree, size, w, n)
    steps = 0
    while n_d > 0:
        if steps >= max_steps:
            return ERR_BUDGET
        if tree[1] <= 0.0:
            return ERR_STUCK
        code = tree_sample(tree, size, rng)
        n_d += apply_letter(indptr, indices, status, nb, nd, code, n, False, out)
        steps += 1
        for t in range(2):
            if out[t] >= 0:
                _refresh_around(indptr, indices, status, nb, nd, act, none, tree, size, w, out[t], n)
    return steps


@njit(**_opts)
def forward_incremental(indptr, indices, lam, rng, max_steps, status, nb, nd):
    """Gibbs bounding chain with incremental skipping; counts every draw."""
    n = status.size
    w = base_weights(lam, n)
    size = tree_size(2 * n)
    tree = np.zeros(2 * size)
    tree[size:size + 2 * n] = w
    tree_build(tree, size)
    act = np.zeros(2 * n, np.uint8)
    removed = np.empty(2 * n, np.int64)
    n_removed = 0
    out = np.empty(2, np.int64)
    n_d = reset_top(indptr, status, nb, nd)
    refresh_all_flags(status, nb, nd, act)
    steps = 0
    while n_d > 0:
        if steps >= max_steps:
            return ERR_BUDGET
        if tree[1] <= 0.0:
            return ERR_STUCK
        code = tree_sample(tree, size, rng)
        steps += 1
        if act[code]:
            n_d += apply_letter(indptr, indices, status, nb, nd, code, n, False, out)
            for t in range(2):
                x = out[t]
                if x >= 0:
                    refresh_flags(status, nb, nd, act, x, n)
                    for k in range(indptr[x], indptr[x + 1]):
                        refresh_flags(status, nb, nd, act, indices[k], n)
            for i in range(n_removed):
                c = removed[i]
                tree_set(tree, size, c, w[c])
            n_removed = 0
        else:
            tree_set(tree, size, code, 0.0)
            removed[n_removed] = code
            n_removed += 1
    return steps


# -------------------------------------------------------- bounded CFTP


@njit(**_opts)
def cftp_bounded(indptr, indices, lam, ps, dg, rng, max_letters, status, nb, nd, stats):
    """CFTP with doubling; blocks of 1, 2, 4, ... letters go further into the past.

    ``rev[i]`` holds the letter at time -(i + 1). On success `status` holds
    the coupled bound and ``stats`` = (letters, updates, rounds, word length).
    """
    n = status.size
    out = np.empty(2, np.int64)
    rev = np.empty(1024, np.int32)
    length = 0
    k = 1
    rounds = 0
    updates = 0
    while True:
        if length + k > max_letters:
            return ERR_BUDGET
        if length + k > rev.size:
            cap = rev.size
            while cap < length + k:
                cap *= 2
            grown = np.empty(cap, np.int32)
            grown[:length] = rev[:length]
            rev = grown
        for i in range(length, length + k):
            rev[i] = draw_base(lam, ps, dg, n, rng)
        length += k
        rounds += 1
        n_d = reset_top(indptr, status, nb, nd)
        for i in range(length - 1, -1, -1):
            n_d += apply_letter(indptr, indices, status, nb, nd, rev[i], n, dg, out)
        updates += length
        if n_d == 0:
            stats[0] = length
            stats[1] = updates
            stats[2] = rounds
            stats[3] = length
            return 0
        k *= 2


# --------------------------------------------------- oracle-skipping CFTP


@njit(**_opts)
def _push(buf, length, code):
    if length == buf.size:
        grown = np.empty(2 * buf.size, np.int32)
        grown[:length] = buf[:length]
        buf = grown
    buf[length] = code
    return buf


@njit(**_opts)
def _draw_skip(tree, size, q, rng):
    """Draw from D_q restricted to SHARP and the letters weighted in `tree`."""
    total = tree[1]
    if rng.random() * (q + (1.0 - q) * total) < q:
        return SHARP_CODE
    return tree_sample(tree, size, rng)


@njit(**_opts)
def cftp_oracle(indptr, indices, lam, rng, max_letters, check, status, nb, nd, stats):
    """CFTP with oracle skipping on the Gibbs bounding chain.

    Round n draws a contracted G-word with q = 2**-n on the new chain, then
    replays the previous word on an old chain from the top, inserting the
    letters that are active for the new chain but passive for the old one.
    On success `status` holds the coupled bound and ``stats`` = (letters,
    updates, rounds, final word length). Letters count fresh events only: a
    draw that selects the next stored letter reuses an old event. The budget
    applies to all draws.
    """
    n = status.size
    w = base_weights(lam, n)
    size = tree_size(2 * n)
    tree = np.zeros(2 * size)
    act_new = np.zeros(2 * n, np.uint8)
    act_old = np.zeros(2 * n, np.uint8)
    nb_old = np.zeros(n, np.int32)
    nd_old = np.zeros(n, np.int32)
    st_old = np.zeros(n, np.int8)
    prev = np.zeros(n, np.int8)
    out = np.empty(2, np.int64)
    old = np.empty(64, np.int32)
    old_len = 0
    drawn = 0
    draws = 0
    updates = 0
    rnd = 0
    while True:
        rnd += 1
        # fresh contracted G-word on the new chain
        m = rnd
        act_old[:] = 0
        n_d = reset_top(indptr, status, nb, nd)
        _init_flags_tree(status, nb, nd, act_new, act_old, tree, size, w, n)
        new = np.empty(max(64, 2 * old_len + 16), np.int32)
        new_len = 0
        q = 2.0 ** (-m)
        while True:
            draws += 1
            if draws >= max_letters:
                return ERR_BUDGET
            code = _draw_skip(tree, size, q, rng)
            drawn += 1
            new = _push(new, new_len, code)
            new_len += 1
            if code == SHARP_CODE:
                break
            n_d += apply_letter(indptr, indices, status, nb, nd, code, n, False, out)
            updates += 1
            for t in range(2):
                if out[t] >= 0:
                    _refresh_around(indptr, indices, status, nb, nd, act_new, act_old, tree, size, w, out[t], n)
        m -= 1
        # replay the previous word on the old chain, expanding and contracting
        if old_len > 0:
            reset_top(indptr, st_old, nb_old, nd_old)
            _init_flags_tree(st_old, nb_old, nd_old, act_old, act_new, tree, size, w, n)
        pos = 0
        while pos < old_len:
            draws += 1
            if draws >= max_letters:
                return ERR_BUDGET
            code = _draw_skip(tree, size, 2.0 ** (-m), rng)
            if code == SHARP_CODE or act_old[code]:
                code = old[pos]
                pos += 1
                if code >= 0:
                    if not act_old[code]:
                        return ERR_CONTRACTION
                    apply_letter(indptr, indices, st_old, nb_old, nd_old, code, n, False, out)
                    updates += 1
                    for t in range(2):
                        if out[t] >= 0:
                            _refresh_around(indptr, indices, st_old, nb_old, nd_old, act_old, act_new, tree, size, w, out[t], n)
            else:
                # a fresh letter the old chain would have skipped
                drawn += 1
            if code == SHARP_CODE:
                new = _push(new, new_len, code)
                new_len += 1
                m -= 1
            elif act_new[code]:
                new = _push(new, new_len, code)
                new_len += 1
                n_d += apply_letter(indptr, indices, status, nb, nd, code, n, False, out)
                updates += 1
                for t in range(2):
                    if out[t] >= 0:
                        _refresh_around(indptr, indices, status, nb, nd, act_new, act_old, tree, size, w, out[t], n)
        if check:
            sharps = 0
            for i in range(new_len):
                if new[i] == SHARP_CODE:
                    sharps += 1
            if sharps != rnd or m != 0:
                return ERR_SHARPS
            if rnd > 1:
                for v in range(n):
                    if prev[v] == IN_B and status[v] != IN_B:
                        return ERR_EMBEDDING
                    if prev[v] == IN_C and status[v] != IN_C:
                        return ERR_EMBEDDING
            prev[:] = status
        old = new
        old_len = new_len
        if n_d == 0:
            stats[0] = drawn
            stats[1] = updates
            stats[2] = rnd
            stats[3] = new_len
            return 0


# ------------------------------------------------------------------ batch


@njit(**_opts)
def sample_batch(method, indptr, indices, lam, ps, dg, rng, max_letters, check, states, stats):
    """Draw ``states.shape[0]`` samples; method 0 = bounded CFTP, 1 = oracle CFTP.

    Returns the number of samples produced, or a negative error code.
    """
    n = lam.size
    status = np.empty(n, np.int8)
    nb = np.empty(n, np.int32)
    nd = np.empty(n, np.int32)
    for i in range(states.shape[0]):
        if method == 0:
            err = cftp_bounded(indptr, indices, lam, ps, dg, rng, max_letters, status, nb, nd, stats[i])
        else:
            err = cftp_oracle(indptr, indices, lam, rng, max_letters, check, status, nb, nd, stats[i])
        if err < 0:
            return err
        for v in range(n):
            states[i, v] = 1 if status[v] == IN_B else 0
    return states.shape[0]


@njit(**_opts)
def forward_batch(method, indptr, indices, lam, ps, dg, rng, max_steps, steps):
    """Forward coupling times; method 0 = plain, 1 = oracle, 2 = incremental."""
    n = lam.size
    status = np.empty(n, np.int8)
    nb = np.empty(n, np.int32)
    nd = np.empty(n, np.int32)
    for i in range(steps.size):
        if method == 0:
            s = forward_plain(indptr, indices, lam, ps, dg, rng, max_steps, status, nb, nd)
        elif method == 1:
            s = forward_oracle(indptr, indices, lam, rng, max_steps, status, nb, nd)
        else:
            s = forward_incremental(indptr, indices, lam, rng, max_steps, status, nb, nd)
        steps[i] = s
    return 0

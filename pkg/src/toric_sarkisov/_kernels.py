"""Hot integer kernels, compiled with numba when available.

Every kernel exists twice: a vectorised numpy implementation (``np_*``) and
a plain loop implementation (``loop_*``) that numba compiles into ``jit_*``.
The module-level names resolve to one of the two according to the
``TORIC_SARKISOV_BACKEND`` environment variable (``numba`` or ``numpy``),
defaulting to numba whenever it imports.

All arrays are int64. Barycentric data is carried as integers scaled by a
common denominator ``D`` (the cone determinant), so ``psi = row.sum() / D``.
"""

from __future__ import annotations

import os
from itertools import combinations_with_replacement

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("TORIC_SARKISOV_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"TORIC_SARKISOV_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


# ---------------------------------------------------------------------------
# group_elements: all sums k_1 g_1 + ... + k_r g_r mod D, 0 <= k_j < orders[j]


def np_group_elements(gens, orders, D):
    n = gens.shape[0]
    T = np.zeros((1, n), dtype=np.int64)
    for j in range(gens.shape[1]):
        ks = np.arange(orders[j], dtype=np.int64)
        T = (T[:, None, :] + ks[None, :, None] * gens[None, None, :, j]) % D
        T = T.reshape(-1, n)
    return T


def loop_group_elements(gens, orders, D):
    n = gens.shape[0]
    r = gens.shape[1]
    total = 1
    for j in range(r):
        total *= orders[j]
    out = np.zeros((total, n), dtype=np.int64)
    k = np.zeros(r, dtype=np.int64)
    cur = np.zeros(n, dtype=np.int64)
    for idx in range(total):
        for i in range(n):
            out[idx, i] = cur[i]
        # mixed-radix increment, keeping cur = sum k_j g_j mod D
        j = r - 1
        while j >= 0:
            k[j] += 1
            if k[j] < orders[j]:
                for i in range(n):
                    cur[i] = (cur[i] + gens[i, j]) % D
                break
            k[j] = 0
            for i in range(n):
                cur[i] = (cur[i] - (orders[j] - 1) * gens[i, j]) % D
            j -= 1
    return out


# ---------------------------------------------------------------------------
# first_low_point: first nonzero group element whose coordinate sum is
# <= bound, or -1. With bound = D this detects non-terminal cones.


def np_first_low_point(gens, orders, D, bound):
    T = np_group_elements(gens, orders, D)
    s = T.sum(axis=1)
    hit = np.nonzero((s > 0) & (s <= bound))[0]
    return int(hit[0]) if hit.size else -1


def loop_first_low_point(gens, orders, D, bound):
    n = gens.shape[0]
    r = gens.shape[1]
    total = 1
    for j in range(r):
        total *= orders[j]
    k = np.zeros(r, dtype=np.int64)
    cur = np.zeros(n, dtype=np.int64)
    for idx in range(total):
        s = 0
        for i in range(n):
            s += cur[i]
        if s > 0 and s <= bound:
            return idx
        j = r - 1
        while j >= 0:
            k[j] += 1
            if k[j] < orders[j]:
                for i in range(n):
                    cur[i] = (cur[i] + gens[i, j]) % D
                break
            k[j] = 0
            for i in range(n):
                cur[i] = (cur[i] - (orders[j] - 1) * gens[i, j]) % D
            j -= 1
    return -1


# ---------------------------------------------------------------------------
# cone_points: every b + D*m (b a box row, m >= 0 integral) with sum <= bound


def _compositions(n, kmax):
    """Rows m in Z_{>=0}^n with sum(m) <= kmax, ordered by total then lex."""
    rows = [np.zeros(n, dtype=np.int64)]
    for total in range(1, kmax + 1):
        for combo in combinations_with_replacement(range(n), total):
            m = np.zeros(n, dtype=np.int64)
            for i in combo:
                m[i] += 1
            rows.append(m)
    return np.array(rows, dtype=np.int64).reshape(-1, n)


def np_cone_points(box, D, bound):
    n = box.shape[1]
    if box.shape[0] == 0 or bound < 0:
        return np.zeros((0, n), dtype=np.int64)
    kmax = int(bound // D)
    comps = _compositions(n, kmax)
    csum = comps.sum(axis=1) * D
    bsum = box.sum(axis=1)
    ok = bsum[:, None] + csum[None, :] <= bound
    bi, ci = np.nonzero(ok)
    return box[bi] + D * comps[ci]


def loop_cone_points(box, D, bound):
    n = box.shape[1]
    nb = box.shape[0]
    if nb == 0 or bound < 0:
        return np.zeros((0, n), dtype=np.int64)
    kmax = bound // D
    # upper bound on output size: nb * C(kmax + n, n)
    cap = 1
    for i in range(1, n + 1):
        cap = cap * (kmax + i) // i
    cap *= nb
    out = np.zeros((cap, n), dtype=np.int64)
    m = np.zeros(n, dtype=np.int64)
    cnt = 0
    for b in range(nb):
        bs = 0
        for i in range(n):
            bs += box[b, i]
        if bs > bound:
            continue
        budget = (bound - bs) // D
        # enumerate m with sum(m) <= budget in lexicographic order
        for i in range(n):
            m[i] = 0
        msum = 0
        while True:
            for i in range(n):
                out[cnt, i] = box[b, i] + D * m[i]
            cnt += 1
            # increment the last coordinate; carry leftwards when over budget
            j = n - 1
            while j >= 0:
                if msum < budget:
                    m[j] += 1
                    msum += 1
                    break
                msum -= m[j]
                m[j] = 0
                j -= 1
            if j < 0:
                break
    return out[:cnt]


# ---------------------------------------------------------------------------
# extraction_violation: lattice points w of a cone (rows of W, scaled by D)
# that land in the shed of the star subdivision at v, i.e. with
#   D < sum(w) <= sum(v), w != v, and for all s in tau:
#   (sum(w) - D) * v_s <= w_s * (sum(v) - D).
# Returns the first such row index or -1.


def np_extraction_violation(W, D, V, tau):
    if W.shape[0] == 0:
        return -1
    pw = W.sum(axis=1)
    pv = V.sum()
    cand = (pw > D) & (pw <= pv) & np.any(W != V[None, :], axis=1)
    lhs = (pw - D)[:, None] * V[None, :]
    rhs = W * (pv - D)
    inside = np.all((lhs <= rhs) | ~tau[None, :], axis=1)
    hit = np.nonzero(cand & inside)[0]
    return int(hit[0]) if hit.size else -1


def loop_extraction_violation(W, D, V, tau):
    n = W.shape[1]
    pv = 0
    for i in range(n):
        pv += V[i]
    for r in range(W.shape[0]):
        pw = 0
        same = True
        for i in range(n):
            pw += W[r, i]
            if W[r, i] != V[i]:
                same = False
        if pw <= D or pw > pv or same:
            continue
        ok = True
        for i in range(n):
            if tau[i] and (pw - D) * V[i] > W[r, i] * (pv - D):
                ok = False
                break
        if ok:
            return r
    return -1


# ---------------------------------------------------------------------------
# weighted_blowup_terminal: is the weighted blowup sum w_i e_i of a smooth
# point terminal? The cone replacing e_i is cyclic of order w_i with
# generator (1/w_i)(1, -w_j : j != i).


def np_weighted_blowup_terminal(w):
    n = w.shape[0]
    for i in range(n):
        wi = w[i]
        if wi == 1:
            continue
        k = np.arange(1, wi, dtype=np.int64)
        s = k.copy()
        for j in range(n):
            if j != i:
                s += (-k * w[j]) % wi
        if np.any(s <= wi):
            return False
    return True


def loop_weighted_blowup_terminal(w):
    n = w.shape[0]
    for i in range(n):
        wi = w[i]
        for k in range(1, wi):
            s = k
            for j in range(n):
                if j != i:
                    s += (-k * w[j]) % wi
            if s <= wi:
                return False
    return True


if HAVE_NUMBA:
    _jit = numba.njit(cache=False, nogil=True)
    jit_group_elements = _jit(loop_group_elements)
    jit_first_low_point = _jit(loop_first_low_point)
    jit_cone_points = _jit(loop_cone_points)
    jit_extraction_violation = _jit(loop_extraction_violation)
    jit_weighted_blowup_terminal = _jit(loop_weighted_blowup_terminal)
else:  # pragma: no cover
    jit_group_elements = jit_first_low_point = jit_cone_points = None
    jit_extraction_violation = jit_weighted_blowup_terminal = None


def _pick(name):
    return globals()[("jit_" if BACKEND == "numba" else "np_") + name]


group_elements = _pick("group_elements")
first_low_point = _pick("first_low_point")
cone_points = _pick("cone_points")
extraction_violation = _pick("extraction_violation")
weighted_blowup_terminal = _pick("weighted_blowup_terminal")

"""Hot numeric kernels: term-map layout fields and modularity local moving.

Two implementations live side by side:

* loop kernels compiled with numba ``@njit`` (default when numba imports),
* a fallback path (vectorized numpy for the layout fields, plain Python for
  the local-moving pass) selected by setting ``MENTIONMAP_NUMBA=0``.

The local-moving pass is a single source function run compiled or
interpreted, so community detection is bit-identical on both paths. The
layout fields accumulate in different orders on the two paths; results
agree to ~1e-12 but are not bitwise equal. ``benchmarks/bench_kernels.py``
times both.
"""

from __future__ import annotations

import os

import numpy as np


def _env_wants_numba() -> bool:
    return os.environ.get("MENTIONMAP_NUMBA", "auto").strip().lower() not in (
        "0",
        "false",
        "off",
        "no",
    )


try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


USING_NUMBA = HAS_NUMBA and _env_wants_numba()


# ---------------------------------------------------------------------------
# Layout fields.
#
# similarity_energy: V = sum over listed pairs of s_ij * |x_i - x_j|^2 and
# its gradient. distance_field: sum over all unordered pairs of |x_i - x_j|
# and the gradient of that sum (1/d guarded near coincident points).
# ---------------------------------------------------------------------------

def similarity_energy_numpy(
    coords: np.ndarray, si: np.ndarray, sj: np.ndarray, sv: np.ndarray
) -> tuple[float, np.ndarray]:
    n = coords.shape[0]
    diff = coords[si] - coords[sj]
    d2 = (diff * diff).sum(axis=1)
    value = float((sv * d2).sum())
    gi = 2.0 * sv[:, None] * diff
    grad = np.empty_like(coords)
    for axis in (0, 1):
        grad[:, axis] = np.bincount(si, weights=gi[:, axis], minlength=n)
        grad[:, axis] -= np.bincount(sj, weights=gi[:, axis], minlength=n)
    return value, grad


def _similarity_energy_loops(coords, si, sj, sv):
    n = coords.shape[0]
    grad = np.zeros((n, 2))
    value = 0.0
    for e in range(si.shape[0]):
        i = si[e]
        j = sj[e]
        dx = coords[i, 0] - coords[j, 0]
        dy = coords[i, 1] - coords[j, 1]
        value += sv[e] * (dx * dx + dy * dy)
        gx = 2.0 * sv[e] * dx
        gy = 2.0 * sv[e] * dy
        grad[i, 0] += gx
        grad[i, 1] += gy
        grad[j, 0] -= gx
        grad[j, 1] -= gy
    return value, grad


_DIST_EPS = 1e-12


def distance_field_numpy(coords: np.ndarray, block: int = 512) -> tuple[float, np.ndarray]:
    n = coords.shape[0]
    grad = np.empty_like(coords)
    total = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = coords[start:stop, None, :] - coords[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        total += float(dist.sum())
        inv = 1.0 / np.maximum(dist, _DIST_EPS)
        grad[start:stop] = (diff * inv[:, :, None]).sum(axis=1)
    # every unordered pair was visited twice; coincident pairs contribute 0
    return total / 2.0, grad


def _distance_field_loops(coords):
    n = coords.shape[0]
    grad = np.zeros((n, 2))
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            total += d
            if d > _DIST_EPS:
                gx = dx / d
                gy = dy / d
                grad[i, 0] += gx
                grad[i, 1] += gy
                grad[j, 0] -= gx
                grad[j, 1] -= gy
    return total, grad


def mean_distance_numpy(coords: np.ndarray, block: int = 512) -> float:
    n = coords.shape[0]
    total = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = coords[start:stop, None, :] - coords[None, :, :]
        total += float(np.sqrt((diff * diff).sum(axis=-1)).sum())
    return total / (n * (n - 1))


def _mean_distance_loops(coords):
    n = coords.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            total += np.sqrt(dx * dx + dy * dy)
    return total / (n * (n - 1) / 2.0)


# ---------------------------------------------------------------------------
# Modularity local moving.
#
# One full pass over `order`: each node is pulled out of its community and
# placed where the modularity gain is largest. Strict improvement only;
# equal gains keep the current community, or take the lowest community id
# among strictly-better alternatives; a fresh empty community is taken only
# when strictly better than everything else. In-place on labels/tot/csize.
# ---------------------------------------------------------------------------

def _local_move_pass_impl(
    indptr, nbr, wts, k, labels, tot, csize, order, two_m, gamma, comm_w, in_touch
):
    n = labels.shape[0]
    moves = 0
    for idx in range(order.shape[0]):
        v = order[idx]
        a = labels[v]
        kv = k[v]

        ntouch = 0
        touched = np.empty(indptr[v + 1] - indptr[v], dtype=np.int64)
        for e in range(indptr[v], indptr[v + 1]):
            c = labels[nbr[e]]
            if in_touch[c] == 0:
                in_touch[c] = 1
                touched[ntouch] = c
                ntouch += 1
                comm_w[c] = wts[e]
            else:
                comm_w[c] += wts[e]

        was_alone = csize[a] == 1
        tot[a] -= kv
        csize[a] -= 1

        best_gain = comm_w[a] - gamma * kv * tot[a] / two_m
        best_comm = a
        for t in range(ntouch):
            c = touched[t]
            if c == a:
                continue
            gain = comm_w[c] - gamma * kv * tot[c] / two_m
            if gain > best_gain or (
                gain == best_gain and best_comm != a and c < best_comm
            ):
                best_gain = gain
                best_comm = c

        if (not was_alone) and 0.0 > best_gain:
            for c in range(n):
                if csize[c] == 0:
                    best_comm = c
                    break

        tot[best_comm] += kv
        csize[best_comm] += 1
        labels[v] = best_comm
        if best_comm != a:
            moves += 1

        for t in range(ntouch):
            c = touched[t]
            in_touch[c] = 0
            comm_w[c] = 0.0
    return moves


local_move_pass_py = _local_move_pass_impl

if HAS_NUMBA:
    similarity_energy_numba = njit(cache=True)(_similarity_energy_loops)
    distance_field_numba = njit(cache=True)(_distance_field_loops)
    mean_distance_numba = njit(cache=True)(_mean_distance_loops)
    local_move_pass_numba = njit(cache=True)(_local_move_pass_impl)

if USING_NUMBA:
    similarity_energy = similarity_energy_numba
    distance_field = distance_field_numba
    mean_distance = mean_distance_numba
    local_move_pass = local_move_pass_numba
else:
    similarity_energy = similarity_energy_numpy
    distance_field = distance_field_numpy
    mean_distance = mean_distance_numpy
    local_move_pass = local_move_pass_py


def warm_up() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the fallback path)."""
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    si = np.array([0, 1], dtype=np.int64)
    sj = np.array([1, 2], dtype=np.int64)
    sv = np.array([1.0, 2.0])
    similarity_energy(coords, si, sj, sv)
    distance_field(coords)
    mean_distance(coords)
    indptr = np.array([0, 1, 2], dtype=np.int64)
    nbr = np.array([1, 0], dtype=np.int64)
    wts = np.array([1.0, 1.0])
    k = np.array([1.0, 1.0])
    labels = np.array([0, 1], dtype=np.int64)
    tot = np.array([1.0, 1.0])
    csize = np.array([1, 1], dtype=np.int64)
    order = np.array([0, 1], dtype=np.int64)
    local_move_pass(
        indptr, nbr, wts, k, labels, tot, csize, order, 2.0, 1.0,
        np.zeros(2), np.zeros(2, dtype=np.int8),
    )

"""Numba kernel for multi-source shortest-path flooding on raveled grids.

Label-setting growth: a binary min-heap keyed by (cumulative distance,
insertion counter) pops pixels in distance order with FIFO tie-breaking;
a pixel is finalized on first pop, stale heap entries are skipped (lazy
deletion). Edge cost between neighboring pixels is the squared L2
difference of their channel vectors.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _heap_push(hd, ho, hp, size, d, o, p):
    i = size
    while i > 0:
        par = (i - 1) >> 1
        if hd[par] > d or (hd[par] == d and ho[par] > o):
            hd[i] = hd[par]
            ho[i] = ho[par]
            hp[i] = hp[par]
            i = par
        else:
            break
    hd[i] = d
    ho[i] = o
    hp[i] = p
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(hd, ho, hp, size):
    d0 = hd[0]
    o0 = ho[0]
    p0 = hp[0]
    size -= 1
    if size > 0:
        d = hd[size]
        o = ho[size]
        p = hp[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            child = left
            right = left + 1
            if right < size and (
                hd[right] < hd[left] or (hd[right] == hd[left] and ho[right] < ho[left])
            ):
                child = right
            if hd[child] < d or (hd[child] == d and ho[child] < o):
                hd[i] = hd[child]
                ho[i] = ho[child]
                hp[i] = hp[child]
                i = child
            else:
                break
        hd[i] = d
        ho[i] = o
        hp[i] = p
    return d0, o0, p0, size


@njit(cache=True, nogil=True)
def _grown(hd, ho, hp):
    cap = 2 * hd.shape[0]
    nhd = np.empty(cap, np.float64)
    nho = np.empty(cap, np.int64)
    nhp = np.empty(cap, np.int64)
    nhd[: hd.shape[0]] = hd
    nho[: ho.shape[0]] = ho
    nhp[: hp.shape[0]] = hp
    return nhd, nho, nhp


@njit(cache=True, nogil=True)
def flood(values, shape, strides, offsets, off_flat, seed_flat, seed_ident, seed_class):
    """Grow regions from seeds over a raveled grid.

    values: (n_pixels, n_channels) float64, row-major raveled spatial order.
    shape/strides: spatial extents and flat strides (elements), int64.
    offsets/off_flat: neighborhood offset vectors and their flat equivalents.
    seed_*: raveled seed positions with their identifiers and class labels,
    in annotation order (order is the FIFO seniority for ties).

    Returns (distance, identifier, seed_class, parent) flat arrays; parent
    holds the raveled index of the predecessor pixel (seeds point to
    themselves).
    """
    n = values.shape[0]
    n_ch = values.shape[1]
    rank = shape.shape[0]
    n_off = off_flat.shape[0]

    dist = np.full(n, np.inf)
    ident = np.full(n, -1, np.int64)
    cls = np.zeros(n, np.int64)
    parent = np.full(n, -1, np.int64)
    finalized = np.zeros(n, np.uint8)

    cap = n if n > 64 else 64
    hd = np.empty(cap, np.float64)
    ho = np.empty(cap, np.int64)
    hp = np.empty(cap, np.int64)
    size = 0
    counter = np.int64(0)

    for k in range(seed_flat.shape[0]):
        s = seed_flat[k]
        dist[s] = 0.0
        parent[s] = s
        ident[s] = seed_ident[k]
        cls[s] = seed_class[k]
        if size == hd.shape[0]:
            hd, ho, hp = _grown(hd, ho, hp)
        size = _heap_push(hd, ho, hp, size, 0.0, counter, s)
        counter += 1

    coords = np.empty(rank, np.int64)
    while size > 0:
        d, _, p, size = _heap_pop(hd, ho, hp, size)
        if finalized[p]:
            continue
        finalized[p] = 1
        rem = p
        for a in range(rank):
            coords[a] = rem // strides[a]
            rem -= coords[a] * strides[a]
        for j in range(n_off):
            inside = True
            for a in range(rank):
                na = coords[a] + offsets[j, a]
                if na < 0 or na >= shape[a]:
                    inside = False
                    break
            if not inside:
                continue
            q = p + off_flat[j]
            if finalized[q]:
                continue
            cost = 0.0
            for ch in range(n_ch):
                diff = values[p, ch] - values[q, ch]
                cost += diff * diff
            nd = d + cost
            if nd < dist[q]:
                dist[q] = nd
                parent[q] = p
                ident[q] = ident[p]
                cls[q] = cls[p]
                if size == hd.shape[0]:
                    hd, ho, hp = _grown(hd, ho, hp)
                size = _heap_push(hd, ho, hp, size, nd, counter, q)
                counter += 1

    return dist, ident, cls, parent

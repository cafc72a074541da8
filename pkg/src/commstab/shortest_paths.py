"""Single-pass BFS/Brandes kernels over CSR adjacency.

One forward+backward sweep per source yields raw directed betweenness,
per-source reach counts and finite-distance sums (feeding closeness,
average distance, diameter and reachable-pair counts).  Sources are
processed in fixed blocks of 512 and partial results are reduced in block
order, so output is bit-identical for any thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import CommGraph, GraphError

BLOCK = 512


@njit(cache=True, nogil=True)
def _brandes_block(out_indptr, out_indices, in_indptr, in_indices, n, sources):
    bt = np.zeros(n, np.float64)
    reach = np.zeros(len(sources), np.int64)
    dsum = np.zeros(len(sources), np.int64)
    ecc = np.zeros(len(sources), np.int64)
    dist = np.full(n, -1, np.int64)
    sigma = np.zeros(n, np.float64)
    delta = np.zeros(n, np.float64)
    order = np.empty(n, np.int64)
    for si in range(len(sources)):
        s = sources[si]
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for ei in range(out_indptr[v], out_indptr[v + 1]):
                w = out_indices[ei]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        cnt = tail
        total = 0
        mx = 0
        for i in range(1, cnt):
            d = dist[order[i]]
            total += d
            if d > mx:
                mx = d
        reach[si] = cnt - 1
        dsum[si] = total
        ecc[si] = mx
        # Pair dependencies, deepest first; predecessors are the in-neighbours
        # one BFS level up, so no explicit predecessor lists are stored.
        for i in range(cnt - 1, 0, -1):
            w = order[i]
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for ei in range(in_indptr[w], in_indptr[w + 1]):
                v = in_indices[ei]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            bt[w] += delta[w]
        for i in range(cnt):
            v = order[i]
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
    return bt, reach, dsum, ecc


@njit(cache=True, nogil=True)
def _bfs_block(out_indptr, out_indices, n, sources):
    reach = np.zeros(len(sources), np.int64)
    dsum = np.zeros(len(sources), np.int64)
    ecc = np.zeros(len(sources), np.int64)
    dist = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    for si in range(len(sources)):
        s = sources[si]
        dist[s] = 0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for ei in range(out_indptr[v], out_indptr[v + 1]):
                w = out_indices[ei]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
        cnt = tail
        total = 0
        mx = 0
        for i in range(1, cnt):
            d = dist[order[i]]
            total += d
            if d > mx:
                mx = d
        reach[si] = cnt - 1
        dsum[si] = total
        ecc[si] = mx
        for i in range(cnt):
            dist[order[i]] = -1
    return reach, dsum, ecc


def _blocks(n: int) -> list[np.ndarray]:
    return [np.arange(i, min(i + BLOCK, n), dtype=np.int64) for i in range(0, n, BLOCK)]


def _map_blocks(fn, static_args: tuple, blocks: list[np.ndarray], threads: int) -> list:
    if threads <= 1 or len(blocks) <= 1:
        return [fn(*static_args, blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda blk: fn(*static_args, blk), blocks))


@dataclass(frozen=True)
class StructuralPass:
    """Everything one Brandes/BFS sweep over all sources produces."""

    betweenness: np.ndarray
    closeness: np.ndarray
    reach: np.ndarray
    dist_sum: np.ndarray
    sum_distances: int
    reachable_pairs: int
    diameter: int


def _closeness_from(reach: np.ndarray, dsum: np.ndarray, n: int) -> np.ndarray:
    """Reachability-scaled closeness: (r/(n-1)) * (r/sum_d), 0 when r = 0."""
    close = np.zeros(n, dtype=np.float64)
    if n > 1:
        mask = reach > 0
        r = reach[mask].astype(np.float64)
        close[mask] = (r / (n - 1)) * (r / dsum[mask].astype(np.float64))
    return close


def structural_pass(graph: CommGraph, *, threads: int = 1) -> StructuralPass:
    """Betweenness, closeness and distance aggregates in one sweep."""
    n = graph.n
    if n == 0:
        raise GraphError("structural pass over an empty graph")
    out_indptr, out_indices = graph.out_csr
    in_indptr, in_indices = graph.in_csr
    blocks = _blocks(n)
    parts = _map_blocks(_brandes_block,
                        (out_indptr, out_indices, in_indptr, in_indices, n),
                        blocks, threads)
    bt = np.zeros(n, dtype=np.float64)
    reach = np.empty(n, dtype=np.int64)
    dsum = np.empty(n, dtype=np.int64)
    ecc = np.empty(n, dtype=np.int64)
    for blk, (b, r, d, e) in zip(blocks, parts):
        bt += b
        reach[blk] = r
        dsum[blk] = d
        ecc[blk] = e
    return StructuralPass(
        betweenness=bt,
        closeness=_closeness_from(reach, dsum, n),
        reach=reach,
        dist_sum=dsum,
        sum_distances=int(dsum.sum()),
        reachable_pairs=int(reach.sum()),
        diameter=int(ecc.max()),
    )


def symmetrized_csr(graph: CommGraph) -> tuple[np.ndarray, np.ndarray]:
    """CSR of the arc set unioned with its reverse (distinct pairs)."""
    n = graph.n
    src = np.concatenate([graph.arc_src, graph.arc_dst]).astype(np.int64)
    dst = np.concatenate([graph.arc_dst, graph.arc_src]).astype(np.int64)
    keys = np.unique(src * n + dst)
    src_u = keys // n
    dst_u = (keys % n).astype(np.int32)
    counts = np.bincount(src_u, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst_u


def distance_pass(graph: CommGraph, *, threads: int = 1,
                  symmetrize: bool = False) -> tuple[int, int, int]:
    """(sum of finite distances, reachable ordered pairs, diameter)."""
    n = graph.n
    if n == 0:
        raise GraphError("distance pass over an empty graph")
    if symmetrize:
        indptr, indices = symmetrized_csr(graph)
    else:
        indptr, indices = graph.out_csr
    blocks = _blocks(n)
    parts = _map_blocks(_bfs_block, (indptr, indices, n), blocks, threads)
    total = 0
    pairs = 0
    diameter = 0
    for r, d, e in parts:
        pairs += int(r.sum())
        total += int(d.sum())
        if len(e) and int(e.max()) > diameter:
            diameter = int(e.max())
    return total, pairs, diameter

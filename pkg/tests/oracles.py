"""Independent reference implementations used to validate the fast paths.

Everything here favors obviousness over speed: explicit path enumeration,
cubic loops, and textbook formulas.  Nothing imports from the package's
compute modules, so agreement between the two is evidence, not tautology.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

INF = float("inf")


def floyd_warshall(n: int, arcs) -> np.ndarray:
    """All-pairs unit-weight distances by min-plus relaxation."""
    dist = np.full((n, n), INF)
    np.fill_diagonal(dist, 0.0)
    for u, v in arcs:
        if u != v:
            dist[u, v] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def enumerate_geodesics(n: int, arcs, s: int, t: int, dist: np.ndarray):
    """Every shortest s->t path, found by depth-first search.

    Exponential, fine for n <= 8.  Paths come back as node tuples.
    """
    if s == t or not np.isfinite(dist[s, t]):
        return []
    out = {u: [] for u in range(n)}
    for u, v in arcs:
        if u != v:
            out[u].append(v)
    target_len = int(dist[s, t])
    paths = []

    def walk(u, path):
        if len(path) - 1 > target_len:
            return
        if u == t and len(path) - 1 == target_len:
            paths.append(tuple(path))
            return
        for w in out[u]:
            if dist[s, u] + 1 == dist[s, w]:
                walk(w, path + [w])

    walk(s, [s])
    return paths


def brute_betweenness(n: int, arcs) -> np.ndarray:
    """Betweenness by literally counting interior visits over all geodesics."""
    dist = floyd_warshall(n, arcs)
    bt = np.zeros(n)
    for s in range(n):
        for t in range(n):
            if s == t or not np.isfinite(dist[s, t]):
                continue
            paths = enumerate_geodesics(n, arcs, s, t, dist)
            if not paths:
                continue
            sigma = len(paths)
            for path in paths:
                for v in path[1:-1]:
                    bt[v] += 1.0 / sigma
    return bt


def distance_stats(n: int, arcs):
    """(average distance over reachable pairs, diameter, reachable pairs)."""
    dist = floyd_warshall(n, arcs)
    total = 0.0
    pairs = 0
    diameter = 0
    for s in range(n):
        for t in range(n):
            if s != t and np.isfinite(dist[s, t]):
                total += dist[s, t]
                pairs += 1
                diameter = max(diameter, int(dist[s, t]))
    adarp = total / pairs if pairs else 0.0
    return adarp, diameter, pairs


def closeness_values(n: int, arcs) -> np.ndarray:
    """Reach-weighted closeness from the distance matrix."""
    dist = floyd_warshall(n, arcs)
    out = np.zeros(n)
    if n <= 1:
        return out
    for s in range(n):
        reach = [dist[s, t] for t in range(n) if t != s and np.isfinite(dist[s, t])]
        r = len(reach)
        if r == 0:
            continue
        out[s] = (r / (n - 1)) * (r / sum(reach))
    return out


def transitivity_cubic(n: int, und_edges) -> float:
    """3*triangles / open-plus-closed triples by three nested loops."""
    adj = np.zeros((n, n), dtype=bool)
    for u, v in und_edges:
        if u != v:
            adj[u, v] = adj[v, u] = True
    closed = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i != j and j != k and i != k:
                    if adj[i, j] and adj[j, k] and adj[i, k]:
                        closed += 1
    triples = 0
    deg = adj.sum(axis=1)
    for i in range(n):
        triples += int(deg[i]) * (int(deg[i]) - 1) // 2
    if triples == 0:
        return 0.0
    # closed counted each triangle 6 times (3 vertices x 2 orientations)
    return (closed / 2) / triples


def pearson_direct(xs, ys):
    """Two-pass textbook Pearson; None on degenerate variance."""
    n = len(xs)
    if n < 3:
        return None
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    return sxy / math.sqrt(sxx * syy)


def spearman_direct(xs, ys):
    """Pearson over mid-ranks."""

    def ranks(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        out = [0.0] * len(values)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                j += 1
            mid = (i + j) / 2.0 + 1.0
            for k in range(i, j + 1):
                out[order[k]] = mid
            i = j + 1
        return out

    return pearson_direct(ranks(list(xs)), ranks(list(ys)))


def oscillation_direct(series) -> int:
    """Interior strict extrema after collapsing equal runs, via groupby."""
    collapsed = [v for v, _ in itertools.groupby(series)]
    count = 0
    for i in range(1, len(collapsed) - 1):
        a, b, c = collapsed[i - 1], collapsed[i], collapsed[i + 1]
        if (b - a) * (b - c) > 0:
            count += 1
    return count


def surprisal_direct(text_tokens, corpus_tokens) -> float:
    """Mean add-one-smoothed surprisal in bits, straight from the formula."""
    counts = {}
    for tok in corpus_tokens:
        counts[tok] = counts.get(tok, 0) + 1
    total = len(corpus_tokens)
    vocab = len(counts)
    bits = [-math.log2((counts.get(tok, 0) + 1) / (total + vocab))
            for tok in text_tokens]
    return sum(bits) / len(bits)


def random_digraph(n: int, p: float, seed: int):
    """Arc list of an Erdos-Renyi digraph without self-loops."""
    rng = np.random.default_rng(seed)
    arcs = [(u, v) for u in range(n) for v in range(n)
            if u != v and rng.random() < p]
    return arcs

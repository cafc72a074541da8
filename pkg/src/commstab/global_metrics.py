"""Whole-network metrics: distances, transitivity, degree, connectivity.

Distance metrics run over directed arcs by default; an optional switch
symmetrizes arcs first (distance metrics only, centralities stay
directed).  Transitivity and components always use the symmetrized
simple graph, matching their undirected definitions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import CommGraph, GraphError
from .shortest_paths import StructuralPass, distance_pass, structural_pass, symmetrized_csr


@dataclass(frozen=True)
class GlobalMetrics:
    adarp: float
    diameter: int
    clustering_coefficient: float
    average_degree: float
    giant_component_fraction: float
    reachable_pairs: int


@njit(cache=True, nogil=True)
def _triangle_sum(indptr, indices):
    """Sum of common-neighbour counts over undirected edges u < v (= 3T)."""
    total = 0
    n = len(indptr) - 1
    for u in range(n):
        for ei in range(indptr[u], indptr[u + 1]):
            v = indices[ei]
            if v <= u:
                continue
            i = indptr[u]
            j = indptr[v]
            i_end = indptr[u + 1]
            j_end = indptr[v + 1]
            while i < i_end and j < j_end:
                a = indices[i]
                b = indices[j]
                if a == b:
                    total += 1
                    i += 1
                    j += 1
                elif a < b:
                    i += 1
                else:
                    j += 1
    return total


def _distance_stats(graph: CommGraph, *, threads: int = 1, symmetrize: bool = False,
                    pass_result: StructuralPass | None = None) -> tuple[int, int, int]:
    if symmetrize:
        return distance_pass(graph, threads=threads, symmetrize=True)
    if pass_result is not None:
        return pass_result.sum_distances, pass_result.reachable_pairs, pass_result.diameter
    return distance_pass(graph, threads=threads, symmetrize=False)


def adarp(graph: CommGraph, *, threads: int = 1, symmetrize: bool = False,
          flags: list[str] | None = None) -> float:
    """Mean finite directed distance over ordered reachable pairs; 0 if none."""
    total, pairs, _ = _distance_stats(graph, threads=threads, symmetrize=symmetrize)
    if pairs == 0:
        if flags is not None:
            flags.append("no reachable pairs")
        return 0.0
    return total / pairs


def diameter(graph: CommGraph, *, threads: int = 1, symmetrize: bool = False,
             flags: list[str] | None = None) -> int:
    """Longest finite shortest-path distance; 0 when no pair is reachable."""
    _, pairs, diam = _distance_stats(graph, threads=threads, symmetrize=symmetrize)
    if pairs == 0 and flags is not None:
        flags.append("no reachable pairs")
    return diam


def reachable_pairs(graph: CommGraph, *, threads: int = 1, symmetrize: bool = False) -> int:
    _, pairs, _ = _distance_stats(graph, threads=threads, symmetrize=symmetrize)
    return pairs


def clustering_coefficient(graph: CommGraph) -> float:
    """Transitivity 3T / open-plus-closed triples of the symmetrized graph."""
    if graph.n == 0:
        raise GraphError("clustering of an empty graph")
    indptr, indices = symmetrized_csr(graph)
    degrees = np.diff(indptr)
    triples = int((degrees * (degrees - 1) // 2).sum())
    if triples == 0:
        return 0.0
    return _triangle_sum(indptr, indices) / triples


def average_degree(graph: CommGraph) -> float:
    """Mean total degree over distinct directed arcs, i.e. 2m / n."""
    if graph.n == 0:
        raise GraphError("average degree of an empty graph")
    return 2.0 * graph.m / graph.n


def giant_component_fraction(graph: CommGraph) -> float:
    """Fraction of nodes in the largest weakly connected component."""
    if graph.n == 0:
        raise GraphError("components of an empty graph")
    if graph.m == 0:
        return 1.0 / graph.n
    adj = csr_matrix((np.ones(graph.m, dtype=np.int8), (graph.arc_src, graph.arc_dst)),
                     shape=(graph.n, graph.n))
    n_comp, labels = connected_components(adj, directed=True, connection="weak")
    largest = int(np.bincount(labels, minlength=n_comp).max())
    return largest / graph.n


def compute_global_metrics(graph: CommGraph, *, threads: int = 1,
                           symmetrize_distances: bool = False,
                           flags: list[str] | None = None,
                           pass_result: StructuralPass | None = None) -> GlobalMetrics:
    """All whole-network metrics, reusing a precomputed sweep when given."""
    if graph.n == 0:
        raise GraphError("global metrics of an empty graph")
    total, pairs, diam = _distance_stats(graph, threads=threads,
                                         symmetrize=symmetrize_distances,
                                         pass_result=pass_result)
    if pairs == 0:
        mean_dist = 0.0
        if flags is not None:
            flags.append("no reachable pairs")
    else:
        mean_dist = total / pairs
    return GlobalMetrics(
        adarp=mean_dist,
        diameter=diam,
        clustering_coefficient=clustering_coefficient(graph),
        average_degree=average_degree(graph),
        giant_component_fraction=giant_component_fraction(graph),
        reachable_pairs=pairs,
    )

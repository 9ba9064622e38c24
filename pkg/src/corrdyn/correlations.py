"""Correlation operators: the signed partition transform pairing them with
density operators, cluster correlations, and the coupled hierarchy of
equations of motion with a fixed-step RK4 integrator.

Conventions fixed here once:

* Products over disjoint blocks are embedded factors multiplied in canonical
  block order (supports are disjoint, so the order cannot matter).
* The statistics group average is applied once, outermost, per partition
  term.  In the interaction sum of the hierarchy the average is applied
  outside the commutators; applying it between the commutator and the
  product breaks the Bose identity at three particles, while the outer
  placement is exact for every statistics (verified numerically down to
  rounding).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .combinatorics import (
    ClusterSet,
    Partition,
    block_labels,
    cluster_partitions,
    mobius_weight,
    nonempty_subsets,
    set_partitions,
)
from .errors import DomainError, IntegrationError, TruncationError
from .hamiltonian import InteractionSpec, commutator_generator, hamiltonian_matrix
from .hilbert import (
    ManyBodyOperator,
    OperatorSequence,
    Statistics,
    embed_matrix,
    symmetrizer_matrix,
)


@dataclass(frozen=True)
class CorrelationSequence(OperatorSequence):
    """Operator sequence whose scalar part is pinned at zero."""

    def __post_init__(self):
        super().__post_init__()
        if self.f0 != 0:
            raise DomainError("a correlation sequence has zero scalar component")


@dataclass(frozen=True)
class ClusterCorrelation:
    """Correlation operator of one atomic s-cluster plus n satellites."""

    s: int
    n: int
    op: ManyBodyOperator
    cluster_set: ClusterSet

    def __post_init__(self):
        if self.op.n != self.s + self.n:
            raise DomainError("cluster correlation operator has wrong particle count")
        if self.cluster_set.declusterize() != tuple(range(1, self.s + self.n + 1)):
            raise DomainError("cluster set does not flatten to 1..s+n")


def _component_mats(seq: OperatorSequence) -> dict[int, np.ndarray]:
    return {n: op.mat for n, op in seq.components.items()}


def _product_over_blocks(
    comps: dict[int, np.ndarray], blocks: tuple[tuple[int, ...], ...], n: int, d: int
) -> np.ndarray:
    out = np.eye(d**n, dtype=np.complex128)
    for block in blocks:
        labels = tuple(sorted(block))
        out = out @ embed_matrix(comps[len(labels)], labels, n, d)
    return out


def density_to_correlations(D: OperatorSequence) -> CorrelationSequence:
    """Signed partition sum turning density components into correlations.

    g_n = D_n + sum over partitions with >= 2 blocks of the partition weight
    times the symmetrized product of density components on the blocks.  The
    inverse is ``correlations_to_density``; the pair is an exact bijection
    on statistics-symmetric sequences.
    """
    d, stats = D.d, D.stats
    mats = _component_mats(D)
    out = {}
    for n in range(1, D.n_max + 1):
        total = mats[n].copy()
        sym = symmetrizer_matrix(stats, n, d)
        for p in set_partitions(range(1, n + 1)):
            if p.size == 1:
                continue
            total += mobius_weight(p) * (sym @ _product_over_blocks(mats, p.blocks, n, d))
        out[n] = ManyBodyOperator(n, d, total, stats)
    return CorrelationSequence(d=d, stats=stats, n_max=D.n_max, f0=0j, components=out)


def correlations_to_density(g: OperatorSequence) -> OperatorSequence:
    """Partition-lattice inverse of ``density_to_correlations``.

    D_n is the sum over all partitions of the symmetrized product of
    correlation components; the scalar part is set to one (the empty-set
    convention of the exponential formula).
    """
    d, stats = g.d, g.stats
    mats = _component_mats(g)
    out = {}
    for n in range(1, g.n_max + 1):
        sym = symmetrizer_matrix(stats, n, d)
        total = np.zeros((d**n, d**n), dtype=np.complex128)
        for p in set_partitions(range(1, n + 1)):
            total += sym @ _product_over_blocks(mats, p.blocks, n, d)
        out[n] = ManyBodyOperator(n, d, total, stats)
    return OperatorSequence(d=d, stats=stats, n_max=g.n_max, f0=1.0 + 0j, components=out)


def _bare_partition_sum(
    comps: dict[int, np.ndarray], labels: tuple[int, ...], n: int, d: int
) -> np.ndarray:
    """Unsymmetrized density reconstruction on a label subset, embedded in the
    n-particle space: sum over partitions of ``labels`` of block products."""
    out = np.zeros((d**n, d**n), dtype=np.complex128)
    for q in set_partitions(labels):
        out += _product_over_blocks(comps, q.blocks, n, d)
    return out


def cluster_correlation_matrix(g: OperatorSequence, elements: tuple) -> tuple[np.ndarray, tuple[int, ...]]:
    """Cluster-set partition sum for the given elements.

    ``elements`` is a collection of disjoint label tuples (atomic groups).
    Returns the matrix on the local space of the sorted underlying labels,
    plus those labels: the group average acts on exactly the particles the
    elements carry, so the result can be embedded as a block factor.

    The group average is applied as the two-sided compression S M S.  On
    sums that are covariant under the full label group (plain sequences)
    this coincides with the one-sided average, and on cluster-structured
    sums it is the variant that keeps Hermitian inputs Hermitian.
    """
    labels = block_labels(elements)
    local = {l: i + 1 for i, l in enumerate(labels)}
    local_elements = tuple(tuple(local[l] for l in block_labels((el,))) for el in elements)
    m, d = len(labels), g.d
    mats = _component_mats(g)
    sym = symmetrizer_matrix(g.stats, m, d)
    total = np.zeros((d**m, d**m), dtype=np.complex128)
    for p in set_partitions(local_elements):
        term = np.eye(d**m, dtype=np.complex128)
        for block in p.blocks:
            term = term @ _bare_partition_sum(mats, block_labels(block), m, d)
        total += mobius_weight(p) * term
    return sym @ total @ sym, labels


def clusterize(g: OperatorSequence, s: int, n: int) -> ClusterCorrelation:
    """Correlation operator of the cluster set ({1..s}, s+1, ..., s+n).

    Outer signed sum over partitions of the cluster set (the s-cluster stays
    atomic), inner unsymmetrized density reconstruction per block, the
    two-sided group-average compression outermost.
    """
    if s < 1:
        raise DomainError("cluster size s must be >= 1")
    if s + n > g.n_max:
        raise TruncationError(f"clusterize needs component {s + n} > n_max={g.n_max}")
    xc = ClusterSet.canonical(s, n)
    mat, _ = cluster_correlation_matrix(g, tuple(el.labels for el in xc.elements))
    return ClusterCorrelation(s, n, ManyBodyOperator(s + n, g.d, mat, g.stats), xc)


# --------------------------------------------------------------------------
# hierarchy right-hand sides
# --------------------------------------------------------------------------

def _interaction_sum(
    comps: dict[int, np.ndarray],
    partitions: list[Partition],
    n: int,
    spec: InteractionSpec,
    labels_of_block: Callable[[tuple], tuple[int, ...]],
    block_value: Callable[[tuple], np.ndarray],
) -> np.ndarray:
    """Sum over multi-block partitions and per-block nonempty label subsets of
    the k-body commutator applied to the block product (no symmetrizer)."""
    d = spec.d
    acc = np.zeros((d**n, d**n), dtype=np.complex128)
    for p in partitions:
        if p.size == 1:
            continue
        prod = np.eye(d**n, dtype=np.complex128)
        for block in p.blocks:
            prod = prod @ block_value(block)
        subset_pools = [nonempty_subsets(labels_of_block(b)) for b in p.blocks]
        for choice in itertools.product(*subset_pools):
            k = sum(len(z) for z in choice)
            phi = spec.potentials.get(k)
            if phi is None:
                continue
            joined = tuple(sorted(l for z in choice for l in z))
            emb = embed_matrix(phi, joined, n, d)
            acc -= commutator_generator(prod, emb, spec.hbar)
    return acc


def von_neumann_rhs(g: OperatorSequence, n: int, spec: InteractionSpec) -> ManyBodyOperator:
    """Time derivative of the n-particle correlation component.

    -N_n g_n plus the symmetrized sum over multi-block partitions and
    per-block nonempty subsets of k-body commutators acting on products of
    lower components.  Couplings without a matching Phi^(k) contribute zero.
    For n = 1 this is just -N_1 g_1.
    """
    d = spec.d
    mats = _component_mats(g)
    h = hamiltonian_matrix(n, spec)
    out = -commutator_generator(mats[n], h, spec.hbar)
    if n >= 2 and spec.potentials:
        parts = set_partitions(range(1, n + 1))
        acc = _interaction_sum(
            mats,
            parts,
            n,
            spec,
            labels_of_block=lambda b: b,
            block_value=lambda b: embed_matrix(mats[len(b)], tuple(sorted(b)), n, d),
        )
        out += symmetrizer_matrix(g.stats, n, d) @ acc
    return ManyBodyOperator(n, d, out, g.stats)


def generalized_rhs(
    g: OperatorSequence, cluster: ClusterSet, spec: InteractionSpec
) -> ManyBodyOperator:
    """Time derivative of a cluster correlation, driven by the base sequence.

    Block factors are the cluster correlations of each sub-collection of
    elements (each carrying its own group average, then embedded); the
    atomic cluster is never split by the outer partitions, but per-block
    label subsets range over the flattened labels.
    """
    labels = cluster.declusterize()
    ntot = len(labels)
    if tuple(sorted(labels)) != tuple(range(1, ntot + 1)):
        raise DomainError("cluster set must flatten to labels 1..s+n")
    d = spec.d
    mats = _component_mats(g)
    h = hamiltonian_matrix(ntot, spec)

    def embedded_cluster_corr(elements: tuple) -> np.ndarray:
        local_mat, elem_labels = cluster_correlation_matrix(g, elements)
        return embed_matrix(local_mat, elem_labels, ntot, d)

    own, _ = cluster_correlation_matrix(g, tuple(el.labels for el in cluster.elements))
    out = -commutator_generator(own, h, spec.hbar)
    if len(cluster) >= 2 and spec.potentials:
        parts = cluster_partitions(cluster)
        acc = _interaction_sum(
            mats,
            parts,
            ntot,
            spec,
            labels_of_block=block_labels,
            block_value=embedded_cluster_corr,
        )
        sym = symmetrizer_matrix(g.stats, ntot, d)
        out += sym @ acc @ sym
    return ManyBodyOperator(ntot, d, out, g.stats)


# --------------------------------------------------------------------------
# RK4 integration of the coupled hierarchy
# --------------------------------------------------------------------------

DEFAULT_STEPS_PER_UNIT = 1000


class _HierarchyPlan:
    """Precomputed partition structure for repeated right-hand sides.

    The hierarchy is lower triangular in the particle count, so one plan per
    component n caches the Hamiltonian, the group average, and for every
    (partition, subset choice) the embedded coupling matrix.
    """

    def __init__(self, d: int, stats: Statistics, n_max: int, spec: InteractionSpec):
        self.d = d
        self.spec = spec
        self.n_max = n_max
        self.h = {n: hamiltonian_matrix(n, spec) for n in range(1, n_max + 1)}
        self.sym = {n: symmetrizer_matrix(stats, n, d) for n in range(1, n_max + 1)}
        self.terms: dict[int, list[tuple[tuple[tuple[int, ...], ...], list[np.ndarray]]]] = {}
        for n in range(2, n_max + 1):
            rows = []
            for p in set_partitions(range(1, n + 1)):
                if p.size == 1:
                    continue
                embedded = []
                for choice in itertools.product(*[nonempty_subsets(b) for b in p.blocks]):
                    k = sum(len(z) for z in choice)
                    phi = spec.potentials.get(k)
                    if phi is None:
                        continue
                    joined = tuple(sorted(l for z in choice for l in z))
                    embedded.append(embed_matrix(phi, joined, n, d))
                if embedded:
                    rows.append((p.blocks, embedded))
            self.terms[n] = rows

    def rhs(self, comps: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
        out = {}
        for n in range(1, self.n_max + 1):
            val = -commutator_generator(comps[n], self.h[n], self.spec.hbar)
            rows = self.terms.get(n)
            if rows:
                acc = np.zeros_like(val)
                for blocks, phis in rows:
                    prod = _product_over_blocks(comps, blocks, n, self.d)
                    for phi in phis:
                        acc -= commutator_generator(prod, phi, self.spec.hbar)
                val += self.sym[n] @ acc
            out[n] = val
        return out


def integrate_hierarchy(
    g0: OperatorSequence,
    t_final: float,
    steps: int,
    spec: InteractionSpec,
) -> CorrelationSequence:
    """Classical fixed-step RK4 for the coupled correlation hierarchy.

    ``steps`` uniform steps from 0 to t_final; each stage evaluates every
    component once (the right-hand side of component n only reads orders
    <= n).  Raises IntegrationError with the step index if values stop
    being finite.
    """
    if steps < 1:
        raise DomainError("steps must be >= 1")
    plan = _HierarchyPlan(g0.d, g0.stats, g0.n_max, spec)
    y = {n: op.mat.copy() for n, op in g0.components.items()}
    h = t_final / steps
    for step in range(steps):
        k1 = plan.rhs(y)
        k2 = plan.rhs({n: y[n] + 0.5 * h * k1[n] for n in y})
        k3 = plan.rhs({n: y[n] + 0.5 * h * k2[n] for n in y})
        k4 = plan.rhs({n: y[n] + h * k3[n] for n in y})
        for n in y:
            y[n] = y[n] + (h / 6.0) * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])
        if any(not np.isfinite(y[n]).all() for n in y):
            raise IntegrationError("hierarchy integration diverged", step)
    comps = {n: ManyBodyOperator(n, g0.d, y[n], g0.stats) for n in y}
    return CorrelationSequence(d=g0.d, stats=g0.stats, n_max=g0.n_max, f0=0j, components=comps)

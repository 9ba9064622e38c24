"""Independent brute-force references for tests and verification runs.

Nothing here shares an implementation with the fast paths it is used to
validate: tensor algebra is explicit index loops, evolution rebuilds its
eigendecomposition per call, Bell numbers come from the triangle recurrence,
and the reduced-operator sum is the direct grand-canonical definition.
Clarity over speed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hilbert import ManyBodyOperator, OperatorSequence
from .hamiltonian import InteractionSpec, hamiltonian_matrix
from .combinatorics import mobius_weight, set_partitions
from .bbgky import MarginalSequence


@dataclass(frozen=True)
class OracleResult:
    """A brute-force value tagged with how it was produced.

    Reports and failure messages carry the method string, so a mismatch
    against a fast path always names its independent reference.
    """

    value: object
    method: str
    cost: str = ""


def direct_density_evolution(D0: OperatorSequence, t: float, spec: InteractionSpec) -> OperatorSequence:
    """Componentwise unitary conjugation with a freshly diagonalized H_m.

    No shared cache, no propagator reuse: each component rebuilds its own
    eigensystem, so agreement with the cached evolution is a genuine
    cross-check.
    """
    comps = {}
    for m, op in D0.components.items():
        w, v = np.linalg.eigh(hamiltonian_matrix(m, spec))
        u = v @ np.diag(np.exp(-1j * t * w / spec.hbar)) @ v.conj().T
        comps[m] = op.with_mat(u @ op.mat @ u.conj().T)
    return OperatorSequence(
        d=D0.d, stats=D0.stats, n_max=D0.n_max, f0=D0.f0, components=comps
    )


def loop_embed(a: np.ndarray, labels: tuple[int, ...], ground: tuple[int, ...], d: int) -> np.ndarray:
    """Four-index-loop embedding of ``a`` acting on ``labels`` inside ``ground``."""
    n = len(ground)
    k = len(labels)
    positions = [ground.index(l) for l in labels]
    rest = [i for i in range(n) if i not in positions]
    side = d**n
    out = np.zeros((side, side), dtype=np.complex128)
    for row in range(side):
        rdig = _digits(row, n, d)
        for col in range(side):
            cdig = _digits(col, n, d)
            if any(rdig[i] != cdig[i] for i in rest):
                continue
            ra = _pack([rdig[p] for p in positions], d)
            ca = _pack([cdig[p] for p in positions], d)
            out[row, col] = a[ra, ca]
    return out


def loop_partial_trace(mat: np.ndarray, s: int, n: int, d: int) -> np.ndarray:
    """Explicit index-summation partial trace keeping the first s particles."""
    out = np.zeros((d**s, d**s), dtype=np.complex128)
    for row in range(d**n):
        rdig = _digits(row, n, d)
        for col in range(d**n):
            cdig = _digits(col, n, d)
            if rdig[s:] != cdig[s:]:
                continue
            out[_pack(rdig[:s], d), _pack(cdig[:s], d)] += mat[row, col]
    return out


def loop_permute_rows(mat: np.ndarray, images: tuple[int, ...], n: int, d: int) -> np.ndarray:
    """Kernel row relabeling out[q; q'] = mat[q_pi; q'] by explicit digits."""
    side = d**n
    out = np.zeros_like(np.asarray(mat, dtype=np.complex128))
    for row in range(side):
        rdig = _digits(row, n, d)
        src = _pack([rdig[images[i] - 1] for i in range(n)], d)
        out[row, :] = mat[src, :]
    return out


def spectral_trace_norm(mat: np.ndarray) -> float:
    """Trace norm via the eigenvalues of M^dagger M."""
    evals = np.linalg.eigvalsh(mat.conj().T @ mat)
    return float(np.sqrt(np.clip(evals, 0.0, None)).sum())


def _digits(index: int, n: int, d: int) -> list[int]:
    # particle 1 is the most significant digit
    out = []
    for _ in range(n):
        out.append(index % d)
        index //= d
    return out[::-1]


def _pack(digits, d: int) -> int:
    out = 0
    for q in digits:
        out = out * d + q
    return out


def bell_triangle(m: int) -> int:
    """Bell number via the triangle recurrence (rows built from scratch)."""
    if m < 0:
        raise DomainError("Bell number of negative order")
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def exhaustive_mobius_identity(m: int) -> int:
    """Sum of the signed partition weights over all partitions of an m-set:
    1 for m = 1 and 0 for m >= 2."""
    if m < 1:
        raise DomainError("need m >= 1")
    return sum(mobius_weight(p) for p in set_partitions(range(m)))


def grand_marginal_sum(D: OperatorSequence, s: int) -> ManyBodyOperator:
    """Classical-reference reduced operator: sum_n (1/n!) Tr_{s+1..s+n} D_{s+n}."""
    d = D.d
    out = np.zeros((d**s, d**s), dtype=np.complex128)
    for n in range(0, D.n_max - s + 1):
        mat = D.components[s + n].mat
        out += loop_partial_trace(mat, s, s + n, d) / math.factorial(n)
    return ManyBodyOperator(s, d, out, D.stats)


def reference_marginal(D: OperatorSequence, s: int) -> OracleResult:
    """``grand_marginal_sum`` wrapped with its provenance tag."""
    return OracleResult(
        value=grand_marginal_sum(D, s),
        method="traced-density sum with loop partial traces",
        cost=f"{D.n_max - s + 1} loop traces up to {D.d ** D.n_max} rows",
    )


def grand_marginals(D: OperatorSequence) -> MarginalSequence:
    comps = {s: grand_marginal_sum(D, s) for s in range(1, D.n_max + 1)}
    return MarginalSequence(d=D.d, stats=D.stats, n_max=D.n_max, components=comps)


def density_from_marginals(F: MarginalSequence) -> OperatorSequence:
    """Triangular inverse of ``grand_marginals``: recovers the density
    sequence whose grand-canonical sums reproduce the given marginals."""
    d = F.d
    mats: dict[int, np.ndarray] = {}
    for s in range(F.n_max, 0, -1):
        acc = F.component(s).mat.copy()
        for n in range(1, F.n_max - s + 1):
            acc -= loop_partial_trace(mats[s + n], s, s + n, d) / math.factorial(n)
        mats[s] = acc
    comps = {
        s: ManyBodyOperator(s, d, mats[s], F.stats) for s in range(1, F.n_max + 1)
    }
    return OperatorSequence(d=d, stats=F.stats, n_max=F.n_max, f0=1.0 + 0j, components=comps)

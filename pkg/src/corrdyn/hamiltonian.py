"""Many-body Hamiltonians with k-body couplings and their unitary groups.

The continuum kinetic term is replaced by an arbitrary Hermitian one-body
matrix, so the n-particle Hamiltonian is

    H_n = sum_i h(i) + sum_{k>=2} sum_{i_1<...<i_k} Phi^(k)(i_1, ..., i_k)

with H_0 = 0.  Evolution is unitary conjugation computed in the eigenbasis,
cached per particle count; the spectral route keeps the group law and trace
norms exact to rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceCapError
from .hilbert import (
    ManyBodyOperator,
    all_permutations,
    embed_matrix,
    _row_permutation_map,
)

HERMITICITY_TOL = 1e-12


def periodic_laplacian(d: int) -> np.ndarray:
    """Discrete Laplacian on a periodic chain of d sites (2 on the diagonal,
    -1 on the wrapped off-diagonals).  Scale by hbar^2/2 for a kinetic term."""
    lap = 2.0 * np.eye(d)
    for i in range(d):
        lap[i, (i + 1) % d] -= 1.0
        lap[i, (i - 1) % d] -= 1.0
    return lap.astype(np.complex128)


def _check_hermitian(name: str, mat: np.ndarray) -> None:
    dev = float(np.abs(mat - mat.conj().T).max())
    scale = max(1.0, float(np.abs(mat).max()))
    if dev > HERMITICITY_TOL * scale:
        raise DomainError(f"{name} is not Hermitian: max |M - M^dagger| = {dev:.3e}")


def _factor_symmetry_deviation(phi: np.ndarray, k: int, d: int) -> float:
    dev = 0.0
    for perm in all_permutations(k):
        rowmap = _row_permutation_map(perm.images, k, d)
        conj = phi[np.ix_(rowmap, rowmap)]
        dev = max(dev, float(np.abs(conj - phi).max()))
    return dev


@dataclass(frozen=True)
class InteractionSpec:
    """One-body matrix plus k-body coupling matrices defining the dynamics.

    Parameters
    ----------
    d : single-particle dimension.
    one_body : d x d Hermitian matrix (the kinetic stand-in).
    potentials : map k -> d^k x d^k Hermitian matrix, k >= 2.  Each matrix
        must be invariant under two-sided conjugation by factor permutations
        unless ``enforce_potential_symmetry`` is cleared (used by checks that
        deliberately corrupt a coupling).
    hbar : Planck constant over 2 pi; enters all generators as 1/hbar.
    matrix_side_cap : largest allowed d^n when building H_n.
    """

    d: int
    one_body: np.ndarray
    potentials: dict[int, np.ndarray] = field(default_factory=dict)
    hbar: float = 1.0
    matrix_side_cap: int = 4096
    enforce_potential_symmetry: bool = True

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("single-particle dimension must be >= 2")
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        ob = np.asarray(self.one_body, dtype=np.complex128)
        if ob.shape != (self.d, self.d):
            raise DomainError(f"one_body shape {ob.shape} != ({self.d}, {self.d})")
        _check_hermitian("one_body", ob)
        ob = ob.copy()
        ob.flags.writeable = False
        object.__setattr__(self, "one_body", ob)
        pots = {}
        for k, phi in sorted(self.potentials.items()):
            if k < 2:
                raise DomainError(f"k-body potential needs k >= 2, got k={k}")
            mat = np.asarray(phi, dtype=np.complex128)
            side = self.d**k
            if mat.shape != (side, side):
                raise DomainError(f"potential k={k} shape {mat.shape} != ({side}, {side})")
            _check_hermitian(f"potential k={k}", mat)
            if self.enforce_potential_symmetry:
                dev = _factor_symmetry_deviation(mat, k, self.d)
                if dev > HERMITICITY_TOL * max(1.0, float(np.abs(mat).max())):
                    raise DomainError(
                        f"potential k={k} not factor-permutation symmetric: max dev {dev:.3e}"
                    )
            mat = mat.copy()
            mat.flags.writeable = False
            pots[k] = mat
        object.__setattr__(self, "potentials", pots)

    @property
    def k_max(self) -> int:
        return max(self.potentials, default=1)

    def check_side(self, n: int) -> None:
        if self.d**n > self.matrix_side_cap:
            raise ResourceCapError(
                f"H_{n} side {self.d**n} exceeds cap {self.matrix_side_cap}"
            )


def hamiltonian_matrix(n: int, spec: InteractionSpec) -> np.ndarray:
    if n < 0:
        raise DomainError("particle count must be >= 0")
    if n == 0:
        return np.zeros((1, 1), dtype=np.complex128)
    spec.check_side(n)
    d = spec.d
    out = np.zeros((d**n, d**n), dtype=np.complex128)
    for i in range(1, n + 1):
        out += embed_matrix(spec.one_body, (i,), n, d)
    for k, phi in spec.potentials.items():
        if k > n:
            continue
        for combo in itertools.combinations(range(1, n + 1), k):
            out += embed_matrix(phi, combo, n, d)
    return out


def build_hamiltonian(n: int, spec: InteractionSpec) -> ManyBodyOperator:
    """H_n as an operator; Hermitian by construction, H_0 = 0."""
    return ManyBodyOperator(n, spec.d, hamiltonian_matrix(n, spec)) if n > 0 else ManyBodyOperator(
        0, spec.d, np.zeros((1, 1))
    )


def von_neumann_generator(f: ManyBodyOperator, H: ManyBodyOperator, hbar: float = 1.0) -> ManyBodyOperator:
    """N f = -(i/hbar) (f H - H f); traceless, the minus of the equation of
    motion right-hand side (d/dt f = -N f under unitary evolution)."""
    if (f.n, f.d) != (H.n, H.d):
        raise DomainError("operator and Hamiltonian dimensions differ")
    return f.with_mat(commutator_generator(f.mat, H.mat, hbar))


def commutator_generator(f: np.ndarray, h: np.ndarray, hbar: float) -> np.ndarray:
    return (-1j / hbar) * (f @ h - h @ f)


def interaction_generator(
    labels: tuple[int, ...], spec: InteractionSpec, f: ManyBodyOperator
) -> ManyBodyOperator:
    """k-body commutator generator with Phi^(k) embedded at ``labels``.

    A missing Phi^(k) counts as zero, so sparse coupling sets are
    expressible without special-casing callers.
    """
    k = len(labels)
    if any(not 1 <= l <= f.n for l in labels):
        raise DomainError(f"labels {labels} outside 1..{f.n}")
    phi = spec.potentials.get(k)
    if phi is None:
        return ManyBodyOperator.zero(f.n, f.d, f.stats)
    emb = embed_matrix(phi, tuple(sorted(labels)), f.n, f.d)
    return f.with_mat(commutator_generator(f.mat, emb, spec.hbar))


class EvolutionCache:
    """Eigendecompositions of H_m per particle count, built lazily.

    Immutable after construction apart from memoization; safe to share
    between concurrently running checks.
    """

    def __init__(self, spec: InteractionSpec):
        self.spec = spec
        self._eig: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._ham: dict[int, np.ndarray] = {}

    def hamiltonian(self, m: int) -> np.ndarray:
        if m not in self._ham:
            self._ham[m] = hamiltonian_matrix(m, self.spec)
        return self._ham[m]

    def eigensystem(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        if m not in self._eig:
            w, v = np.linalg.eigh(self.hamiltonian(m))
            self._eig[m] = (w, v)
        return self._eig[m]

    def reconstruction_error(self, m: int) -> float:
        w, v = self.eigensystem(m)
        h = self.hamiltonian(m)
        return float(np.abs((v * w) @ v.conj().T - h).max())

    def propagator(self, m: int, t: float) -> np.ndarray:
        """U_m(t) = exp(-i t H_m / hbar) via the cached eigenbasis."""
        w, v = self.eigensystem(m)
        return (v * np.exp(-1j * t * w / self.spec.hbar)) @ v.conj().T


def evolve_group(f: ManyBodyOperator, t: float, cache: EvolutionCache) -> ManyBodyOperator:
    """Unitary conjugation f -> U f U^dagger with U = exp(-i t H_n / hbar)."""
    u = cache.propagator(f.n, t)
    return f.with_mat(u @ f.mat @ u.conj().T)


def evolve_blocks(
    f: ManyBodyOperator, blocks: list[tuple[int, ...]], t: float, cache: EvolutionCache
) -> ManyBodyOperator:
    """Conjugate by the tensor product of per-block propagators.

    ``blocks`` must partition 1..n; each block of m labels evolves under its
    own H_m embedded at those labels.  Disjoint supports commute, so block
    order is immaterial.
    """
    flat = sorted(l for b in blocks for l in b)
    if flat != list(range(1, f.n + 1)):
        raise DomainError(f"blocks {blocks} do not partition 1..{f.n}")
    u = np.eye(f.side, dtype=np.complex128)
    for block in blocks:
        ub = cache.propagator(len(block), t)
        u = u @ embed_matrix(ub, tuple(sorted(block)), f.n, f.d)
    return f.with_mat(u @ f.mat @ u.conj().T)


def block_propagator(
    blocks: list[tuple[int, ...]], n: int, t: float, cache: EvolutionCache
) -> np.ndarray:
    """Product of embedded per-block propagators on an n-particle space."""
    u = np.eye(cache.spec.d**n, dtype=np.complex128)
    for block in blocks:
        ub = cache.propagator(len(block), t)
        u = u @ embed_matrix(ub, tuple(sorted(block)), n, cache.spec.d)
    return u


def block_hamiltonian(blocks: list[tuple[int, ...]], n: int, cache: EvolutionCache) -> np.ndarray:
    """Sum over blocks of the block Hamiltonians embedded at their labels."""
    h = np.zeros((cache.spec.d**n, cache.spec.d**n), dtype=np.complex128)
    for block in blocks:
        h += embed_matrix(cache.hamiltonian(len(block)), tuple(sorted(block)), n, cache.spec.d)
    return h

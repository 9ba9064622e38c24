"""Dense operator algebra on small tensor-product Hilbert spaces.

An n-particle operator is a d^n x d^n complex matrix.  Row and column
indices factor into n base-d digits with particle 1 as the most significant
digit (numpy C order).  Kernel-side permutations, (anti)symmetrization,
tensor-factor embedding and partial traces are all index arithmetic on that
digit decomposition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import DomainError, ResourceCapError

#: Building the group-average symmetrizer walks all n! permutations.
SYMMETRIZER_MAX_PARTICLES = 9


class Statistics(enum.Enum):
    """Exchange statistics of the particles.

    BOLTZMANN is the unsymmetrized baseline: its symmetrizer is the
    identity map, which reproduces Maxwell-Boltzmann cross-checks.
    """

    BOSE = "bose"
    FERMI = "fermi"
    BOLTZMANN = "boltzmann"

    def permutation_sign(self, parity: int) -> float:
        if self is Statistics.FERMI:
            return -1.0 if parity % 2 else 1.0
        return 1.0

    def __str__(self) -> str:  # serialization token
        return self.value


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..n}, stored as the image tuple (pi(1), ..., pi(n))."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if sorted(self.images) != list(range(1, n + 1)):
            raise DomainError(f"not a permutation of 1..{n}: {self.images}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = j, i
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def parity(self) -> int:
        """0 for even, 1 for odd (transposition count mod 2)."""
        seen = [False] * self.n
        parity = 0
        for i in range(self.n):
            if seen[i]:
                continue
            j, cycle_len = i, 0
            while not seen[j]:
                seen[j] = True
                j = self.images[j] - 1
                cycle_len += 1
            parity ^= (cycle_len - 1) & 1
        return parity

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(i) = self(other(i))."""
        if self.n != other.n:
            raise DomainError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.images[other.images[i] - 1] for i in range(self.n)))


def all_permutations(n: int) -> Iterable[Permutation]:
    import itertools

    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)


@dataclass(frozen=True)
class ManyBodyOperator:
    """A dense operator on n particles with single-particle dimension d.

    ``mat`` is a d^n x d^n complex matrix; n = 0 means a 1x1 scalar.  The
    instance is immutable: the matrix buffer is frozen at construction.
    """

    n: int
    d: int
    mat: np.ndarray
    stats: Statistics = Statistics.BOLTZMANN

    def __post_init__(self):
        if self.n < 0 or self.d < 2:
            raise DomainError(f"need n >= 0 and d >= 2, got n={self.n}, d={self.d}")
        m = np.asarray(self.mat, dtype=np.complex128)
        side = self.d**self.n
        if m.shape != (side, side):
            raise DomainError(f"matrix shape {m.shape} != ({side}, {side}) for n={self.n}, d={self.d}")
        if not np.isfinite(m).all():
            raise DomainError("operator entries must be finite")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @classmethod
    def zero(cls, n: int, d: int, stats: Statistics = Statistics.BOLTZMANN) -> "ManyBodyOperator":
        return cls(n, d, np.zeros((d**n, d**n), dtype=np.complex128), stats)

    @classmethod
    def identity(cls, n: int, d: int, stats: Statistics = Statistics.BOLTZMANN) -> "ManyBodyOperator":
        return cls(n, d, np.eye(d**n, dtype=np.complex128), stats)

    @property
    def side(self) -> int:
        return self.d**self.n

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def dagger(self) -> "ManyBodyOperator":
        return ManyBodyOperator(self.n, self.d, self.mat.conj().T, self.stats)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.abs(self.mat).max()))
        return float(np.abs(self.mat - self.mat.conj().T).max()) <= tol * scale

    def with_mat(self, mat: np.ndarray) -> "ManyBodyOperator":
        return ManyBodyOperator(self.n, self.d, mat, self.stats)

    def __add__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_compatible(other)
        return self.with_mat(self.mat + other.mat)

    def __sub__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_compatible(other)
        return self.with_mat(self.mat - other.mat)

    def __rmul__(self, scalar: complex) -> "ManyBodyOperator":
        return self.with_mat(scalar * self.mat)

    def __matmul__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_compatible(other)
        return self.with_mat(self.mat @ other.mat)

    def _check_compatible(self, other: "ManyBodyOperator"):
        if (self.n, self.d) != (other.n, other.d):
            raise DomainError(
                f"operator mismatch: (n={self.n}, d={self.d}) vs (n={other.n}, d={other.d})"
            )


@dataclass(frozen=True)
class OperatorSequence:
    """Truncated sequence (f0, f1, ..., f_{n_max}) of n-particle operators."""

    d: int
    stats: Statistics
    n_max: int
    f0: complex = 0j
    components: Mapping[int, ManyBodyOperator] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        comps = dict(self.components)
        for n in range(1, self.n_max + 1):
            op = comps.get(n)
            if op is None:
                comps[n] = ManyBodyOperator.zero(n, self.d, self.stats)
                continue
            if op.n != n or op.d != self.d or op.stats != self.stats:
                raise DomainError(f"component {n} has inconsistent metadata")
        extra = set(comps) - set(range(1, self.n_max + 1))
        if extra:
            raise DomainError(f"components beyond truncation: {sorted(extra)}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "f0", complex(self.f0))

    def component(self, n: int) -> ManyBodyOperator:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"component {n} outside 1..{self.n_max}")
        return self.components[n]


# --------------------------------------------------------------------------
# index arithmetic
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _digit_table(n: int, d: int) -> np.ndarray:
    """(n, d^n) table: row i holds the base-d digit of particle i+1 for every
    composite index (particle 1 most significant)."""
    if n == 0:
        return np.zeros((0, 1), dtype=np.intp)
    table = np.array(np.unravel_index(np.arange(d**n), (d,) * n), dtype=np.intp)
    table.flags.writeable = False
    return table


@lru_cache(maxsize=None)
def _row_permutation_map(images: tuple[int, ...], n: int, d: int) -> np.ndarray:
    """Index map r -> r' realizing kernel row substitution q_i -> q_{pi(i)}."""
    digits = _digit_table(n, d)
    permuted = digits[[p - 1 for p in images], :]
    out = np.ravel_multi_index(tuple(permuted), (d,) * n)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def _embedding_codes(positions: tuple[int, ...], n: int, d: int):
    """Index codes used to embed a |positions|-particle operator at the given
    1-based factor positions of an n-particle space."""
    digits = _digit_table(n, d)
    k = len(positions)
    sub = np.ravel_multi_index(tuple(digits[[p - 1 for p in positions], :]), (d,) * k)
    rest_axes = [i for i in range(n) if (i + 1) not in positions]
    if rest_axes:
        rest = np.ravel_multi_index(tuple(digits[rest_axes, :]), (d,) * len(rest_axes))
    else:
        rest = np.zeros(d**n, dtype=np.intp)
    sub.flags.writeable = False
    rest.flags.writeable = False
    return sub, rest


def embed_matrix(a: np.ndarray, positions: tuple[int, ...], n: int, d: int) -> np.ndarray:
    """Embed matrix ``a`` so its factors act at ``positions`` (identity elsewhere)."""
    sub, rest = _embedding_codes(positions, n, d)
    return np.asarray(a, dtype=np.complex128)[np.ix_(sub, sub)] * (rest[:, None] == rest[None, :])


def partial_trace_matrix(mat: np.ndarray, s: int, n: int, d: int) -> np.ndarray:
    """Trace out particles s+1..n, keeping the first s."""
    if s == n:
        return np.asarray(mat, dtype=np.complex128)
    ds, dm = d**s, d ** (n - s)
    return np.einsum("ajbj->ab", np.asarray(mat, dtype=np.complex128).reshape(ds, dm, ds, dm))


@lru_cache(maxsize=None)
def symmetrizer_matrix(stats: Statistics, n: int, d: int) -> np.ndarray:
    """Group-average projection (1/n!) sum_pi sign(pi) P_pi on the ket side.

    For BOLTZMANN this is the identity.  The returned matrix is the
    orthogonal projection onto the (anti)symmetric subspace.
    """
    side = d**n
    if stats is Statistics.BOLTZMANN or n == 1:
        out = np.eye(side, dtype=np.complex128)
    else:
        if n > SYMMETRIZER_MAX_PARTICLES:
            raise ResourceCapError(f"symmetrizer over {n} particles exceeds n! budget")
        out = np.zeros((side, side), dtype=np.complex128)
        rows = np.arange(side)
        for perm in all_permutations(n):
            sign = stats.permutation_sign(perm.parity)
            out[rows, _row_permutation_map(perm.images, n, d)] += sign
        out /= math.factorial(n)
    out.flags.writeable = False
    return out


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def embed_operator(a: ManyBodyOperator, labels: Iterable[int], ground: Iterable[int]) -> ManyBodyOperator:
    """Tensor ``a`` with identities so it acts on ``labels`` inside ``ground``.

    ``ground`` is the ordered label list of the target space; the j-th factor
    of ``a`` is placed at the position of the j-th entry of ``labels``.
    Tr(result) = Tr(a) * d^(len(ground) - len(labels)).
    """
    ground_t = tuple(ground)
    labels_t = tuple(labels)
    positions = []
    for l in labels_t:
        if l not in ground_t:
            raise DomainError(f"label {l} not in ground set {ground_t}")
        positions.append(ground_t.index(l) + 1)
    if len(set(labels_t)) != len(labels_t):
        raise DomainError("labels must be distinct")
    if a.n != len(labels_t):
        raise DomainError(f"operator has {a.n} factors but {len(labels_t)} labels given")
    n = len(ground_t)
    return ManyBodyOperator(n, a.d, embed_matrix(a.mat, tuple(positions), n, a.d), a.stats)


def partial_trace(f: ManyBodyOperator, keep: int) -> ManyBodyOperator:
    """Partial trace over particles keep+1..n; preserves the total trace."""
    if not 0 <= keep <= f.n:
        raise DomainError(f"cannot keep {keep} of {f.n} particles")
    out = partial_trace_matrix(f.mat, keep, f.n, f.d)
    return ManyBodyOperator(keep, f.d, out, f.stats)


def permute_ket(p: Permutation, f: ManyBodyOperator) -> ManyBodyOperator:
    """Substitute row (ket-side) kernel arguments: out[q; q'] = f[q_pi; q'].

    Columns are untouched.  Satisfies permute_ket(pi, permute_ket(sigma, f))
    = permute_ket(pi o sigma, f).
    """
    if p.n != f.n:
        raise DomainError(f"permutation on {p.n} labels, operator has {f.n}")
    return f.with_mat(f.mat[_row_permutation_map(p.images, f.n, f.d), :])


def symmetrize(stats: Statistics, f: ManyBodyOperator) -> ManyBodyOperator:
    """Apply the ket-side group average for the given statistics; idempotent."""
    if f.n == 0:
        return f
    return f.with_mat(symmetrizer_matrix(stats, f.n, f.d) @ f.mat)


def trace_norm(f: ManyBodyOperator | np.ndarray) -> float:
    """Sum of singular values."""
    mat = f.mat if isinstance(f, ManyBodyOperator) else np.asarray(f)
    if mat.size == 1:
        return float(abs(mat.reshape(())))
    return float(np.linalg.svd(mat, compute_uv=False).sum())


def sequence_trace_norm(seq: OperatorSequence) -> float:
    """|f0| + sum_n ||f_n||_1."""
    return abs(seq.f0) + sum(trace_norm(op) for op in seq.components.values())


# --------------------------------------------------------------------------
# random state components (seeded test and scenario data)
# --------------------------------------------------------------------------

def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_state_component(
    rng: np.random.Generator,
    n: int,
    d: int,
    stats: Statistics,
    traceless: bool = False,
    positive: bool = False,
) -> ManyBodyOperator:
    """Random Hermitian component with the full exchange symmetry of a state.

    The raw matrix is compressed two-sidedly with the statistics projection
    (for BOLTZMANN: averaged over two-sided permutation conjugations), which
    yields both the kernel sign rule and permutation-conjugation invariance.
    With ``positive`` the result is M^dagger M based and positive
    semidefinite with unit trace; ``traceless`` removes the trace inside the
    symmetric subspace.
    """
    side = d**n
    raw = random_hermitian(rng, side)
    if positive:
        raw = raw @ raw.conj().T
    if stats is Statistics.BOLTZMANN:
        out = np.zeros_like(raw)
        for perm in all_permutations(n):
            pmat = np.zeros((side, side))
            pmat[np.arange(side), _row_permutation_map(perm.images, n, d)] = 1.0
            out += pmat @ raw @ pmat.T
        out /= math.factorial(n)
    else:
        sym = symmetrizer_matrix(stats, n, d)
        out = sym @ raw @ sym
    if positive:
        tr = np.trace(out).real
        if abs(tr) < 1e-14:
            raise DomainError(f"positive component vanished (stats={stats}, n={n}, d={d})")
        out = out / tr
    if traceless:
        if stats is Statistics.BOLTZMANN:
            out = out - (np.trace(out) / side) * np.eye(side)
        else:
            sym = symmetrizer_matrix(stats, n, d)
            tr_sym = np.trace(sym).real
            if tr_sym > 1e-14:
                out = out - (np.trace(out) / tr_sym) * sym
    return ManyBodyOperator(n, d, out, stats)


def random_sequence(
    rng: np.random.Generator,
    d: int,
    stats: Statistics,
    n_max: int,
    traceless: bool = False,
    positive: bool = False,
    f0: complex = 0j,
) -> OperatorSequence:
    comps = {
        n: random_state_component(rng, n, d, stats, traceless=traceless, positive=positive)
        for n in range(1, n_max + 1)
    }
    return OperatorSequence(d=d, stats=stats, n_max=n_max, f0=f0, components=comps)


# --------------------------------------------------------------------------
# serialization: text format, round-trip exact for doubles
# --------------------------------------------------------------------------

def _format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def write_operator(op: ManyBodyOperator, fh: IO[str]) -> None:
    """Write as a header line ``op n d stats`` plus d^n rows of entries."""
    fh.write(f"op {op.n} {op.d} {op.stats}\n")
    for row in np.atleast_2d(op.mat):
        fh.write(" ".join(_format_complex(z) for z in row) + "\n")


def read_operator(fh: IO[str]) -> ManyBodyOperator:
    header = _next_content_line(fh)
    parts = header.split()
    if len(parts) != 4 or parts[0] != "op":
        raise DomainError(f"bad operator header: {header!r}")
    n, d = int(parts[1]), int(parts[2])
    stats = Statistics(parts[3])
    side = d**n
    rows = []
    for _ in range(side):
        line = _next_content_line(fh)
        entries = [complex(tok) for tok in line.split()]
        if len(entries) != side:
            raise DomainError(f"expected {side} entries per row, got {len(entries)}")
        rows.append(entries)
    return ManyBodyOperator(n, d, np.array(rows, dtype=np.complex128), stats)


def write_sequence(seq: OperatorSequence, fh: IO[str]) -> None:
    fh.write(f"seq {seq.n_max} {seq.d} {seq.stats}\n")
    fh.write(f"f0 {_format_complex(seq.f0)}\n")
    for n in range(1, seq.n_max + 1):
        write_operator(seq.components[n], fh)


def read_sequence(fh: IO[str]) -> OperatorSequence:
    header = _next_content_line(fh)
    parts = header.split()
    if len(parts) != 4 or parts[0] != "seq":
        raise DomainError(f"bad sequence header: {header!r}")
    n_max, d = int(parts[1]), int(parts[2])
    stats = Statistics(parts[3])
    f0_line = _next_content_line(fh).split()
    if f0_line[0] != "f0":
        raise DomainError("sequence is missing its scalar component line")
    f0 = complex(f0_line[1])
    comps = {}
    for n in range(1, n_max + 1):
        op = read_operator(fh)
        if op.n != n:
            raise DomainError(f"component out of order: expected n={n}, got {op.n}")
        comps[n] = op
    return OperatorSequence(d=d, stats=stats, n_max=n_max, f0=f0, components=comps)


def _next_content_line(fh: IO[str]) -> str:
    for line in fh:
        stripped = line.strip()
        if stripped:
            return stripped
    raise DomainError("unexpected end of stream")

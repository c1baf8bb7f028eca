"""Exact arithmetic over F_p^n: vectors, symmetric matrices, group enumeration,
quadratic/bilinear evaluation, matrix rank, Gauss sums, and the group DFT.

All group elements are addressed by their little-endian base-p index,
idx = sum_i v_i * p**i (coordinate 0 varies fastest).  Every table in this
module is keyed by that fixed bijection.
"""

from __future__ import annotations

import math
import os

import numpy as np

DEFAULT_GROUP_BITS = 24
COMPLEX_TOL = 1e-9


class CapacityError(Exception):
    """Raised when an operation would exceed the enumeration cap."""


class ShapeError(Exception):
    """Raised on dimension mismatches between vectors/matrices and the group."""


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def group_bits_cap() -> int:
    """Enumeration cap (log2 of max group order), overridable via QFA_MAX_GROUP_BITS."""
    raw = os.environ.get("QFA_MAX_GROUP_BITS")
    if raw is None:
        return DEFAULT_GROUP_BITS
    return int(raw)


class GroupSpec:
    """The ambient group F_p^n for an odd prime p >= 3."""

    def __init__(self, p: int, n: int):
        if not is_prime(p) or p < 3:
            raise ValueError(f"p must be an odd prime >= 3, got {p}")
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        if n * math.log2(p) > group_bits_cap():
            raise CapacityError(
                f"group order p^n = {p}^{n} exceeds the enumeration cap "
                f"2^{group_bits_cap()}"
            )
        self.p = p
        self.n = n
        self.order = p**n
        self._powers = p ** np.arange(n, dtype=np.int64)
        self._digits = None
        self._sum_table = None

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and (self.p, self.n) == (other.p, other.n)

    def __hash__(self):
        return hash((self.p, self.n))

    def __repr__(self):
        return f"GroupSpec(p={self.p}, n={self.n})"

    @property
    def digits(self) -> np.ndarray:
        """(order, n) table: row i holds the coordinates of the vector with index i."""
        if self._digits is None:
            idx = np.arange(self.order, dtype=np.int64)
            cols = [(idx // self._powers[i]) % self.p for i in range(self.n)]
            self._digits = np.stack(cols, axis=1).astype(np.int8)
            self._digits.setflags(write=False)
        return self._digits

    def index_of(self, v) -> int:
        v = np.asarray(v, dtype=np.int64)
        if v.shape != (self.n,):
            raise ShapeError(f"expected a vector of length {self.n}, got shape {v.shape}")
        return int(np.dot(v % self.p, self._powers))

    def vector_of(self, index: int) -> np.ndarray:
        if not 0 <= index < self.order:
            raise IndexError(f"index {index} out of range for group of order {self.order}")
        return self.digits[index].astype(np.int64)

    def indices_of(self, vectors: np.ndarray) -> np.ndarray:
        """Vectorized index_of for an (m, n) array of coordinate rows."""
        vectors = np.asarray(vectors, dtype=np.int64) % self.p
        return vectors @ self._powers

    def add_perm(self, x_index: int) -> np.ndarray:
        """Permutation a with a[s] = index_of(x + vector_of(s))."""
        x = self.digits[x_index].astype(np.int64)
        return ((self.digits.astype(np.int64) + x) % self.p) @ self._powers

    def neg_perm(self) -> np.ndarray:
        """Permutation a with a[s] = index_of(-vector_of(s))."""
        return ((-self.digits.astype(np.int64)) % self.p) @ self._powers

    def sum_index(self, i: int, j: int) -> int:
        return self.index_of(self.digits[i].astype(np.int64) + self.digits[j])

    def sum_table(self) -> np.ndarray | None:
        """Cached (order, order) table of pairwise sum indices, or None when
        the group is too large for it to be worthwhile."""
        if self.order**2 > (1 << 23):
            return None
        if self._sum_table is None:
            d = self.digits.astype(np.int32)
            self._sum_table = (
                ((d[:, None, :] + d[None, :, :]) % self.p).astype(np.int64) @ self._powers
            ).astype(np.int32)
        return self._sum_table

    def basis_vector(self, i: int) -> np.ndarray:
        """Standard basis vector e_i, 1-based to match the usual coordinate naming."""
        if not 1 <= i <= self.n:
            raise IndexError(f"basis index {i} out of range 1..{self.n}")
        v = np.zeros(self.n, dtype=np.int64)
        v[i - 1] = 1
        return v


def index_of(v, spec: GroupSpec) -> int:
    return spec.index_of(v)


def vector_of(index: int, spec: GroupSpec) -> np.ndarray:
    return spec.vector_of(index)


def as_sym_matrix(entries, p: int) -> np.ndarray:
    """Validate and reduce a symmetric matrix mod p."""
    m = np.asarray(entries, dtype=np.int64) % p
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        raise ShapeError("matrix is not symmetric")
    return m


def quad_eval(M: np.ndarray, x, p: int) -> int:
    x = np.asarray(x, dtype=np.int64)
    M = np.asarray(M, dtype=np.int64)
    if M.shape != (x.size, x.size):
        raise ShapeError(f"matrix shape {M.shape} does not match vector length {x.size}")
    return int(x @ M @ x) % p


def bilin_eval(M: np.ndarray, x, y, p: int) -> int:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    M = np.asarray(M, dtype=np.int64)
    if M.shape != (x.size, x.size) or y.size != x.size:
        raise ShapeError("dimension mismatch in bilinear evaluation")
    return int(x @ M @ y) % p


def quad_values(M: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """x^T M x mod p for every x in the group, indexed little-endian."""
    X = spec.digits.astype(np.int64)
    M = np.asarray(M, dtype=np.int64)
    if M.shape != (spec.n, spec.n):
        raise ShapeError(f"matrix shape {M.shape} does not match dimension {spec.n}")
    return np.einsum("ij,jk,ik->i", X, M % spec.p, X) % spec.p


def linear_values(v, spec: GroupSpec) -> np.ndarray:
    """x . v mod p for every x in the group."""
    v = np.asarray(v, dtype=np.int64) % spec.p
    if v.shape != (spec.n,):
        raise ShapeError(f"vector shape {v.shape} does not match dimension {spec.n}")
    return (spec.digits.astype(np.int64) @ v) % spec.p


def matrix_rank(M: np.ndarray, p: int) -> int:
    """Rank over F_p by exact Gaussian elimination."""
    A = (np.asarray(M, dtype=np.int64) % p).copy()
    if A.size == 0:
        return 0
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if A[r, c] % p:
                pivot = r
                break
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        for r in range(rows):
            if r != rank and A[r, c]:
                A[r] = (A[r] - A[r, c] * A[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def nullspace_basis(rows, p: int, n: int) -> np.ndarray:
    """Basis (as rows) of {x in F_p^n : R x = 0} for the given row vectors."""
    rows = [np.asarray(r, dtype=np.int64) % p for r in rows if np.asarray(r).size]
    if not rows:
        return np.eye(n, dtype=np.int64)
    A = np.stack(rows) % p
    m = A.shape[0]
    A = A.copy()
    pivots = []
    r = 0
    for c in range(n):
        pivot = None
        for rr in range(r, m):
            if A[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = (A[r] * inv) % p
        for rr in range(m):
            if rr != r and A[rr, c]:
                A[rr] = (A[rr] - A[rr, c] * A[r]) % p
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = np.zeros(n, dtype=np.int64)
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-A[i, fc]) % p
        basis.append(v)
    if not basis:
        return np.zeros((0, n), dtype=np.int64)
    return np.stack(basis)


def gauss_sum(M: np.ndarray, b, spec: GroupSpec) -> complex:
    """E_x omega^(x^T M x + b^T x) with omega = exp(2*pi*i/p).

    |result| <= p^(-rank(M)/2) up to floating error (classical estimate).
    """
    vals = (quad_values(M, spec) + linear_values(b, spec)) % spec.p
    counts = np.bincount(vals, minlength=spec.p).astype(np.float64)
    roots = np.exp(2j * np.pi * np.arange(spec.p) / spec.p)
    return complex(np.dot(counts, roots) / spec.order)


def dft(f: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """hat f(t) = E_x f(x) omega^(-x.t), as a flat array over character indices.

    Computed as n successive length-p transforms (one per coordinate axis).
    """
    f = np.asarray(f)
    if f.shape != (spec.order,):
        raise ShapeError(f"expected a function table of length {spec.order}")
    cube = f.reshape((spec.p,) * spec.n)
    out = np.fft.fftn(cube) / spec.order
    return out.reshape(spec.order)


def idft(fhat: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Inverse of dft: f(x) = sum_t hat f(t) omega^(x.t)."""
    fhat = np.asarray(fhat)
    if fhat.shape != (spec.order,):
        raise ShapeError(f"expected a table of length {spec.order}")
    cube = fhat.reshape((spec.p,) * spec.n)
    out = np.fft.ifftn(cube) * spec.order
    return out.reshape(spec.order)


class GroupSubset:
    """Dense indicator of a subset of F_p^n (bit i set iff the vector with
    index i is a member)."""

    def __init__(self, spec: GroupSpec, indicator=None):
        self.spec = spec
        if indicator is None:
            self.indicator = np.zeros(spec.order, dtype=bool)
        else:
            ind = np.asarray(indicator, dtype=bool)
            if ind.shape != (spec.order,):
                raise ShapeError(
                    f"indicator length {ind.shape} does not match group order {spec.order}"
                )
            self.indicator = ind.copy()

    @classmethod
    def from_indices(cls, spec: GroupSpec, indices) -> "GroupSubset":
        s = cls(spec)
        s.indicator[np.asarray(list(indices), dtype=np.int64)] = True
        return s

    @classmethod
    def from_members(cls, spec: GroupSpec, members) -> "GroupSubset":
        return cls.from_indices(spec, [spec.index_of(v) for v in members])

    @classmethod
    def full(cls, spec: GroupSpec) -> "GroupSubset":
        return cls(spec, np.ones(spec.order, dtype=bool))

    def __len__(self):
        return int(self.indicator.sum())

    def __contains__(self, v) -> bool:
        return bool(self.indicator[self.spec.index_of(v)])

    def contains_index(self, i: int) -> bool:
        return bool(self.indicator[i])

    def density(self) -> float:
        return len(self) / self.spec.order

    def complement(self) -> "GroupSubset":
        return GroupSubset(self.spec, ~self.indicator)

    def intersect(self, other: "GroupSubset") -> "GroupSubset":
        return GroupSubset(self.spec, self.indicator & other.indicator)

    def union(self, other: "GroupSubset") -> "GroupSubset":
        return GroupSubset(self.spec, self.indicator | other.indicator)

    def translate(self, v) -> "GroupSubset":
        """The translate A + v = {a + v : a in A}."""
        perm = self.spec.add_perm(self.spec.index_of(np.asarray(v) % self.spec.p))
        out = np.zeros(self.spec.order, dtype=bool)
        out[perm] = self.indicator
        return GroupSubset(self.spec, out)

    def shifted_lookup(self, v) -> np.ndarray:
        """Array L with L[s] = indicator[s + v]; equals the indicator of A - v."""
        perm = self.spec.add_perm(self.spec.index_of(np.asarray(v) % self.spec.p))
        return self.indicator[perm]

    def indices(self) -> np.ndarray:
        return np.nonzero(self.indicator)[0]

    def members(self) -> np.ndarray:
        return self.spec.digits[self.indicator].astype(np.int64)

    def __eq__(self, other):
        return (
            isinstance(other, GroupSubset)
            and self.spec == other.spec
            and np.array_equal(self.indicator, other.indicator)
        )

    def __repr__(self):
        return f"GroupSubset(p={self.spec.p}, n={self.spec.n}, size={len(self)})"


def write_subset(subset: GroupSubset, path: str) -> None:
    """File format: first line "p n", then one member per line as n base-p
    digits, most significant last (matching the little-endian index)."""
    spec = subset.spec
    with open(path, "w") as fh:
        fh.write(f"{spec.p} {spec.n}\n")
        for row in subset.members():
            fh.write("".join(str(int(d)) for d in row) + "\n")


def read_subset(path: str) -> GroupSubset:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected header 'p n'")
        p, n = int(header[0]), int(header[1])
        spec = GroupSpec(p, n)
        indices = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if len(line) != n or any(ch not in "0123456789" for ch in line):
                raise ValueError(f"{path}:{lineno}: expected {n} base-{p} digits")
            digits = [int(ch) for ch in line]
            if any(d >= p for d in digits):
                raise ValueError(f"{path}:{lineno}: digit out of range for base {p}")
            indices.append(spec.index_of(np.array(digits)))
    return GroupSubset.from_indices(spec, indices)


def write_matrix(M: np.ndarray, path: str) -> None:
    M = np.asarray(M, dtype=np.int64)
    with open(path, "w") as fh:
        for row in M:
            fh.write("".join(str(int(v)) for v in row) + "\n")


def read_matrix(path: str, p: int) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([int(ch) for ch in line])
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected an n x n digit grid")
    return as_sym_matrix(np.array(rows), p)

"""Linear, quadratic, and general quadratic factors: atoms and label
arithmetic, factor rank, refinement, and the constructive rank-repair,
padding, and pullback procedures.

A label (a-bar; b-bar) is addressed inside the label space F_p^(l+q) using the
same little-endian convention as group elements, with the linear coordinates
first.  Labels carry one entry per *stored* constraint; the complexity of the
linear part is the dimension of its span (duplicates are permitted in storage).
"""

from __future__ import annotations

import math
import re
import numpy as np

from .core import (
    CapacityError,
    GroupSpec,
    GroupSubset,
    ShapeError,
    as_sym_matrix,
    linear_values,
    matrix_rank,
    quad_values,
)

FACTOR_RANK_Q_CAP = 8


class RankFunction:
    """A named strictly increasing map N -> positive reals, e.g. "2*x" or "x**2"."""

    _ALLOWED = re.compile(r"^[0-9x+\-*/(). ]+$")

    def __init__(self, formula: str):
        formula = formula.strip().replace("^", "**")
        if not self._ALLOWED.match(formula):
            raise ValueError(f"unsupported rank-function formula: {formula!r}")
        self.formula = formula
        self._fn = lambda x: eval(formula, {"__builtins__": {}}, {"x": x})
        probe = [self._fn(i) for i in range(0, 33)]
        if any(b <= a for a, b in zip(probe, probe[1:])):
            raise ValueError(f"rank function {formula!r} is not strictly increasing")

    def __call__(self, x):
        return self._fn(x)

    def __repr__(self):
        return f"RankFunction({self.formula!r})"


class AtomLabel:
    """The pair (a-bar; b-bar) naming an atom B(a-bar; b-bar)."""

    def __init__(self, linear_part, quadratic_part):
        self.linear_part = tuple(int(v) for v in linear_part)
        self.quadratic_part = tuple(int(v) for v in quadratic_part)

    def __eq__(self, other):
        return (
            isinstance(other, AtomLabel)
            and self.linear_part == other.linear_part
            and self.quadratic_part == other.quadratic_part
        )

    def __hash__(self):
        return hash((self.linear_part, self.quadratic_part))

    def __repr__(self):
        return f"AtomLabel({self.linear_part}, {self.quadratic_part})"

    def combined(self) -> tuple:
        return self.linear_part + self.quadratic_part

    def index(self, p: int) -> int:
        idx = 0
        for d in reversed(self.combined()):
            idx = idx * p + d
        return idx

    @classmethod
    def from_index(cls, index: int, p: int, ell: int, q: int) -> "AtomLabel":
        digits = []
        for _ in range(ell + q):
            digits.append(index % p)
            index //= p
        return cls(digits[:ell], digits[ell:])


class LinearFactor:
    """An ordered list of vectors in F_p^n; atoms are the joint level sets."""

    def __init__(self, spec: GroupSpec, vectors=()):
        self.spec = spec
        self.vectors = [np.asarray(v, dtype=np.int64) % spec.p for v in vectors]
        for v in self.vectors:
            if v.shape != (spec.n,):
                raise ShapeError(f"linear-factor vector has shape {v.shape}, expected ({spec.n},)")

    @property
    def ell(self) -> int:
        return len(self.vectors)

    @property
    def complexity(self) -> int:
        if not self.vectors:
            return 0
        return matrix_rank(np.stack(self.vectors), self.spec.p)

    def label_columns(self) -> np.ndarray:
        """(order, ell) array of x.v_j values over the whole group."""
        if not self.vectors:
            return np.zeros((self.spec.order, 0), dtype=np.int64)
        return np.stack([linear_values(v, self.spec) for v in self.vectors], axis=1)

    def zero_atom(self) -> GroupSubset:
        cols = self.label_columns()
        return GroupSubset(self.spec, (cols == 0).all(axis=1))


class QuadraticFactor:
    """A pair (L, Q): a linear factor plus symmetric matrices M_1..M_q."""

    def __init__(self, spec: GroupSpec, linear, matrices=()):
        self.spec = spec
        if isinstance(linear, LinearFactor):
            self.linear = linear
        else:
            self.linear = LinearFactor(spec, linear)
        self.matrices = [as_sym_matrix(M, spec.p) for M in matrices]
        for M in self.matrices:
            if M.shape != (spec.n, spec.n):
                raise ShapeError(f"matrix shape {M.shape} does not match dimension {spec.n}")

    @property
    def ell(self) -> int:
        return self.linear.ell

    @property
    def q(self) -> int:
        return len(self.matrices)

    @property
    def complexity(self) -> tuple:
        return (self.linear.complexity, self.q)

    def is_trivial(self) -> bool:
        return self.ell == 0 and self.q == 0

    def quad_columns(self) -> np.ndarray:
        if not self.matrices:
            return np.zeros((self.spec.order, 0), dtype=np.int64)
        return np.stack([quad_values(M, self.spec) for M in self.matrices], axis=1)

    def label_matrix(self) -> np.ndarray:
        """(order, ell+q) label coordinates of every group element."""
        return np.concatenate([self.linear.label_columns(), self.quad_columns()], axis=1)


class GeneralQuadraticFactor:
    """Like a quadratic factor, but quadratic constraints carry linear shifts:
    x^T M_i x + x.u_i = s_i."""

    def __init__(self, spec: GroupSpec, linear, pairs=()):
        self.spec = spec
        if isinstance(linear, LinearFactor):
            self.linear = linear
        else:
            self.linear = LinearFactor(spec, linear)
        self.pairs = [
            (as_sym_matrix(M, spec.p), np.asarray(u, dtype=np.int64) % spec.p) for M, u in pairs
        ]

    @property
    def ell(self) -> int:
        return self.linear.ell

    @property
    def q(self) -> int:
        return len(self.pairs)

    @property
    def complexity(self) -> tuple:
        return (self.linear.complexity, self.q)

    def is_purely_linear(self) -> bool:
        return self.q == 0

    def quad_columns(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros((self.spec.order, 0), dtype=np.int64)
        cols = [
            (quad_values(M, self.spec) + linear_values(u, self.spec)) % self.spec.p
            for M, u in self.pairs
        ]
        return np.stack(cols, axis=1)

    def label_matrix(self) -> np.ndarray:
        return np.concatenate([self.linear.label_columns(), self.quad_columns()], axis=1)


def _coerce_factor(B):
    if isinstance(B, LinearFactor):
        return B.spec, B.label_columns(), B.ell, 0
    if isinstance(B, (QuadraticFactor, GeneralQuadraticFactor)):
        return B.spec, B.label_matrix(), B.ell, B.q
    raise TypeError(f"not a factor: {type(B)!r}")


def label_index_table(B) -> np.ndarray:
    """Combined little-endian label index of every group element."""
    spec, cols, ell, q = _coerce_factor(B)
    if cols.shape[1] == 0:
        return np.zeros(spec.order, dtype=np.int64)
    powers = spec.p ** np.arange(cols.shape[1], dtype=np.int64)
    return cols @ powers


def atom_label(x, B) -> AtomLabel:
    spec, _, ell, q = _coerce_factor(B)
    x = np.asarray(x, dtype=np.int64)
    lin = [int(np.dot(x, v)) % spec.p for v in B.linear.vectors] if ell else []
    quad = []
    if isinstance(B, QuadraticFactor):
        quad = [int(x @ M @ x) % spec.p for M in B.matrices]
    elif isinstance(B, GeneralQuadraticFactor):
        quad = [(int(x @ M @ x) + int(np.dot(x, u))) % spec.p for M, u in B.pairs]
    return AtomLabel(lin, quad)


def atom_members(B, label: AtomLabel) -> GroupSubset:
    spec, cols, ell, q = _coerce_factor(B)
    want = np.array(label.combined(), dtype=np.int64)
    if want.size != cols.shape[1]:
        raise ShapeError("label length does not match the factor")
    mask = (cols == want).all(axis=1)
    return GroupSubset(spec, mask)


def atom_sizes(B) -> dict:
    """Map from AtomLabel to atom size, over nonempty atoms only."""
    spec, cols, ell, q = _coerce_factor(B)
    table = label_index_table(B)
    sizes = np.bincount(table, minlength=1)
    out = {}
    for idx in np.nonzero(sizes)[0]:
        out[AtomLabel.from_index(int(idx), spec.p, ell, q)] = int(sizes[idx])
    return out


def _nontrivial_combos(q: int, p: int):
    """Coefficient tuples with first nonzero entry 1 (one per scalar class)."""
    lam = np.zeros(q, dtype=np.int64)
    for lead in range(q):
        lam[:] = 0
        lam[lead] = 1
        tail = q - lead - 1
        for rest in range(p**tail):
            r = rest
            for j in range(tail):
                lam[lead + 1 + j] = r % p
                r //= p
            yield lam.copy()


def factor_rank(B) -> float:
    """Minimum F_p-rank over nontrivial combinations of the factor's matrices;
    infinity when there are none."""
    if isinstance(B, LinearFactor):
        return math.inf
    if isinstance(B, GeneralQuadraticFactor):
        mats = [M for M, _ in B.pairs]
        spec = B.spec
    else:
        mats = B.matrices
        spec = B.spec
    return matrix_family_rank(mats, spec.p)


def matrix_family_rank(mats, p: int) -> float:
    q = len(mats)
    if q == 0:
        return math.inf
    if q > FACTOR_RANK_Q_CAP:
        raise CapacityError(f"factor rank search capped at q <= {FACTOR_RANK_Q_CAP}, got {q}")
    stack = np.stack([np.asarray(M, dtype=np.int64) % p for M in mats])
    best = math.inf
    for lam in _nontrivial_combos(q, p):
        combo = np.tensordot(lam, stack, axes=1) % p
        best = min(best, matrix_rank(combo, p))
        if best == 0:
            break
    return best


def refines(B1, B2) -> bool:
    """True iff the atom partition of B1 refines that of B2 (decided by
    checking that elements sharing a B1 label share their B2 label)."""
    spec1, _, _, _ = _coerce_factor(B1)
    spec2, _, _, _ = _coerce_factor(B2)
    if spec1 != spec2:
        raise ShapeError("factors live on different groups")
    t1 = label_index_table(B1)
    t2 = label_index_table(B2)
    order = np.argsort(t1, kind="stable")
    s1, s2 = t1[order], t2[order]
    same_block = s1[1:] == s1[:-1]
    return bool(np.all(s2[1:][same_block] == s2[:-1][same_block]))


def _row_space_basis(M: np.ndarray, p: int) -> list:
    """Basis of the row space of M over F_p (nonzero rows after elimination)."""
    A = (np.asarray(M, dtype=np.int64) % p).copy()
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if A[r, c]:
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
    return [A[i].copy() for i in range(rank)]


def make_high_rank(B: QuadraticFactor, r: RankFunction, C: int) -> QuadraticFactor:
    """Repair a factor to rank at least r(final complexity).

    Whenever a nontrivial combination of the current matrices has rank below
    the target, the matrix with the largest index in that combination is
    dropped, and a spanning set of the low-rank combination's row space is
    added to the linear part; this keeps the new atoms a refinement of the old
    ones (the dropped quadratic value becomes label-measurable).
    """
    spec = B.spec
    ell0, q0 = B.complexity
    if ell0 + q0 > C:
        raise ValueError(f"complexity {ell0 + q0} exceeds the bound C={C}")
    lin = list(B.linear.vectors)
    mats = list(B.matrices)
    while True:
        lf = LinearFactor(spec, lin)
        c = lf.complexity + len(mats)
        if not mats:
            break
        target = r(c)
        worst_rank, worst_lam = math.inf, None
        for lam in _nontrivial_combos(len(mats), spec.p):
            combo = np.tensordot(lam, np.stack(mats), axes=1) % spec.p
            rk = matrix_rank(combo, spec.p)
            if rk < worst_rank:
                worst_rank, worst_lam = rk, lam
                if rk == 0:
                    break
        if worst_rank >= target:
            break
        combo = np.tensordot(worst_lam, np.stack(mats), axes=1) % spec.p
        drop = max(j for j in range(len(mats)) if worst_lam[j] != 0)
        del mats[drop]
        lin.extend(_row_space_basis(combo, spec.p))
    return QuadraticFactor(spec, LinearFactor(spec, lin), mats)


def pad_with_high_rank(Q: QuadraticFactor, S, q_extra: int):
    """Extend Q's quadratic part by q_extra matrices from the family S while
    preserving factor rank; returns the extended factor, or None when the
    exhaustive (greedy + backtracking) search finds no valid extension."""
    spec = Q.spec
    mats_S = [as_sym_matrix(M, spec.p) for M in S]
    if matrix_family_rank(mats_S, spec.p) != spec.n:
        raise ValueError("padding family does not have full factor rank n")
    if q_extra == 0:
        return Q
    base = list(Q.matrices)
    base_rank = matrix_family_rank(base, spec.p) if base else math.inf
    target = min(base_rank, spec.n)

    def feasible(chosen):
        return matrix_family_rank(base + [mats_S[i] for i in chosen], spec.p) >= target

    def search(start, chosen):
        if len(chosen) == q_extra:
            return list(chosen)
        for i in range(start, len(mats_S)):
            chosen.append(i)
            if feasible(chosen):
                got = search(i + 1, chosen)
                if got is not None:
                    return got
            chosen.pop()
        return None

    picked = search(0, [])
    if picked is None:
        return None
    return QuadraticFactor(spec, Q.linear, base + [mats_S[i] for i in picked])


def pullback_partition(B, R: LinearFactor) -> np.ndarray:
    """Partition table of X_R: for each x, the little-endian index of the
    R-label of x's B-label."""
    spec, cols, ell, q = _coerce_factor(B)
    if R.spec.n != ell + q:
        raise ShapeError(
            f"pullback factor lives on F_p^{R.spec.n}, expected label space of dim {ell + q}"
        )
    out = np.zeros(spec.order, dtype=np.int64)
    mult = 1
    for rv in R.vectors:
        out += mult * ((cols @ rv) % spec.p)
        mult *= spec.p
    return out


def pullback_factor(B: QuadraticFactor, R: LinearFactor, verify: bool = True):
    """Turn a linear factor R on B's label space into a general quadratic
    factor B' on the group with At(B') = X_R.

    The construction assembles t_alpha / M_alpha from R's coefficients and
    runs the iterative reduction: any low-rank combination of the assembled
    matrices must vanish identically (B's own rank forces all coefficients to
    zero), so the corresponding constraint is replaced by a linear one.
    """
    spec = B.spec
    ell, q = B.ell, B.q
    if R.spec.n != ell + q or R.spec.p != spec.p:
        raise ShapeError("R must live on the label space F_p^(ell+q)")
    rho = factor_rank(B)
    p = spec.p

    pairs = []
    for rv in R.vectors:
        t = np.zeros(spec.n, dtype=np.int64)
        for i in range(ell):
            t = (t + int(rv[i]) * B.linear.vectors[i]) % p
        M = np.zeros((spec.n, spec.n), dtype=np.int64)
        for j in range(q):
            M = (M + int(rv[ell + j]) * B.matrices[j]) % p
        pairs.append((M, t))

    lin_extra = []
    while pairs:
        mats = [M for M, _ in pairs]
        if all(not M.any() for M in mats):
            lin_extra.extend(t for _, t in pairs)
            pairs = []
            break
        if math.isfinite(rho):
            worst_rank, worst_lam = math.inf, None
            for lam in _nontrivial_combos(len(pairs), p):
                combo = np.tensordot(lam, np.stack(mats), axes=1) % p
                rk = matrix_rank(combo, p)
                if rk < worst_rank:
                    worst_rank, worst_lam = rk, lam
                    if rk == 0:
                        break
            if worst_rank >= rho:
                break
            combo = np.tensordot(worst_lam, np.stack(mats), axes=1) % p
            if combo.any():
                raise AssertionError(
                    "low-rank combination did not vanish; factor rank was misreported"
                )
            lam = worst_lam
        else:
            lam = None
        if lam is None:
            break
        i = min(j for j in range(len(pairs)) if lam[j])
        inv = pow(int(lam[i]), p - 2, p)
        w = pairs[i][1].copy()
        for a in range(len(pairs)):
            if a != i and lam[a]:
                w = (w + inv * int(lam[a]) * pairs[a][1]) % p
        lin_extra.append(w)
        del pairs[i]

    out = GeneralQuadraticFactor(spec, LinearFactor(spec, lin_extra), pairs)
    if verify:
        want = pullback_partition(B, R)
        got = label_index_table(out)
        if not _same_partition(want, got):
            raise AssertionError("pullback factor does not induce the partition X_R")
    return out


def _same_partition(t1: np.ndarray, t2: np.ndarray) -> bool:
    order = np.argsort(t1, kind="stable")
    s1, s2 = t1[order], t2[order]
    same = s1[1:] == s1[:-1]
    if not np.all(s2[1:][same] == s2[:-1][same]):
        return False
    order = np.argsort(t2, kind="stable")
    s1, s2 = t1[order], t2[order]
    same = s2[1:] == s2[:-1]
    return bool(np.all(s1[1:][same] == s1[:-1][same]))


def same_partition(B1, B2) -> bool:
    """True iff two factors induce the same partition of the group."""
    return _same_partition(label_index_table(B1), label_index_table(B2))


def write_factor(B, path: str) -> None:
    """Format: "p n ell q", then ell vector lines, then q matrices of n rows
    each; general factors append q shift-vector lines."""
    spec = B.spec
    is_general = isinstance(B, GeneralQuadraticFactor)
    if isinstance(B, LinearFactor):
        B = QuadraticFactor(spec, B, [])
    with open(path, "w") as fh:
        fh.write(f"{spec.p} {spec.n} {B.ell} {B.q}\n")
        for v in B.linear.vectors:
            fh.write("".join(str(int(d)) for d in v) + "\n")
        mats = [M for M, _ in B.pairs] if is_general else B.matrices
        for M in mats:
            for row in M:
                fh.write("".join(str(int(d)) for d in row) + "\n")
        if is_general:
            for _, u in B.pairs:
                fh.write("".join(str(int(d)) for d in u) + "\n")


def read_factor(path: str):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    p, n, ell, q = (int(t) for t in lines[0].split())
    spec = GroupSpec(p, n)
    pos = 1

    def take_vector():
        nonlocal pos
        row = [int(ch) for ch in lines[pos]]
        if len(row) != n:
            raise ValueError(f"{path}: expected {n} digits at line {pos + 1}")
        pos += 1
        return np.array(row, dtype=np.int64)

    vecs = [take_vector() for _ in range(ell)]
    mats = [np.stack([take_vector() for _ in range(n)]) for _ in range(q)]
    if pos < len(lines):
        shifts = [take_vector() for _ in range(q)]
        return GeneralQuadraticFactor(spec, LinearFactor(spec, vecs), list(zip(mats, shifts)))
    return QuadraticFactor(spec, LinearFactor(spec, vecs), mats)

"""Uniformity norms, quasirandomness measures, sum graphs, bilinear-form
graphs and triads, sum-label arithmetic, reduced pairs, density transfer,
octahedron counts, and decomposition checking.

Densities are kept as exact integer ratios until a report is produced; the
fast deviation computations are quadratic/cubic contractions whose equality
with the naive multi-fold sums is covered by oracle tests.
"""

from __future__ import annotations

import numpy as np

from .core import GroupSpec, GroupSubset, ShapeError, dft
from .factors import AtomLabel, atom_members, label_index_table


class MeasureReport:
    """A named quantity with its bound and pass/fail status."""

    def __init__(self, name, measured, bound, bound_formula="", tolerance=0.0, extras=None):
        self.name = name
        self.measured = float(measured)
        self.bound = float(bound)
        self.bound_formula = bound_formula or str(bound)
        self.status = "PASS" if self.measured <= self.bound + tolerance else "FAIL"
        self.extras = extras or {}

    def __repr__(self):
        return f"MeasureReport({self.name}: {self.measured:.6g} vs {self.bound:.6g} -> {self.status})"

    def to_jsonable(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "bound_formula": self.bound_formula,
            "status": self.status,
            "extras": self.extras,
        }


# --- Gowers norms ---


def u2_norm(f, spec: GroupSpec) -> float:
    """U^2 norm via the correlation form E_h |E_x f(x) conj f(x+h)|^2,
    computed directly (no Fourier identity)."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (spec.order,):
        raise ShapeError("function table length mismatch")
    N = spec.order
    table = spec.sum_table()
    if table is not None:
        g = (f[None, :] * np.conj(f[table])).mean(axis=1)
        return float(((np.abs(g) ** 2).mean()) ** 0.25)
    digits = spec.digits.astype(np.int64)
    total = 0.0
    block = max(1, (1 << 21) // N)
    for start in range(0, N, block):
        hs = digits[start : start + block]
        idx = ((hs[:, None, :] + digits[None, :, :]) % spec.p) @ spec._powers
        g = (f[None, :] * np.conj(f[idx])).mean(axis=1)
        total += float((np.abs(g) ** 2).sum())
    return float((total / N) ** 0.25)


def u2_norm_fourier(f, spec: GroupSpec) -> float:
    """U^2 norm via the fourth moment of the Fourier transform."""
    fhat = dft(np.asarray(f, dtype=complex), spec)
    return float((np.abs(fhat) ** 4).sum() ** 0.25)


def u3_norm(f, spec: GroupSpec) -> float:
    """U^3 norm as E_c of the fourth U^2 power of the multiplicative
    derivative, each inner norm via the Fourier identity."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (spec.order,):
        raise ShapeError("function table length mismatch")
    N = spec.order
    shape = (spec.p,) * spec.n
    total = 0.0
    block = max(1, (1 << 22) // N)
    digits = spec.digits.astype(np.int64)
    for start in range(0, N, block):
        cs = digits[start : start + block]
        idx = ((digits[None, :, :] + cs[:, None, :]) % spec.p) @ spec._powers
        delta = f[None, :] * np.conj(f[idx])
        hat = np.fft.fftn(delta.reshape((-1,) + shape), axes=tuple(range(1, spec.n + 1))) / N
        total += float((np.abs(hat) ** 4).sum())
    return float((total / N) ** 0.125)


def u3_norm_naive(f, spec: GroupSpec) -> float:
    """Direct eight-fold summation oracle (small groups only)."""
    f = np.asarray(f, dtype=complex)
    N = spec.order
    if N > 100:
        raise MemoryError("naive U^3 oracle limited to tiny groups")
    tab = np.zeros((N, N), dtype=np.int64)
    for i in range(N):
        tab[i] = spec.add_perm(i)
    total = 0.0 + 0.0j
    for x in range(N):
        for a in range(N):
            xa = tab[x, a]
            for b in range(N):
                xb, xab = tab[x, b], tab[xa, b]
                inner = 0.0 + 0.0j
                for c in range(N):
                    inner += (
                        f[x]
                        * np.conj(f[xa])
                        * np.conj(f[xb])
                        * np.conj(f[tab[x, c]])
                        * f[xab]
                        * f[tab[xa, c]]
                        * f[tab[xb, c]]
                        * np.conj(f[tab[xab, c]])
                    )
                total += inner
    return float(abs(total / N**4) ** 0.125)


def gowers_inner(fs, spec: GroupSpec) -> complex:
    """Gowers inner product of eight functions indexed by {0,1}^3 in the
    order (000, 100, 010, 001, 110, 101, 011, 111)."""
    if len(fs) != 8:
        raise ValueError("need eight functions")
    key = {
        (0, 0, 0): 0, (1, 0, 0): 1, (0, 1, 0): 2, (0, 0, 1): 3,
        (1, 1, 0): 4, (1, 0, 1): 5, (0, 1, 1): 6, (1, 1, 1): 7,
    }
    f = [np.asarray(t, dtype=complex) for t in fs]
    N = spec.order
    shape = (spec.p,) * spec.n
    total = 0.0 + 0.0j
    for c in range(N):
        perm = spec.add_perm(c)
        h = {}
        for e1 in (0, 1):
            for e2 in (0, 1):
                h[(e1, e2)] = f[key[(e1, e2, 0)]] * np.conj(f[key[(e1, e2, 1)]][perm])
        hat = {
            k: np.fft.fftn(v.reshape(shape)).reshape(N) / N for k, v in h.items()
        }
        total += (
            hat[(0, 0)] * np.conj(hat[(1, 0)]) * np.conj(hat[(0, 1)]) * hat[(1, 1)]
        ).sum()
    return complex(total / N)


# --- sum graphs ---


class SumGraph2:
    """Bipartite edge oracle: (x, y) is an edge iff x + y in A."""

    def __init__(self, A: GroupSubset):
        self.A = A
        self.spec = A.spec

    def has_edge(self, x_index: int, y_index: int) -> bool:
        return self.A.contains_index(self.spec.sum_index(x_index, y_index))

    def matrix(self, X_idx, Y_idx) -> np.ndarray:
        """Dense edge matrix over index lists X, Y."""
        spec = self.spec
        dX = spec.digits[np.asarray(X_idx)].astype(np.int64)
        dY = spec.digits[np.asarray(Y_idx)].astype(np.int64)
        out = np.zeros((len(dX), len(dY)), dtype=bool)
        block = max(1, (1 << 22) // max(1, len(dY)))
        for s in range(0, len(dX), block):
            idx = ((dX[s : s + block, None, :] + dY[None, :, :]) % spec.p) @ spec._powers
            out[s : s + block] = self.A.indicator[idx]
        return out


class SumGraph3:
    """Ternary oracle: (x, y, z) is an edge iff x + y + z in A."""

    def __init__(self, A: GroupSubset):
        self.A = A
        self.spec = A.spec

    def has_edge(self, x_index: int, y_index: int, z_index: int) -> bool:
        s = self.spec.sum_index(self.spec.sum_index(x_index, y_index), z_index)
        return self.A.contains_index(s)

    def slab(self, X_idx, Y_idx, z_index: int) -> np.ndarray:
        """Edge matrix over X x Y for a fixed third coordinate."""
        shifted = GroupSubset(self.spec, self.A.indicator[self.spec.add_perm(z_index)])
        return SumGraph2(shifted).matrix(X_idx, Y_idx)


def sum_graph2(A: GroupSubset) -> SumGraph2:
    return SumGraph2(A)


def sum_graph3(A: GroupSubset) -> SumGraph3:
    return SumGraph3(A)


# --- triads ---


class TriadDescriptor:
    """Label data for a triad (ternary) or bipartite (binary) configuration
    of atoms and bilinear-form graphs of a quadratic factor."""

    def __init__(self, factor, a_parts, b_parts, b_cross):
        self.factor = factor
        self.kind = 3 if len(a_parts) == 3 else 2
        if len(a_parts) not in (2, 3):
            raise ValueError("descriptor needs two or three atoms")
        ell, q = factor.ell, factor.q
        self.a_parts = [np.asarray(a, dtype=np.int64) % factor.spec.p for a in a_parts]
        self.b_parts = [np.asarray(b, dtype=np.int64) % factor.spec.p for b in b_parts]
        self.b_cross = [np.asarray(b, dtype=np.int64) % factor.spec.p for b in b_cross]
        for a in self.a_parts:
            if a.shape != (ell,):
                raise ShapeError("linear label length mismatch")
        for b in self.b_parts + self.b_cross:
            if b.shape != (q,):
                raise ShapeError("quadratic label length mismatch")
        want_cross = 3 if self.kind == 3 else 1
        if len(self.b_parts) != self.kind or len(self.b_cross) != want_cross:
            raise ShapeError("descriptor component count mismatch")

    @classmethod
    def from_flat(cls, factor, flat):
        """Ternary layout (a1 b1, a2 b2, a3 b3, b12, b13, b23) or binary
        (a1 b1, a2 b2, b12)."""
        flat = np.asarray(flat, dtype=np.int64)
        ell, q = factor.ell, factor.q
        if flat.size == 3 * ell + 6 * q:
            pos = 0
            a_parts, b_parts = [], []
            for _ in range(3):
                a_parts.append(flat[pos : pos + ell]); pos += ell
                b_parts.append(flat[pos : pos + q]); pos += q
            cross = [flat[pos + i * q : pos + (i + 1) * q] for i in range(3)]
            return cls(factor, a_parts, b_parts, cross)
        if flat.size == 2 * ell + 3 * q:
            pos = 0
            a_parts, b_parts = [], []
            for _ in range(2):
                a_parts.append(flat[pos : pos + ell]); pos += ell
                b_parts.append(flat[pos : pos + q]); pos += q
            cross = [flat[pos : pos + q]]
            return cls(factor, a_parts, b_parts, cross)
        raise ShapeError("flat descriptor has the wrong length")

    def atom_labels(self):
        return [
            AtomLabel(a, b) for a, b in zip(self.a_parts, self.b_parts)
        ]

    def atoms(self):
        return [atom_members(self.factor, lab) for lab in self.atom_labels()]


def sigma(d: TriadDescriptor) -> AtomLabel:
    """The label of the atom containing all sums across the configuration:
    linear parts add; quadratic parts add with the cross terms doubled."""
    p = d.factor.spec.p
    lin = np.zeros(d.factor.ell, dtype=np.int64)
    for a in d.a_parts:
        lin = (lin + a) % p
    quad = np.zeros(d.factor.q, dtype=np.int64)
    for b in d.b_parts:
        quad = (quad + b) % p
    for b in d.b_cross:
        quad = (quad + 2 * b) % p
    return AtomLabel(lin, quad)


def _bilin_matrix(factor, X_idx, Y_idx) -> np.ndarray:
    """(q, |X|, |Y|) stack of bilinear values x^T M y over the parts."""
    spec = factor.spec
    dX = spec.digits[np.asarray(X_idx)].astype(np.int64)
    dY = spec.digits[np.asarray(Y_idx)].astype(np.int64)
    vals = []
    for M in factor.matrices:
        vals.append(((dX @ (M % spec.p)) @ dY.T) % spec.p)
    return np.stack(vals) if vals else np.zeros((0, len(dX), len(dY)), dtype=np.int64)


def beta_graph(factor, X_idx, Y_idx, b_label) -> np.ndarray:
    """Edge matrix of the bilinear-form graph: (x, y) with x^T M_i y = b_i."""
    vals = _bilin_matrix(factor, X_idx, Y_idx)
    b_label = np.asarray(b_label, dtype=np.int64) % factor.spec.p
    out = np.ones((len(X_idx), len(Y_idx)), dtype=bool)
    for i in range(factor.q):
        out &= vals[i] == b_label[i]
    return out


def triad_graphs(d: TriadDescriptor):
    """Atoms (index arrays) and the bipartite beta edge matrices of the
    configuration; for ternary descriptors the order is (12, 13, 23)."""
    atoms = [a.indices() for a in d.atoms()]
    if d.kind == 2:
        return atoms, [beta_graph(d.factor, atoms[0], atoms[1], d.b_cross[0])]
    e12 = beta_graph(d.factor, atoms[0], atoms[1], d.b_cross[0])
    e13 = beta_graph(d.factor, atoms[0], atoms[2], d.b_cross[1])
    e23 = beta_graph(d.factor, atoms[1], atoms[2], d.b_cross[2])
    return atoms, [e12, e13, e23]


def triad_membership_check(factor, samples: int | None = None, seed: int = 0xF0F2) -> bool:
    """Sum-label check over triples (x, y, z): the label of x + y + z must
    equal the sigma combination of the six label pieces of the triple.
    Exhaustive over all triples when samples is None (vectorized over x)."""
    spec = factor.spec
    p = spec.p
    N = spec.order
    lin_cols = factor.linear.label_columns()
    quad_cols = factor.quad_columns()
    digits = spec.digits.astype(np.int64)
    mats = [M % p for M in factor.matrices]
    bilin_full = [((digits @ M) @ digits.T) % p for M in mats]
    if samples is None:
        zs = range(N)
    else:
        rng = np.random.default_rng(seed)
        zs = rng.integers(0, N, size=samples)
    for z in zs:
        perm_z = spec.add_perm(int(z))
        for y in range(N):
            sum_idx = perm_z[spec.add_perm(y)]
            lhs_lin = (lin_cols + lin_cols[y] + lin_cols[int(z)]) % p
            if not np.array_equal(lhs_lin, lin_cols[sum_idx]):
                return False
            for i in range(len(mats)):
                lhs = (
                    quad_cols[:, i]
                    + quad_cols[y, i]
                    + quad_cols[int(z), i]
                    + 2 * (bilin_full[i][:, y] + bilin_full[i][:, int(z)] + bilin_full[i][y, int(z)])
                ) % p
                if not np.array_equal(lhs, quad_cols[sum_idx, i]):
                    return False
    return True


# --- deviation measures ---


def dev2_sum(edges: np.ndarray) -> tuple:
    """(deviation sum, density) for a dense bipartite edge matrix, via the
    codegree contraction sum_(x0,x1) (sum_y g g)^2 with g = 1_E - d."""
    m = edges.astype(np.float64)
    nx, ny = m.shape
    if nx == 0 or ny == 0:
        return 0.0, 0.0
    d = m.sum() / (nx * ny)
    g = m - d
    C = g @ g.T
    return float((C * C).sum()), float(d)


def dev2_measure(edges: np.ndarray) -> tuple:
    """(normalized dev2 value, density): the deviation sum over |X|^2 |Y|^2."""
    nx, ny = edges.shape
    total, d = dev2_sum(edges)
    if nx == 0 or ny == 0:
        return 0.0, 0.0
    return total / (nx**2 * ny**2), d


def dev2_naive(edges: np.ndarray) -> float:
    """Four-fold loop oracle for tiny parts."""
    nx, ny = edges.shape
    if nx > 24 or ny > 24:
        raise MemoryError("naive dev2 oracle limited to parts <= 24")
    d = edges.mean() if edges.size else 0.0
    g = edges.astype(np.float64) - d
    total = 0.0
    for x0 in range(nx):
        for x1 in range(nx):
            for y0 in range(ny):
                for y1 in range(ny):
                    total += g[x0, y0] * g[x0, y1] * g[x1, y0] * g[x1, y1]
    return total / (nx**2 * ny**2) if edges.size else 0.0


def oct_sum(h: np.ndarray) -> float:
    """Octahedron sum of a (U, V, W) tensor via the nested contraction: for
    each pair (u0, u1) the V x V codegree matrix over w is squared-summed
    (batched over u1 to stay in matrix-multiply kernels)."""
    U, V, W = h.shape
    total = 0.0
    for u0 in range(U):
        T = h[u0][None, :, :] * h  # (U, V, W)
        C = np.matmul(T, T.transpose(0, 2, 1))
        total += float((C * C).sum())
    return total


def oct_naive(h: np.ndarray) -> float:
    """Six-fold loop oracle for tiny parts."""
    U, V, W = h.shape
    if max(U, V, W) > 8:
        raise MemoryError("naive oct oracle limited to parts <= 8")
    total = 0.0
    for u0 in range(U):
        for u1 in range(U):
            for v0 in range(V):
                for v1 in range(V):
                    for w0 in range(W):
                        for w1 in range(W):
                            total += (
                                h[u0, v0, w0] * h[u0, v0, w1] * h[u0, v1, w0] * h[u0, v1, w1]
                                * h[u1, v0, w0] * h[u1, v0, w1] * h[u1, v1, w0] * h[u1, v1, w1]
                            )
    return total


class Dev23Result:
    def __init__(self, eps1, d2, d2_max_dev, d3, oct_value, part_sizes):
        self.eps1 = eps1
        self.d2 = d2
        self.d2_max_dev = d2_max_dev
        self.d3 = d3
        self.oct_value = oct_value
        self.part_sizes = part_sizes

    def __repr__(self):
        return (
            f"Dev23Result(eps1={self.eps1:.4g}, d2={self.d2:.4g}"
            f"+/-{self.d2_max_dev:.4g}, d3={self.d3:.4g})"
        )


def triangle_tensor(pair12, pair13, pair23) -> np.ndarray:
    """Boolean (U, V, W) tensor of triangles atop three bipartite graphs."""
    return pair12[:, :, None] & pair13[:, None, :] & pair23[None, :, :]


def dev23_measure(A: GroupSubset, d: TriadDescriptor, max_part: int = 256) -> Dev23Result:
    """Relative quasirandomness of the ternary sum graph atop a triad.

    The common bipartite density d2 is the mean of the three measured
    densities (the max deviation from it is reported); eps1 is the octahedron
    sum of the balanced weight normalized by d2^12 and the part sizes.
    """
    if d.kind != 3:
        raise ValueError("dev23 needs a ternary descriptor")
    atoms, (e12, e13, e23) = triad_graphs(d)
    U, V, W = (len(a) for a in atoms)
    if max(U, V, W) > max_part:
        raise MemoryError(f"part sizes {U},{V},{W} exceed the cap {max_part}")
    if min(U, V, W) == 0:
        return Dev23Result(0.0, 0.0, 0.0, 0.0, 0.0, (U, V, W))
    dens = [e12.mean(), e13.mean(), e23.mean()]
    d2 = float(np.mean(dens))
    d2_dev = float(max(abs(t - d2) for t in dens))
    tri = triangle_tensor(e12, e13, e23)
    ntri = int(tri.sum())
    spec = A.spec
    # membership of x+y+z over the grid
    member = _sum_membership_tensor(A, atoms[0], atoms[1], atoms[2])
    edges = tri & member
    d3 = (edges.sum() / ntri) if ntri else 0.0
    h = np.where(tri, member.astype(np.float64) - d3, 0.0)
    oct_value = oct_sum(h)
    denom = (d2**12) * (U * V * W) ** 2 if d2 > 0 else 0.0
    eps1 = oct_value / denom if denom else 0.0
    return Dev23Result(eps1, d2, d2_dev, float(d3), oct_value, (U, V, W))


def _sum_membership_tensor(A: GroupSubset, X_idx, Y_idx, Z_idx) -> np.ndarray:
    spec = A.spec
    dX = spec.digits[np.asarray(X_idx)].astype(np.int64)
    dY = spec.digits[np.asarray(Y_idx)].astype(np.int64)
    dZ = spec.digits[np.asarray(Z_idx)].astype(np.int64)
    out = np.zeros((len(dX), len(dY), len(dZ)), dtype=bool)
    for k, z in enumerate(dZ):
        idx = ((dX[:, None, :] + dY[None, :, :] + z) % spec.p) @ spec._powers
        out[:, :, k] = A.indicator[idx]
    return out


def oct_measure(A: GroupSubset, d: TriadDescriptor, max_part: int = 256):
    """Octahedron sum of the balanced function of A relative to the triad,
    normalized by the squared part-size product (and its raw value)."""
    if d.kind != 3:
        raise ValueError("oct needs a ternary descriptor")
    atoms, (e12, e13, e23) = triad_graphs(d)
    U, V, W = (len(a) for a in atoms)
    if max(U, V, W) > max_part:
        raise MemoryError(f"part sizes {U},{V},{W} exceed the cap {max_part}")
    if min(U, V, W) == 0:
        return 0.0, 0.0
    target = atom_members(d.factor, sigma(d))
    alpha = (len(A.intersect(target)) / len(target)) if len(target) else 0.0
    tri = triangle_tensor(e12, e13, e23)
    member = _sum_membership_tensor(A, atoms[0], atoms[1], atoms[2])
    h = np.where(tri, member.astype(np.float64) - alpha, 0.0)
    raw = oct_sum(h)
    return raw, raw / float((U * V * W)) ** 2


def density_transfer_check(A: GroupSubset, d: TriadDescriptor, tolerance: float = 0.0) -> MeasureReport:
    """|density of the sum graph on the configuration - density of A on the
    sigma atom|, as a report (bound set by the caller via tolerance)."""
    target = atom_members(d.factor, sigma(d))
    alpha = (len(A.intersect(target)) / len(target)) if len(target) else 0.0
    atoms, graphs = triad_graphs(d)
    if d.kind == 2:
        e = graphs[0]
        if e.sum() == 0:
            rel = 0.0
        else:
            member = SumGraph2(A).matrix(atoms[0], atoms[1])
            rel = float((e & member).sum() / e.sum())
    else:
        tri = triangle_tensor(*graphs)
        ntri = int(tri.sum())
        if ntri == 0:
            rel = 0.0
        else:
            member = _sum_membership_tensor(A, atoms[0], atoms[1], atoms[2])
            rel = float((tri & member).sum() / ntri)
    diff = abs(rel - alpha)
    return MeasureReport(
        "density-transfer", diff, tolerance, "caller tolerance",
        extras={"relative": rel, "atom_density": alpha},
    )


def k222_count(d: TriadDescriptor, base: tuple) -> int:
    """Exact number of (u1, v1, w1) completing the base triangle to a full
    K_2,2,2 inside the triad."""
    atoms, (e12, e13, e23) = triad_graphs(d)
    u0, v0, w0 = base
    au = e12[:, v0] & e13[:, w0]
    bv = e12[u0, :] & e23[:, w0]
    cw = e13[u0, :] & e23[v0, :]
    sub12 = e12[np.ix_(np.nonzero(au)[0], np.nonzero(bv)[0])]
    sub13 = e13[np.ix_(np.nonzero(au)[0], np.nonzero(cw)[0])]
    sub23 = e23[np.ix_(np.nonzero(bv)[0], np.nonzero(cw)[0])]
    counts = sub13.astype(np.int64) @ sub23.T.astype(np.int64)
    return int((counts * sub12).sum())


def triangle_count(e12, e13, e23) -> int:
    return int((e13.astype(np.int64) @ e23.T.astype(np.int64) * e12).sum())


def hom_count_check(parts, graphs, expected_edge_density, tolerance: float) -> MeasureReport:
    """Compare the measured triangle count across three bipartite graphs
    against the product prediction density^3 * |U||V||W|."""
    e12, e13, e23 = graphs
    sizes = [len(t) for t in parts]
    count = triangle_count(e12, e13, e23)
    prediction = expected_edge_density**3 * sizes[0] * sizes[1] * sizes[2]
    ratio = count / prediction if prediction else 0.0
    return MeasureReport(
        "triangle-count-ratio",
        abs(ratio - 1.0),
        tolerance,
        f"|count/({expected_edge_density}^3 * product) - 1| <= {tolerance}",
        extras={"count": count, "prediction": prediction},
    )


# --- reduced pairs ---


class ReducedPair:
    """Label-space structure recording dense, sparse, and error atoms of a
    factor relative to a set, plus the purely-quadratic-label subgroup."""

    def __init__(self, A: GroupSubset, factor, eps: float):
        self.A = A
        self.factor = factor
        self.eps = eps
        spec = A.spec
        ell, q = factor.ell, factor.q
        self.label_spec = GroupSpec(spec.p, ell + q) if ell + q > 0 else None
        table = label_index_table(factor)
        M = spec.p ** (ell + q)
        sizes = np.bincount(table, minlength=M)
        hits = np.bincount(table, weights=A.indicator.astype(np.float64), minlength=M)
        with np.errstate(invalid="ignore", divide="ignore"):
            dens = np.where(sizes > 0, hits / np.maximum(sizes, 1), 0.0)
        self.sizes = sizes
        self.densities = dens
        self.A1 = dens >= 1 - eps
        self.A0 = dens <= eps
        self.err = ~(self.A1 | self.A0)
        if self.label_spec is not None:
            lab_digits = self.label_spec.digits
            self.H_B = (lab_digits[:, :ell] == 0).all(axis=1)
        else:
            self.H_B = np.ones(1, dtype=bool)

    def error_labels(self):
        return np.nonzero(self.err)[0]

    def classify(self, label_index: int) -> str:
        if self.A1[label_index]:
            return "dense"
        if self.A0[label_index]:
            return "sparse"
        return "error"


def reduced_pair(A: GroupSubset, factor, eps: float) -> ReducedPair:
    return ReducedPair(A, factor, eps)


def hypergraph_decomposition_check(
    A: GroupSubset,
    factor,
    eps1: float,
    eps2_fn=None,
    max_triads: int = 64,
    seed: int = 0xF0F2,
    max_part: int = 256,
) -> MeasureReport:
    """Estimate the triple-weighted fraction of triads failing the relative
    quasirandomness test at (eps1, eps2(#edge classes)).

    The vertex classes are the atoms, the edge classes the bilinear-form
    graphs; triads are sampled deterministically when the full label space is
    too large.
    """
    spec = A.spec
    ell, q = factor.ell, factor.q
    n_classes = spec.p**q
    eps2 = eps2_fn(n_classes) if eps2_fn else eps1
    total_flat = spec.p ** (3 * ell + 6 * q)
    rng = np.random.default_rng(seed)
    if total_flat <= max_triads:
        flats = [np.array(_digits_of(i, spec.p, 3 * ell + 6 * q)) for i in range(total_flat)]
    else:
        flats = [rng.integers(0, spec.p, size=3 * ell + 6 * q) for _ in range(max_triads)]
    pass_weight = 0
    total_weight = 0
    for flat in flats:
        d = TriadDescriptor.from_flat(factor, flat)
        try:
            res = dev23_measure(A, d, max_part=max_part)
        except MemoryError:
            raise
        atoms, graphs = triad_graphs(d)
        tri = triangle_tensor(*graphs)
        weight = int(tri.sum())
        total_weight += weight
        ok = res.eps1 <= eps1 and all(
            dev2_measure(g)[0] <= eps2 for g in graphs
        ) and res.d2_max_dev <= eps2
        if ok:
            pass_weight += weight
    frac_fail = 1.0 - (pass_weight / total_weight if total_weight else 1.0)
    return MeasureReport(
        "decomposition-irregular-fraction",
        frac_fail,
        eps1,
        f"failing-triple fraction <= {eps1}",
        extras={"sampled": len(flats), "total_weight": total_weight},
    )


def _digits_of(i: int, p: int, width: int):
    out = []
    for _ in range(width):
        out.append(i % p)
        i //= p
    return out

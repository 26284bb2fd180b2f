"""Exact integer linear algebra and finitely generated abelian groups.

Everything here is computed over Z with arbitrary-precision integers:
Smith normal forms with tracked unimodular transformations, Hermite
column forms, kernels and cokernels, canonical forms of finitely
generated groups, and colimits of a group under a single endomorphism
(stationary direct limits) with decidable element equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class IncompatibleEndo(ValueError):
    """The endomorphism does not descend to the presented group."""


class NonCommuting(ValueError):
    """The given matrix does not commute with the colimit endomorphism."""


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix with explicit shape (rows may be zero)."""

    rows: int
    cols: int
    entries: tuple

    @staticmethod
    def from_rows(rows):
        rows = [tuple(int(x) for x in row) for row in rows]
        r = len(rows)
        c = len(rows[0]) if r else 0
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
        return IntMatrix(r, c, tuple(rows))

    @staticmethod
    def zeros(r, c):
        return IntMatrix(r, c, tuple(tuple(0 for _ in range(c)) for _ in range(r)))

    @staticmethod
    def identity(n):
        return IntMatrix(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def col(self, j):
        return tuple(self.entries[i][j] for i in range(self.rows))

    def tolist(self):
        return [list(row) for row in self.entries]

    def transpose(self):
        return IntMatrix(self.cols, self.rows,
                         tuple(tuple(self.entries[i][j] for i in range(self.rows))
                               for j in range(self.cols)))

    def __add__(self, other):
        _same_shape(self, other)
        return IntMatrix(self.rows, self.cols,
                         tuple(tuple(a + b for a, b in zip(ra, rb))
                               for ra, rb in zip(self.entries, other.entries)))

    def __sub__(self, other):
        _same_shape(self, other)
        return IntMatrix(self.rows, self.cols,
                         tuple(tuple(a - b for a, b in zip(ra, rb))
                               for ra, rb in zip(self.entries, other.entries)))

    def __neg__(self):
        return IntMatrix(self.rows, self.cols,
                         tuple(tuple(-a for a in row) for row in self.entries))

    def mul(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch in product")
        ot = other.transpose().entries
        return IntMatrix(self.rows, other.cols,
                         tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
                               for row in self.entries))

    def mul_vec(self, v):
        if self.cols != len(v):
            raise ValueError("shape mismatch in matrix-vector product")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def power(self, n):
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        if n < 0:
            raise ValueError("negative power")
        acc = IntMatrix.identity(self.rows)
        base = self
        while n:
            if n & 1:
                acc = acc.mul(base)
            base = base.mul(base)
            n >>= 1
        return acc

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols,
                         tuple(ra + rb for ra, rb in zip(self.entries, other.entries)))

    def submatrix(self, row_idx, col_idx):
        return IntMatrix(len(row_idx), len(col_idx),
                         tuple(tuple(self.entries[i][j] for j in col_idx) for i in row_idx))

    def is_zero(self):
        return all(all(a == 0 for a in row) for row in self.entries)

    def det(self):
        """Exact determinant by fraction-free Bareiss elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = [list(row) for row in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def rank(self):
        """Rank over Q by Gaussian elimination with exact rationals."""
        m = [[Fraction(x) for x in row] for row in self.entries]
        rank = 0
        for j in range(self.cols):
            piv = None
            for i in range(rank, self.rows):
                if m[i][j] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = 1 / m[rank][j]
            m[rank] = [x * inv for x in m[rank]]
            for i in range(self.rows):
                if i != rank and m[i][j] != 0:
                    f = m[i][j]
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
            rank += 1
            if rank == self.rows:
                break
        return rank


def _same_shape(a, b):
    if a.rows != b.rows or a.cols != b.cols:
        raise ValueError("shape mismatch")


@dataclass(frozen=True)
class SmithForm:
    """Factorization A = U * S * V with S diagonal, d1 | d2 | ... >= 0.

    U and V are unimodular; u_inv and v_inv are their exact inverses,
    kept so kernels and preimages can be read off without re-inverting.
    """

    u: IntMatrix
    s: IntMatrix
    v: IntMatrix
    u_inv: IntMatrix
    v_inv: IntMatrix

    def divisors(self):
        n = min(self.s.rows, self.s.cols)
        return tuple(self.s[i, i] for i in range(n))


def smith_normal_form(a: IntMatrix) -> SmithForm:
    """Smith normal form with tracked transformations.

    Pivoting picks the entry of least absolute value in the working
    block, which keeps intermediate entries small for desk-scale input.
    """
    r, c = a.rows, a.cols
    b = [list(row) for row in a.entries]
    p = [list(row) for row in IntMatrix.identity(r).entries]
    pinv = [list(row) for row in IntMatrix.identity(r).entries]
    q = [list(row) for row in IntMatrix.identity(c).entries]
    qinv = [list(row) for row in IntMatrix.identity(c).entries]

    def row_swap(i, j):
        b[i], b[j] = b[j], b[i]
        p[i], p[j] = p[j], p[i]
        for row in pinv:
            row[i], row[j] = row[j], row[i]

    def row_add(i, j, k):
        # row_i += k * row_j
        b[i] = [x + k * y for x, y in zip(b[i], b[j])]
        p[i] = [x + k * y for x, y in zip(p[i], p[j])]
        for row in pinv:
            row[j] -= k * row[i]

    def row_neg(i):
        b[i] = [-x for x in b[i]]
        p[i] = [-x for x in p[i]]
        for row in pinv:
            row[i] = -row[i]

    def col_swap(i, j):
        for row in b:
            row[i], row[j] = row[j], row[i]
        for row in q:
            row[i], row[j] = row[j], row[i]
        qinv[i], qinv[j] = qinv[j], qinv[i]

    def col_add(j, i, k):
        # col_j += k * col_i
        for row in b:
            row[j] += k * row[i]
        for row in q:
            row[j] += k * row[i]
        qinv[i] = [x - k * y for x, y in zip(qinv[i], qinv[j])]

    t = 0
    while t < min(r, c):
        piv = None
        best = None
        for i in range(t, r):
            for j in range(t, c):
                v = b[i][j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])

        while True:
            # euclidean clearing of column t then row t
            dirty = False
            for i in range(t + 1, r):
                if b[i][t] != 0:
                    k = b[i][t] // b[t][t]
                    if k:
                        row_add(i, t, -k)
                    if b[i][t] != 0:
                        row_swap(t, i)
                        dirty = True
            if dirty:
                continue
            for j in range(t + 1, c):
                if b[t][j] != 0:
                    k = b[t][j] // b[t][t]
                    if k:
                        col_add(j, t, -k)
                    if b[t][j] != 0:
                        col_swap(t, j)
                        dirty = True
            if dirty:
                continue
            # pivot must divide every remaining entry
            offender = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if b[i][j] % b[t][t] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_add(t, offender, 1)
        if b[t][t] < 0:
            row_neg(t)
        t += 1

    return SmithForm(
        u=IntMatrix.from_rows(pinv),
        s=IntMatrix.from_rows(b),
        v=IntMatrix.from_rows(qinv),
        u_inv=IntMatrix.from_rows(p),
        v_inv=IntMatrix.from_rows(q),
    )


@dataclass(frozen=True)
class FgGroup:
    """Canonical form of a finitely generated abelian group.

    rank is the free rank; torsion is the invariant-factor chain
    (d1 | d2 | ..., every d >= 2).
    """

    rank: int
    torsion: tuple = ()

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise ValueError("torsion coefficients must form a divisibility chain")
        if any(d < 2 for d in self.torsion):
            raise ValueError("torsion coefficients must be >= 2")

    def is_trivial(self):
        return self.rank == 0 and not self.torsion

    def is_free(self):
        return not self.torsion

    def order(self):
        """Group order, or None when infinite."""
        if self.rank > 0:
            return None
        n = 1
        for d in self.torsion:
            n *= d
        return n

    def __str__(self):
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self):
        return {"kind": "fg", "rank": self.rank, "torsion": list(self.torsion),
                "name": str(self)}


def cokernel(a: IntMatrix) -> FgGroup:
    """Canonical form of Z^rows / (column span of a)."""
    sf = smith_normal_form(a)
    divisors = [d for d in sf.divisors() if d != 0]
    return FgGroup(rank=a.rows - len(divisors),
                   torsion=tuple(d for d in divisors if d > 1))


def kernel_rank(a: IntMatrix) -> int:
    sf = smith_normal_form(a)
    nonzero = sum(1 for d in sf.divisors() if d != 0)
    return a.cols - nonzero


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel, as Hermite-reduced columns."""
    sf = smith_normal_form(a)
    nonzero = sum(1 for d in sf.divisors() if d != 0)
    idx = list(range(nonzero, a.cols))
    cols = sf.v_inv.submatrix(range(a.cols), idx)
    return hermite_columns(cols)


def hermite_columns(a: IntMatrix) -> IntMatrix:
    """Column Hermite form of the column lattice of a.

    Canonical: pivots positive and strictly descending in row index
    per column order, entries left of a pivot reduced into [0, pivot).
    Zero columns are dropped, so equal lattices give equal matrices.
    """
    r, c = a.rows, a.cols
    m = [list(row) for row in a.entries]

    def col_op(j, i, k):
        for row in m:
            row[j] += k * row[i]

    cur = 0
    for row_i in range(r):
        if cur >= c:
            break
        # gcd-combine columns cur.. at this row until one nonzero remains
        while True:
            nz = [j for j in range(cur, c) if m[row_i][j] != 0]
            if len(nz) <= 1:
                break
            j0 = min(nz, key=lambda j: abs(m[row_i][j]))
            for j in nz:
                if j != j0:
                    k = m[row_i][j] // m[row_i][j0]
                    col_op(j, j0, -k)
        nz = [j for j in range(cur, c) if m[row_i][j] != 0]
        if not nz:
            continue
        j0 = nz[0]
        if j0 != cur:
            for row in m:
                row[cur], row[j0] = row[j0], row[cur]
        if m[row_i][cur] < 0:
            for row in m:
                row[cur] = -row[cur]
        piv = m[row_i][cur]
        for j in range(cur):
            k = m[row_i][j] // piv
            if k:
                col_op(j, cur, -k)
        cur += 1

    kept = [j for j in range(c) if any(m[i][j] != 0 for i in range(r))]
    return IntMatrix(r, len(kept), tuple(tuple(m[i][j] for j in kept) for i in range(r)))


def solve_integer(a: IntMatrix, b, sf: SmithForm | None = None):
    """One integer solution x of a x = b, or None when unsolvable."""
    if sf is None:
        sf = smith_normal_form(a)
    c = sf.u_inv.mul_vec(tuple(b))
    y = [0] * a.cols
    for i in range(a.rows):
        d = sf.s[i, i] if i < min(a.rows, a.cols) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d != 0:
                return None
            y[i] = c[i] // d
    return sf.v_inv.mul_vec(tuple(y))


def lattice_member(basis: IntMatrix, v, sf: SmithForm | None = None) -> bool:
    """Whether v lies in the column lattice of basis."""
    return solve_integer(basis, v, sf) is not None


def lattice_preimage(f: IntMatrix, basis: IntMatrix) -> IntMatrix:
    """Generators of {x : f x in column lattice of basis}, Hermite-reduced."""
    if f.rows != basis.rows:
        raise ValueError("shape mismatch between map and lattice")
    stacked = f.hstack(-basis)
    ker = kernel_basis(stacked)
    top = ker.submatrix(range(f.cols), range(ker.cols))
    return hermite_columns(top)


def _quotient_data(relations: IntMatrix):
    """Diagonalized data of Z^n / (column lattice of relations).

    Returns (sf, divisors per generator, free indices, torsion indices)
    in the transformed coordinates y = u_inv x.
    """
    n = relations.rows
    sf = smith_normal_form(relations)
    divs = []
    for i in range(n):
        d = sf.s[i, i] if i < min(relations.rows, relations.cols) else 0
        divs.append(d)
    free = [i for i in range(n) if divs[i] == 0]
    tors = [i for i in range(n) if divs[i] >= 2]
    return sf, divs, free, tors


def group_of_presentation(relations: IntMatrix) -> FgGroup:
    return cokernel(relations)


@dataclass(frozen=True)
class ColimitGroup:
    """Stationary colimit of Z^n / relations under the endomorphism endo.

    Stages are copies of the base group with endo as the connecting
    map.  stable_rank is the rank of the colimit; eventual_torsion its
    torsion subgroup (the stabilized image of the base torsion under
    endo).  pretty is a recognized name when the small recognition
    table applies, otherwise None and the group is reported
    structurally.
    """

    relations: IntMatrix
    endo: IntMatrix
    stable_rank: int
    eventual_torsion: FgGroup
    pretty: str | None

    @property
    def gens(self):
        return self.endo.rows

    def base_group(self) -> FgGroup:
        return cokernel(self.relations)

    def recognized(self) -> FgGroup | None:
        """The colimit as an FgGroup when it is finitely generated, else None."""
        if self.pretty is None:
            return None
        if self.pretty.startswith("Z[1/"):
            return None
        return FgGroup(self.stable_rank, self.eventual_torsion.torsion)

    def describe(self) -> str:
        if self.pretty is not None:
            return self.pretty
        return (f"colim(base={self.base_group()}, endo={self.endo.tolist()}, "
                f"stable_rank={self.stable_rank}, eventual_torsion={self.eventual_torsion})")

    def to_json(self):
        return {
            "kind": "colimit",
            "base": self.base_group().to_json(),
            "endo": self.endo.tolist(),
            "stable_rank": self.stable_rank,
            "eventual_torsion": self.eventual_torsion.to_json(),
            "name": self.pretty,
        }

    def __str__(self):
        return self.describe()


def _presentation_of(base) -> IntMatrix:
    """Relations matrix of a base given as FgGroup or as a relations matrix."""
    if isinstance(base, FgGroup):
        n = base.rank + len(base.torsion)
        cols = []
        for i, d in enumerate(base.torsion):
            col = [0] * n
            col[base.rank + i] = d
            cols.append(col)
        if not cols:
            return IntMatrix.zeros(n, 0)
        return IntMatrix.from_rows([[col[i] for col in cols] for i in range(n)])
    if isinstance(base, IntMatrix):
        return base
    raise TypeError("base must be an FgGroup or a relations IntMatrix")


def _check_well_defined(relations: IntMatrix, h: IntMatrix, sf: SmithForm):
    for j in range(relations.cols):
        image = h.mul_vec(relations.col(j))
        if solve_integer(relations, image, sf) is None:
            raise IncompatibleEndo(
                f"endomorphism does not preserve the relation lattice (column {j})")


def _torsion_image_group(moduli, gen_cols: IntMatrix):
    """Structure of the subgroup of ⊕ Z/moduli generated by gen_cols."""
    t = len(moduli)
    if t == 0:
        return FgGroup(0), None
    d_mat = IntMatrix.from_rows([[moduli[i] if i == j else 0 for j in range(t)]
                                 for i in range(t)])
    basis = hermite_columns(gen_cols.hstack(d_mat))
    # basis is square and full rank because it contains diag(moduli)
    x = _solve_matrix(basis, d_mat)
    return cokernel(x), basis


def _solve_matrix(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Integer X with a X = b; raises when no integral solution exists."""
    sf = smith_normal_form(a)
    cols = []
    for j in range(b.cols):
        x = solve_integer(a, b.col(j), sf)
        if x is None:
            raise ValueError("system has no integral solution")
        cols.append(x)
    if not cols:
        return IntMatrix.zeros(a.cols, 0)
    return IntMatrix.from_rows([[col[i] for col in cols] for i in range(a.cols)])


def colimit(base, h: IntMatrix) -> ColimitGroup:
    """Colimit of the base group under the endomorphism h.

    The base is an FgGroup (canonical presentation) or a relations
    matrix; h acts on the chosen generators and must preserve the
    relation lattice.
    """
    relations = _presentation_of(base)
    n = relations.rows
    if h.rows != n or h.cols != n:
        raise IncompatibleEndo("endomorphism shape does not match the generators")
    sf, divs, free, tors = _quotient_data(relations)
    _check_well_defined(relations, h, sf)

    h_y = sf.u_inv.mul(h).mul(sf.u)
    for f in free:
        for t in tors:
            if h_y[f, t] != 0:
                raise AssertionError("free-to-torsion block must vanish for a well defined endo")

    # rank of the colimit: stabilized rank of the free block
    h_free = h_y.submatrix(free, free)
    stable_rank = h_free.power(len(free)).rank() if free else 0

    # torsion of the colimit: stabilized image of the finite part
    moduli = [divs[i] for i in tors]
    h_tors = h_y.submatrix(tors, tors)
    eventual = FgGroup(0)
    if tors:
        prev_basis = None
        power = IntMatrix.identity(len(tors))
        bound = sum(max(d.bit_length(), 1) for d in moduli) + 2
        for _ in range(bound):
            power = power.mul(h_tors)
            reduced = IntMatrix.from_rows(
                [[power[i, j] % moduli[i] for j in range(len(tors))]
                 for i in range(len(tors))])
            eventual, basis = _torsion_image_group(moduli, reduced)
            if prev_basis is not None and basis.entries == prev_basis.entries:
                break
            prev_basis = basis
        else:
            raise AssertionError("torsion image failed to stabilize")

    base_fg = cokernel(relations)
    pretty = None
    if stable_rank == 0 and eventual.is_trivial():
        pretty = "0"
    elif _is_base_automorphism(h_free, moduli, h_tors):
        pretty = str(base_fg)
    elif base_fg == FgGroup(1) and abs(h_free[0, 0]) >= 2:
        pretty = f"Z[1/{abs(h_free[0, 0])}]"
    elif stable_rank == 0:
        pretty = str(eventual)

    return ColimitGroup(relations=relations, endo=h, stable_rank=stable_rank,
                        eventual_torsion=eventual, pretty=pretty)


def _is_base_automorphism(h_free, moduli, h_tors):
    if h_free.rows and abs(h_free.det()) != 1:
        return False
    t = len(moduli)
    if t == 0:
        return True
    d_mat = IntMatrix.from_rows([[moduli[i] if i == j else 0 for j in range(t)]
                                 for i in range(t)])
    basis = hermite_columns(h_tors.hstack(d_mat))
    return basis.entries == IntMatrix.identity(t).entries


def _stable_preimage_lattice(g: ColimitGroup) -> IntMatrix:
    """Hermite basis of {v : h^m v dies in the base for some m}."""
    n = g.gens
    cur = hermite_columns(g.relations) if g.relations.cols else IntMatrix.zeros(n, 0)
    for _ in range(64 * (n + 1) + 8):
        if cur.cols:
            nxt = lattice_preimage(g.endo, cur)
        else:
            nxt = hermite_columns(kernel_basis(g.endo))
        if nxt.entries == cur.entries:
            return cur
        cur = nxt
    raise AssertionError("preimage chain failed to stabilize")


def colim_element_eq(g: ColimitGroup, a, b) -> bool:
    """Equality of colimit elements (v, stage j) and (w, stage k).

    Stages are aligned with the connecting endomorphism, then the
    difference is tested against the stabilized preimage lattice of
    the relations (the set of base vectors that eventually die).
    """
    v, j = a
    w, k = b
    v = tuple(int(x) for x in v)
    w = tuple(int(x) for x in w)
    if j < 0 or k < 0:
        raise ValueError("stages must be nonnegative")
    s = max(j, k)
    v = g.endo.power(s - j).mul_vec(v)
    w = g.endo.power(s - k).mul_vec(w)
    diff = tuple(x - y for x, y in zip(v, w))
    if all(x == 0 for x in diff):
        return True
    stable = _stable_preimage_lattice(g)
    if stable.cols == 0:
        return False
    return lattice_member(stable, diff)


def induced_ker_coker(g: ColimitGroup, b: IntMatrix):
    """Kernel and cokernel colimits of a map commuting with the endo.

    b acts on the same generators as g.  Both are computed stagewise
    (filtered colimits are exact): the cokernel just gains b's columns
    as relations, the kernel is re-presented on a basis of the
    preimage lattice {x : b x in relations}.
    """
    n = g.gens
    if b.rows != n or b.cols != n:
        raise NonCommuting("matrix shape does not match the colimit generators")
    sf = smith_normal_form(g.relations)
    comm = b.mul(g.endo) - g.endo.mul(b)
    for j in range(n):
        if solve_integer(g.relations, comm.col(j), sf) is None:
            raise NonCommuting("matrix does not commute with the endomorphism on the base")
    for j in range(g.relations.cols):
        if solve_integer(g.relations, b.mul_vec(g.relations.col(j)), sf) is None:
            raise NonCommuting("matrix is not well defined on the base")

    coker = colimit(g.relations.hstack(b), g.endo)

    lat = lattice_preimage(b, g.relations) if g.relations.cols else hermite_columns(kernel_basis(b))
    if lat.cols == 0:
        ker = colimit(IntMatrix.zeros(0, 0), IntMatrix.identity(0))
    else:
        rel_in_lat = (_solve_matrix(lat, g.relations)
                      if g.relations.cols else IntMatrix.zeros(lat.cols, 0))
        endo_in_lat = _solve_matrix(lat, g.endo.mul(lat))
        ker = colimit(rel_in_lat, endo_in_lat)
    return ker, coker

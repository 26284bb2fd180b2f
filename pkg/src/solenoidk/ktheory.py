"""K-theory of the germ quotient and its substitution dynamics.

Degree-zero classes of the quotient live on the germ set, degree-one
classes on the arc set; a germ (l, r) has boundary arc_r - arc_l.
The kernel and cokernel of that boundary map are the two quotient
K-groups.  The substitution acts on them by a transfer ("wrong-way")
matrix pair (A0, A1), chosen by the first applicable rule: caller
supplied, degree-d circle self-cover, or the occurrence matrix when
left-arc coordinates identify the degree-zero group with the arc
lattice.  Stationary colimits under (A0, A1) give the stable
K-groups, and kernel/cokernel of (1 - A_i) give the four pieces of
the crossed product's K-groups, assembled as a direct sum whenever
the quotient piece of the extension is free.

Everything here is a model computation: the boundary complex and the
heuristic transfer matrices are validated against worked families,
not proved for arbitrary systems, and every report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .abelian import (ColimitGroup, FgGroup, IntMatrix, cokernel, colimit,
                      induced_ker_coker, kernel_basis)
from .germ_quotient import (Germ, QuotientPresentation, k0_constant,
                            quotient_presentation)
from .graph_substitution import SubstitutionSystem, require_valid


class NeedUserMatrices(ValueError):
    """No built-in rule produces transfer matrices for this system.

    reasons lists, per rule, why it did not apply; callers should pass
    matrices explicitly.
    """

    def __init__(self, reasons):
        self.reasons = tuple(reasons)
        super().__init__("; ".join(self.reasons))


class NotFree(ValueError):
    """Dual (transposed) computation requires free K-groups."""


BOUNDARY_MODEL_NOTE = ("boundary-complex model: quotient K-groups are the "
                       "kernel and cokernel of the germ boundary map, "
                       "validated against worked families, not proved in "
                       "general")


@dataclass(frozen=True)
class BoundaryMap:
    """Integer matrix of germ boundaries, arcs x germs, both sorted.

    Column of germ (l, r) is arc_r - arc_l, so every column sums to
    zero and same-arc germs give zero columns.
    """

    arcs: tuple
    germs: tuple
    matrix: IntMatrix

    def to_json(self):
        return {
            "arcs": list(self.arcs),
            "germs": [str(g) for g in self.germs],
            "matrix": self.matrix.tolist(),
        }


def boundary_matrix(presentation: QuotientPresentation) -> BoundaryMap:
    arcs = tuple(sorted(presentation.arcs))
    germs = tuple(sorted(presentation.germs))
    index = {e: i for i, e in enumerate(arcs)}
    rows = [[0] * len(germs) for _ in arcs]
    for j, germ in enumerate(germs):
        rows[index[germ.r]][j] += 1
        rows[index[germ.l]][j] -= 1
    matrix = IntMatrix.from_rows(rows) if germs else IntMatrix.zeros(len(arcs), 0)
    for j in range(matrix.cols):
        assert sum(matrix.col(j)) == 0, "boundary columns must sum to zero"
    return BoundaryMap(arcs=arcs, germs=germs, matrix=matrix)


@dataclass(frozen=True)
class KGroups:
    """Quotient K-groups: k0 = ker boundary (free), k1 = coker boundary.

    k0_basis columns are a Hermite basis of the kernel in germ
    coordinates, fixing the matrix conventions downstream.
    """

    k0: FgGroup
    k1: FgGroup
    k0_basis: IntMatrix
    boundary: BoundaryMap

    def to_json(self):
        return {
            "k0": self.k0.to_json(),
            "k1": self.k1.to_json(),
            "k0_basis": self.k0_basis.tolist(),
        }


def quotient_ktheory(system: SubstitutionSystem) -> KGroups:
    require_valid(system)
    bd = boundary_matrix(quotient_presentation(system))
    basis = kernel_basis(bd.matrix)
    k0 = FgGroup(basis.cols)
    k1 = cokernel(bd.matrix)
    # arcs quotiented by arc differences: free on the germ-graph components
    assert k1.is_free(), "coker of an arc-difference lattice must be free"
    assert k0.rank - k1.rank == len(bd.germs) - len(bd.arcs), \
        "rank bookkeeping of the boundary map failed"
    return KGroups(k0=k0, k1=k1, k0_basis=basis, boundary=bd)


@dataclass(frozen=True)
class WrongWayData:
    """Transfer matrices of the substitution on the quotient K-groups.

    a0 acts on k0 generators, a1 on k1 generators; provenance records
    which selection rule produced them.
    """

    a0: IntMatrix
    a1: IntMatrix
    provenance: str
    notes: tuple = ()

    def to_json(self):
        return {
            "A0": self.a0.tolist(),
            "A1": self.a1.tolist(),
            "provenance": self.provenance,
            "notes": list(self.notes),
        }


def _as_matrix(value, name):
    if isinstance(value, IntMatrix):
        return value
    try:
        return IntMatrix.from_rows([[int(x) for x in row] for row in value])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be an integer matrix") from exc


def _gens(group: FgGroup) -> int:
    return group.rank + len(group.torsion)


def circle_cover_data(system: SubstitutionSystem, kg: KGroups):
    """Transfer matrices when the quotient is a circle self-covered
    with a well defined degree, else a reason string."""
    pres = kg.boundary
    if not quotient_presentation(system).hausdorff:
        return "quotient is not Hausdorff"
    germs = pres.germs
    arcs = pres.arcs
    if len(germs) != len(arcs):
        return "germ and arc counts differ, not a single circle"
    succ = {}
    for germ in germs:
        if germ.l in succ:
            return f"arc {germ.l} has two outgoing germs, not a circle"
        succ[germ.l] = germ.r
    if set(succ) != set(arcs) or set(succ.values()) != set(arcs):
        return "germs do not chain the arcs into loops"
    seen = 1
    cur = succ[arcs[0]]
    while cur != arcs[0]:
        seen += 1
        cur = succ[cur]
        if seen > len(arcs):
            raise AssertionError("successor walk failed to close")
    if seen != len(arcs):
        return "arcs close into more than one loop"
    sums = {sum(system.image(f).count(e) for f in arcs) for e in arcs}
    if len(sums) != 1:
        return "arc multiplicities differ, covering degree undefined"
    d = sums.pop()
    if kg.k0 != FgGroup(1) or kg.k1 != FgGroup(1):
        return "circle must have rank-one K-groups"
    return WrongWayData(
        a0=IntMatrix.from_rows([[d]]),
        a1=IntMatrix.identity(1),
        provenance="CircleCoverRule",
        notes=(f"quotient is a circle and the induced map is a degree {d} "
               "self-cover; degree zero multiplies by the degree",))


def rose_heuristic_data(system: SubstitutionSystem, kg: KGroups):
    """Transfer matrices via left-arc coordinates on the kernel, else a
    reason string.  Applies when sending each germ to its left arc maps
    the kernel isomorphically onto the arc lattice; the transfer is
    then the occurrence matrix of the substitution."""
    edges = tuple(sorted(system.edges))
    if kg.k0.rank != len(edges):
        return (f"degree-zero rank {kg.k0.rank} differs from the arc count "
                f"{len(edges)}")
    if kg.k1 != FgGroup(1):
        return f"degree-one group {kg.k1} is not infinite cyclic"
    kappa = IntMatrix.from_rows(
        [[1 if germ.l == e else 0 for germ in kg.boundary.germs]
         for e in edges])
    change = kappa.mul(kg.k0_basis)
    if abs(change.det()) != 1:
        return "left-arc coordinates do not identify the kernel with the arc lattice"
    occ = IntMatrix.from_rows(
        [[system.image(f).count(e) for f in edges] for e in edges])
    return WrongWayData(
        a0=occ,
        a1=IntMatrix.identity(1),
        provenance="RoseHeuristic",
        notes=("left-arc coordinates identify the degree-zero group with the "
               "arc lattice; the transfer acts there by the occurrence matrix",))


def wrongway_matrices(system: SubstitutionSystem, user_override=None,
                      kg: KGroups | None = None) -> WrongWayData:
    """Select transfer matrices: caller supplied, circle rule, then the
    occurrence-matrix heuristic; NeedUserMatrices if none applies."""
    if kg is None:
        kg = quotient_ktheory(system)
    if user_override is not None:
        a0, a1 = user_override
        a0 = _as_matrix(a0, "A0")
        a1 = _as_matrix(a1, "A1")
        for name, mat, group in (("A0", a0, kg.k0), ("A1", a1, kg.k1)):
            if mat.rows != mat.cols or mat.rows != _gens(group):
                raise ValueError(
                    f"{name} must be square of size {_gens(group)}, "
                    f"got {mat.rows}x{mat.cols}")
        return WrongWayData(a0=a0, a1=a1, provenance="UserSupplied",
                            notes=("matrices supplied by the caller",))
    reasons = []
    for rule in (circle_cover_data, rose_heuristic_data):
        result = rule(system, kg)
        if isinstance(result, WrongWayData):
            return result
        reasons.append(f"{rule.__name__}: {result}")
    raise NeedUserMatrices(reasons)


def stable_ktheory(system: SubstitutionSystem, user_override=None,
                   kg: KGroups | None = None,
                   wrongway: WrongWayData | None = None):
    """Stationary colimits of the quotient K-groups under the transfer."""
    if kg is None:
        kg = quotient_ktheory(system)
    if wrongway is None:
        wrongway = wrongway_matrices(system, user_override, kg)
    return (colimit(kg.k0, wrongway.a0), colimit(kg.k1, wrongway.a1))


def _endo_pieces(group: FgGroup, mat: IntMatrix):
    """Kernel and cokernel of a matrix endomorphism of a f.g. group."""
    n = _gens(group)
    if mat.rows != n or mat.cols != n:
        raise ValueError(f"endomorphism must be {n}x{n}, got {mat.rows}x{mat.cols}")
    if n == 0:
        return FgGroup(0), FgGroup(0)
    ambient = colimit(group, IntMatrix.identity(n))
    ker, coker = induced_ker_coker(ambient, mat)
    ker_fg, coker_fg = ker.recognized(), coker.recognized()
    assert ker_fg is not None and coker_fg is not None, \
        "pieces of an endomorphism of a f.g. group are f.g."
    return ker_fg, coker_fg


@dataclass(frozen=True)
class PimsnerResult:
    """Crossed-product K-groups from the six-term pieces.

    Degree zero extends ker(1 - A1) by coker(1 - A0); degree one
    extends ker(1 - A0) by coker(1 - A1).  Assembled groups are only
    reported when the quotient piece is free (the extension then
    splits); otherwise the pieces stand alone and assembled is None.
    """

    coker_one_minus_a0: FgGroup
    ker_one_minus_a0: FgGroup
    coker_one_minus_a1: FgGroup
    ker_one_minus_a1: FgGroup
    k0: FgGroup | None
    k1: FgGroup | None
    split_k0: bool
    split_k1: bool
    notes: tuple = ()

    def to_json(self):
        return {
            "k0_pieces": {"sub": self.coker_one_minus_a0.to_json(),
                          "quot": self.ker_one_minus_a1.to_json()},
            "k1_pieces": {"sub": self.coker_one_minus_a1.to_json(),
                          "quot": self.ker_one_minus_a0.to_json()},
            "assembled": {"k0": None if self.k0 is None else self.k0.to_json(),
                          "k1": None if self.k1 is None else self.k1.to_json()},
            "split_flags": {"k0": self.split_k0, "k1": self.split_k1},
            "notes": list(self.notes),
        }


def _assemble(sub: FgGroup, quot: FgGroup):
    if not quot.is_free():
        return None, False
    return FgGroup(sub.rank + quot.rank, sub.torsion), True


def pimsner_pieces(k0: FgGroup, k1: FgGroup, a0: IntMatrix, a1: IntMatrix,
                   notes: tuple = ()) -> PimsnerResult:
    """Six-term pieces of the crossed product by the transfer action."""
    ker0, coker0 = _endo_pieces(k0, IntMatrix.identity(_gens(k0)) - a0)
    ker1, coker1 = _endo_pieces(k1, IntMatrix.identity(_gens(k1)) - a1)
    assembled0, split0 = _assemble(coker0, ker1)
    assembled1, split1 = _assemble(coker1, ker0)
    # rank bookkeeping of the six-term pieces, checked on every run
    assert coker0.rank + ker1.rank == coker1.rank + ker0.rank, \
        "degree-zero and degree-one ranks must agree"
    if assembled0 is not None:
        assert assembled0.rank == coker0.rank + ker1.rank
    if assembled1 is not None:
        assert assembled1.rank == coker1.rank + ker0.rank
    return PimsnerResult(
        coker_one_minus_a0=coker0, ker_one_minus_a0=ker0,
        coker_one_minus_a1=coker1, ker_one_minus_a1=ker1,
        k0=assembled0, k1=assembled1, split_k0=split0, split_k1=split1,
        notes=notes)


def ruelle_ktheory(system: SubstitutionSystem, user_override=None,
                   kg: KGroups | None = None,
                   wrongway: WrongWayData | None = None) -> PimsnerResult:
    """Crossed-product K-groups of the quotient under the transfer."""
    if kg is None:
        kg = quotient_ktheory(system)
    if wrongway is None:
        wrongway = wrongway_matrices(system, user_override, kg)
    return pimsner_pieces(kg.k0, kg.k1, wrongway.a0, wrongway.a1)


def dual_pieces(k0: FgGroup, k1: FgGroup, a0: IntMatrix,
                a1: IntMatrix) -> PimsnerResult:
    """Transposed-transfer pieces; only defined when both groups are free."""
    if not (k0.is_free() and k1.is_free()):
        raise NotFree(f"dual computation needs free K-groups, got {k0} and {k1}")
    return pimsner_pieces(k0, k1, a0.transpose(), a1.transpose(),
                          notes=("free-case dual computation",))


def unstable_ruelle_ktheory(system: SubstitutionSystem, user_override=None,
                            kg: KGroups | None = None,
                            wrongway: WrongWayData | None = None) -> PimsnerResult:
    """Same engine on transposed transfer matrices (free case only)."""
    if kg is None:
        kg = quotient_ktheory(system)
    if wrongway is None:
        wrongway = wrongway_matrices(system, user_override, kg)
    return dual_pieces(kg.k0, kg.k1, wrongway.a0, wrongway.a1)


@dataclass(frozen=True)
class KReport:
    """Everything K-theoretic for one system, JSON-ready."""

    kgroups: KGroups
    wrongway: WrongWayData
    stable: tuple
    ruelle: PimsnerResult
    model_assumptions: tuple

    def to_json(self):
        s0, s1 = self.stable
        return {
            "k0_quotient": self.kgroups.k0.to_json(),
            "k1_quotient": self.kgroups.k1.to_json(),
            "A0": self.wrongway.a0.tolist(),
            "A1": self.wrongway.a1.tolist(),
            "provenance": self.wrongway.provenance,
            "stable": {"k0": s0.to_json(), "k1": s1.to_json()},
            "ruelle": self.ruelle.to_json(),
            "model_assumptions": list(self.model_assumptions),
        }


def kreport(system: SubstitutionSystem, user_override=None) -> KReport:
    """Run the full K pipeline: quotient groups, transfer, stable, crossed
    product.  Requires the germ map to flatten (raises NoFlattening
    otherwise, since the whole model rests on it)."""
    k0_constant(system)
    kg = quotient_ktheory(system)
    ww = wrongway_matrices(system, user_override, kg)
    assumptions = (BOUNDARY_MODEL_NOTE,
                   f"transfer matrices chosen by {ww.provenance}")
    return KReport(kgroups=kg, wrongway=ww,
                   stable=stable_ktheory(system, kg=kg, wrongway=ww),
                   ruelle=ruelle_ktheory(system, kg=kg, wrongway=ww),
                   model_assumptions=assumptions)


@dataclass(frozen=True)
class PqFamilyReport:
    """Crossed-product pieces for the degree-q circle solenoid whose
    transfer multiplies by p in degree zero.

    The stable groups are Z[1/p] and Z[1/q]; 1 minus the transfer
    leaves the four pieces below.  The finite cyclic piece Z/(p-1)
    lands in degree zero under the bookkeeping used here and in degree
    one under the opposite pairing; both placements are reported and
    neither is endorsed.
    """

    p: int
    q: int
    stable0: ColimitGroup
    stable1: ColimitGroup
    coker0: ColimitGroup
    ker0: ColimitGroup
    coker1: ColimitGroup
    ker1: ColimitGroup

    def placements(self):
        torsion = self.coker0.describe()
        free = self.ker1.describe()
        return {
            "torsion_in_degree_zero": {"k0": f"{free} ⊕ {torsion}", "k1": free},
            "torsion_in_degree_one": {"k0": free, "k1": f"{free} ⊕ {torsion}"},
        }

    def to_json(self):
        return {
            "family": {"p": self.p, "q": self.q},
            "stable": {"k0": self.stable0.to_json(), "k1": self.stable1.to_json()},
            "pieces": {
                "coker_one_minus_a0": self.coker0.describe(),
                "ker_one_minus_a0": self.ker0.describe(),
                "coker_one_minus_a1": self.coker1.describe(),
                "ker_one_minus_a1": self.ker1.describe(),
            },
            "placements": self.placements(),
            "non_normative": True,
            "note": ("the degree carrying the finite cyclic summand depends "
                     "on a parity convention in the boundary bookkeeping; "
                     "this report lists both conventions and pins neither"),
        }


def pq_family_report(p: int, q: int) -> PqFamilyReport:
    """Both torsion placements for the p/q circle solenoid family."""
    p, q = int(p), int(q)
    if not 1 < q < p:
        raise ValueError("family needs 1 < q < p")
    if math.gcd(p, q) != 1:
        raise ValueError("family needs p and q coprime")
    stable0 = colimit(FgGroup(1), IntMatrix.from_rows([[p]]))
    stable1 = colimit(FgGroup(1), IntMatrix.from_rows([[q]]))
    ker0, coker0 = induced_ker_coker(stable0, IntMatrix.from_rows([[1 - p]]))
    ker1, coker1 = induced_ker_coker(stable1, IntMatrix.zeros(1, 1))
    assert coker0.stable_rank == 0 and coker0.eventual_torsion == FgGroup(0, (p - 1,)), \
        "degree-zero cokernel must be the full cyclic group of order p-1"
    assert ker0.stable_rank == 0 and ker0.eventual_torsion.is_trivial(), \
        "1 minus the degree-zero transfer is injective"
    return PqFamilyReport(p=p, q=q, stable0=stable0, stable1=stable1,
                          coker0=coker0, ker0=ker0, coker1=coker1, ker1=ker1)

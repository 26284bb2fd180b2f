"""The non-Hausdorff quotient of a rose substitution at its vertex.

The quotient space keeps every open arc of the rose and replaces the
wedge vertex by finitely many germs: pairs (l, r) recording an
incoming and an outgoing arc approach.  The substitution descends to
the germ map tau(l, r) = (last letter of g(l), first letter of g(r)).
This module computes the admissible germ set, Hausdorffness, the
flattening constant (least power of tau that is constant), covering
times, and exact verification of the factor-map identities relating
the rose map and the quotient map.

The germ presentation is a combinatorial model of the metric quotient;
it reproduces all worked instances but is a model assumption, and
reports flag it as such.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .graph_substitution import (
    SubstitutionSystem,
    UnknownEdge,
    iterate_word,
    require_valid,
)


class InadmissibleGerm(ValueError):
    def __init__(self, germ):
        super().__init__(f"germ {germ} is not admissible for this system")
        self.germ = germ


class NoFlattening(ValueError):
    """tau eventually permutes several germs, so no power is constant."""

    def __init__(self, cycle):
        super().__init__(
            "no power of the germ map is constant; recurrent germs: "
            + ", ".join(str(g) for g in cycle))
        self.cycle = tuple(cycle)


class NeverCovers(ValueError):
    def __init__(self, edge, bound):
        super().__init__(
            f"images of edge {edge!r} never contain every edge (bound {bound})")
        self.edge = edge
        self.bound = bound


class IdentityViolation(AssertionError):
    def __init__(self, identity, point):
        super().__init__(f"identity {identity} fails at {point}")
        self.identity = identity
        self.point = point


@dataclass(frozen=True, order=True)
class Germ:
    """A vertex germ: l is the arriving arc, r the departing arc."""

    l: str
    r: str

    def __str__(self):
        return self.l + self.r


def tau_of(system: SubstitutionSystem, germ: Germ) -> Germ:
    """The germ map, without an admissibility check."""
    return Germ(system.image(germ.l)[-1], system.image(germ.r)[0])


def admissible_germs(system: SubstitutionSystem) -> tuple:
    """All germs arising between adjacent letters of image words,
    closed under the germ map; sorted for determinism."""
    require_valid(system)
    found = set()
    frontier = []
    for e in system.edges:
        w = system.image(e)
        for i in range(len(w) - 1):
            g = Germ(w[i], w[i + 1])
            if g not in found:
                found.add(g)
                frontier.append(g)
    while frontier:
        g = tau_of(system, frontier.pop())
        if g not in found:
            found.add(g)
            frontier.append(g)
    return tuple(sorted(found))


def germ_map(system: SubstitutionSystem, germ: Germ) -> Germ:
    if germ not in admissible_germs(system):
        raise InadmissibleGerm(germ)
    return tau_of(system, germ)


def is_hausdorff(system: SubstitutionSystem) -> bool:
    """True iff no two distinct admissible germs share an approach arc."""
    germs = admissible_germs(system)
    lefts = [g.l for g in germs]
    rights = [g.r for g in germs]
    return len(set(lefts)) == len(germs) and len(set(rights)) == len(germs)


def non_separated_pairs(system: SubstitutionSystem) -> tuple:
    """Unordered pairs of distinct germs sharing an l- or r-coordinate."""
    germs = admissible_germs(system)
    pairs = []
    for i, g in enumerate(germs):
        for h in germs[i + 1:]:
            if g.l == h.l or g.r == h.r:
                pairs.append((g, h))
    return tuple(pairs)


def is_local_homeomorphism(system: SubstitutionSystem) -> bool:
    """Injectivity of the substitution on the star of half-edges at the
    vertex: arriving ends go to last letters, departing ends to first
    letters, and each class must map injectively."""
    require_valid(system)
    lasts = [system.image(e)[-1] for e in system.edges]
    firsts = [system.image(e)[0] for e in system.edges]
    return len(set(lasts)) == len(lasts) and len(set(firsts)) == len(firsts)


@dataclass(frozen=True)
class K0Constant:
    """Least k with tau^k constant on the admissible germ set."""

    value: int

    def __int__(self):
        return self.value


def k0_constant(system: SubstitutionSystem) -> K0Constant:
    germs = admissible_germs(system)
    current = set(germs)
    k = 0
    while len(current) > 1 and k < len(germs):
        current = {tau_of(system, g) for g in current}
        k += 1
    if len(current) > 1:
        raise NoFlattening(sorted(current))
    return K0Constant(k)


def constant_germ(system: SubstitutionSystem) -> Germ:
    """The common value of tau^K0 on the germ set."""
    k0 = k0_constant(system).value
    g = admissible_germs(system)[0]
    for _ in range(k0):
        g = tau_of(system, g)
    return g


@dataclass(frozen=True)
class QuotientPresentation:
    """Finite presentation of the quotient: one open arc per edge, the
    germ set over the vertex, the germ map, and the non-separation
    relation (germs sharing an approach arc cannot be separated by
    open sets)."""

    arcs: tuple
    germs: tuple
    tau: tuple          # pairs (germ, image germ), sorted by source
    nonsep: tuple       # unordered pairs of non-separated distinct germs
    hausdorff: bool
    local_homeomorphism: bool

    def tau_map(self):
        return dict(self.tau)

    def to_json(self):
        return {
            "arcs": list(self.arcs),
            "germs": [str(g) for g in self.germs],
            "tau": {str(g): str(h) for g, h in self.tau},
            "non_separated_pairs": [[str(g), str(h)] for g, h in self.nonsep],
            "hausdorff": self.hausdorff,
            "local_homeomorphism": self.local_homeomorphism,
            "model_assumption": "germ presentation of the metric quotient",
        }


def quotient_presentation(system: SubstitutionSystem) -> QuotientPresentation:
    germs = admissible_germs(system)
    return QuotientPresentation(
        arcs=tuple(system.edges),
        germs=germs,
        tau=tuple((g, tau_of(system, g)) for g in germs),
        nonsep=non_separated_pairs(system),
        hausdorff=is_hausdorff(system),
        local_homeomorphism=is_local_homeomorphism(system),
    )


def covering_time(system: SubstitutionSystem, e: str) -> int:
    """Least n >= 1 such that g^n(e) contains every edge letter, so the
    image of the open arc covers every arc and meets every germ
    neighborhood."""
    require_valid(system)
    if e not in system.edges:
        raise UnknownEdge(e)
    alphabet = set(system.edges)
    d = len(system.edges)
    bound = d * ((d - 1) ** 2 + 1)
    letters = {e}
    for n in range(1, bound + 1):
        letters = set().union(*[set(system.image(f)) for f in letters])
        if letters == alphabet:
            return n
    raise NeverCovers(e, bound)


IDENTITY_NAMES = (
    "collapse∘quotient_map = rose_map∘collapse",
    "lift∘rose_map = quotient_map∘lift",
    "collapse∘lift = rose_map^K0",
    "lift∘collapse = quotient_map^K0",
)


@dataclass(frozen=True)
class ShiftEquivalenceReport:
    k0: int
    constant_germ: Germ
    identities: tuple
    germ_points_checked: int
    interior_points_checked: int
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {
            "k0": self.k0,
            "constant_germ": str(self.constant_germ),
            "identities": list(self.identities),
            "germ_points_checked": self.germ_points_checked,
            "interior_points_checked": self.interior_points_checked,
            "ok": self.ok,
            "violations": [{"identity": v.identity, "point": v.point}
                           for v in self.violations],
        }


def shift_equivalence_check(system: SubstitutionSystem, n_points: int = 1000,
                            seed: int = 20260817) -> ShiftEquivalenceReport:
    """Exact verification of the four identities linking the rose map g,
    the quotient map, the collapse map r (germs to the vertex) and the
    lift s (points to their depth-K0 germ class).

    Checked on every germ, on the vertex, on a deterministic grid of
    subdivision-adjacent rationals, and on n_points seeded random
    rational interior points.  All arithmetic is exact.
    """
    from . import dynamics

    k0 = k0_constant(system).value
    germs = admissible_germs(system)
    const = constant_germ(system)

    rng = random.Random(seed)
    samples = []
    for e in system.edges:
        level = max(k0, 1)
        big = len(iterate_word(system, e, level))
        for den in {big, big + 1, len(system.image(e))}:
            for j in range(1, den):
                samples.append((e, Fraction(j, den)))
    for _ in range(n_points):
        e = rng.choice(system.edges)
        den = rng.randint(2, 997)
        num = rng.randint(1, den - 1)
        samples.append((e, Fraction(num, den)))

    violations = []

    def check(identity, point_label, lhs, rhs):
        if lhs != rhs:
            violations.append(IdentityViolation(identity, point_label))

    def g_rose(p, n=1):
        for _ in range(n):
            p = dynamics.apply_g_rose(system, p)
        return p

    def g_quot(p, n=1):
        for _ in range(n):
            p = dynamics.apply_g(system, p)
        return p

    def s(p):
        return dynamics.level_lift(system, k0, p)

    def r(p):
        return dynamics.collapse_map(p)

    quotient_pts = [dynamics.GermPoint(g) for g in germs]
    rose_pts = [dynamics.VERTEX]
    for e, t in samples:
        quotient_pts.append(dynamics.Interior(e, t))
        rose_pts.append(dynamics.Interior(e, t))

    for p in quotient_pts:
        check(IDENTITY_NAMES[0], str(p), r(g_quot(p)), g_rose(r(p)))
        check(IDENTITY_NAMES[3], str(p), s(r(p)), g_quot(p, k0))
    for p in rose_pts:
        check(IDENTITY_NAMES[1], str(p), s(g_rose(p)), g_quot(s(p)))
        check(IDENTITY_NAMES[2], str(p), r(s(p)), g_rose(p, k0))

    return ShiftEquivalenceReport(
        k0=k0,
        constant_germ=const,
        identities=IDENTITY_NAMES,
        germ_points_checked=len(germs),
        interior_points_checked=len(samples),
        violations=tuple(violations),
    )

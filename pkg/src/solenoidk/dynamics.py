"""Exact piecewise-linear dynamics of a rose substitution.

Every arc is an isometric copy of [0,1]; the substitution acts as the
orientation-preserving affine map wrapping each arc over its image
word with equal-length subintervals.  The module realizes both levels
of the construction: the rose itself (points are arc interiors plus
one vertex) and the vertex-split quotient (points are arc interiors
plus finitely many germs).  All coordinates are rationals, so point
dynamics, periodic-point counts, metric estimates, and cover
combinatorics are exact.
"""

from __future__ import annotations

import functools
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .germ_quotient import Germ, admissible_germs, k0_constant, tau_of
from .graph_substitution import (
    SubstitutionSystem,
    iterate_word,
    require_valid,
)


class DepthTooShallow(ValueError):
    """The truncated inverse-limit point has fewer coordinates than the
    flattening constant requires."""


class NoWitnessFound(ValueError):
    """The axiom witness search exhausted its grid; inconclusive."""


def _pmap(fn, items):
    """Order-preserving map, threaded when SOLENOIDK_THREADS > 1.

    Results are returned in input order, so output is identical for
    any thread count.
    """
    items = list(items)
    try:
        n = int(os.environ.get("SOLENOIDK_THREADS", "1"))
    except ValueError:
        n = 1
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- points


@dataclass(frozen=True, order=True)
class Interior:
    """A point in the open interior of an arc, at parameter 0 < t < 1."""

    edge: str
    t: Fraction

    def __post_init__(self):
        t = Fraction(self.t)
        object.__setattr__(self, "t", t)
        if not 0 < t < 1:
            raise ValueError(f"interior parameter must be in (0,1), got {t}")

    def __str__(self):
        return f"{self.edge}@{self.t}"


@dataclass(frozen=True, order=True)
class GermPoint:
    """A point of the quotient lying over the vertex."""

    germ: Germ

    def __str__(self):
        return f"germ {self.germ}"


class _Vertex:
    """The single wedge point of the rose."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VERTEX"

    def __str__(self):
        return "vertex"


VERTEX = _Vertex()


def apply_g(system: SubstitutionSystem, p):
    """One step of the quotient dynamics.

    Interior points follow the affine wrapping of their arc; a point
    landing between two letters becomes the germ of that adjacent
    pair; germ points follow the germ map.
    """
    if isinstance(p, GermPoint):
        return GermPoint(tau_of(system, p.germ))
    w = system.image(p.edge)
    pos = len(w) * p.t
    j = int(pos)
    if pos == j:
        return GermPoint(Germ(w[j - 1], w[j]))
    return Interior(w[j], pos - j)


def apply_g_rose(system: SubstitutionSystem, p):
    """One step of the rose dynamics (vertex collapsed)."""
    if p is VERTEX:
        return VERTEX
    w = system.image(p.edge)
    pos = len(w) * p.t
    j = int(pos)
    if pos == j:
        return VERTEX
    return Interior(w[j], pos - j)


def collapse_map(p):
    """Factor map from the quotient to the rose: every germ goes to the
    vertex, arc interiors are unchanged."""
    if isinstance(p, GermPoint):
        return VERTEX
    if isinstance(p, Interior):
        return p
    raise TypeError("collapse map is defined on quotient points")


def level_lift(system: SubstitutionSystem, k0: int, p):
    """Lift a rose point to the quotient through depth-k0 subdivision.

    The vertex lifts to the common value of the k0-th germ map power
    (k0 must be the flattening constant); an interior point lands in
    the k0-fold subdivision of its arc, on a cell interior or on the
    germ between two adjacent letters.
    """
    if p is VERTEX:
        g = admissible_germs(system)[0]
        for _ in range(k0):
            g = tau_of(system, g)
        return GermPoint(g)
    w = iterate_word(system, p.edge, k0)
    pos = len(w) * p.t
    j = int(pos)
    if pos == j:
        return GermPoint(Germ(w[j - 1], w[j]))
    return Interior(w[j], pos - j)


def rose_distance(p, q) -> Fraction:
    """Path metric on the rose with every arc of length 1."""
    if p is VERTEX and q is VERTEX:
        return Fraction(0)
    if p is VERTEX:
        return min(q.t, 1 - q.t)
    if q is VERTEX:
        return min(p.t, 1 - p.t)
    if p.edge == q.edge:
        u = abs(p.t - q.t)
        return min(u, 1 - u)
    return min(p.t, 1 - p.t) + min(q.t, 1 - q.t)


@functools.lru_cache(maxsize=None)
def branch_cells(system: SubstitutionSystem, edge: str, n: int):
    """Monotone branches of the n-fold map restricted to one arc.

    Returns ((letter, lo, hi), ...) in arc order: the n-fold map sends
    [lo, hi] affinely onto the whole arc named by letter.  Cell widths
    are non-uniform as soon as image lengths differ, and level n+1
    cells refine level n cells by construction.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    cells = [(edge, Fraction(0), Fraction(1))]
    for _ in range(n):
        refined = []
        for letter, lo, hi in cells:
            w = system.image(letter)
            step = (hi - lo) / len(w)
            for i, sub in enumerate(w):
                refined.append((sub, lo + i * step, lo + (i + 1) * step))
        cells = refined
    return tuple(cells)


# ---------------------------------------------- periodic points and zeta


def fix_count(system: SubstitutionSystem, n: int) -> int:
    """Number of fixed points of the n-th power of the quotient map.

    Closed form: per arc, occurrences of the arc letter in its n-fold
    image word, minus the occurrences anchored at either end of the
    word (those solutions sit at the vertex); plus the germs fixed by
    the n-th power of the germ map.
    """
    require_valid(system)
    if n < 1:
        raise ValueError("period must be >= 1")
    total = 0
    for e in system.edges:
        w = iterate_word(system, e, n)
        total += w.count(e) - (w[0] == e) - (w[-1] == e)
    for g in admissible_germs(system):
        h = g
        for _ in range(n):
            h = tau_of(system, h)
        if h == g:
            total += 1
    return total


def _interior_branch_solutions(system, e, n):
    """Interior fixed parameters of the n-fold map on arc e.

    Branch (e, lo, hi) maps [lo, hi] onto [0, 1] affinely, so the
    fixed-point equation (t - lo)/(hi - lo) = t has the unique
    solution t = lo/(1 - (hi - lo)); it sits at the vertex exactly
    when the branch is endpoint-anchored.
    """
    out = []
    for letter, lo, hi in branch_cells(system, e, n):
        if letter != e:
            continue
        t = lo / (1 - (hi - lo))
        if 0 < t < 1:
            out.append(t)
    return out


def fix_count_oracle(system: SubstitutionSystem, n: int) -> int:
    """Independent fixed-point count by per-branch equation solving.

    Every occurrence of an arc letter in its n-fold image word gives
    one affine branch; the branch fixed-point equation is solved in
    rationals, interior solutions are verified by actually iterating
    the quotient map n times, and vertex solutions are subsumed by the
    germ points, which are iterated directly.
    """
    require_valid(system)
    if n < 1:
        raise ValueError("period must be >= 1")
    count = 0
    for e in system.edges:
        for t in _interior_branch_solutions(system, e, n):
            p = Interior(e, t)
            q = p
            for _ in range(n):
                q = apply_g(system, q)
            assert q == p, f"branch solution {p} not fixed by iteration"
            count += 1
    for g in admissible_germs(system):
        p = GermPoint(g)
        q = p
        for _ in range(n):
            q = apply_g(system, q)
        if q == p:
            count += 1
    return count


def rose_fix_count(system: SubstitutionSystem, n: int) -> int:
    """Fixed points of the n-th power of the rose map (vertex counted
    once); equals the quotient count whenever exactly one germ is
    fixed by the n-th germ map power."""
    require_valid(system)
    if n < 1:
        raise ValueError("period must be >= 1")
    count = 1  # the vertex is always fixed
    for e in system.edges:
        for t in _interior_branch_solutions(system, e, n):
            p = Interior(e, t)
            q = p
            for _ in range(n):
                q = apply_g_rose(system, q)
            assert q == p
            count += 1
    return count


@dataclass(frozen=True)
class RationalGuess:
    """A numerator/denominator pair of polynomials (ascending
    coefficients) matching every available series coefficient."""

    numerator: tuple
    denominator: tuple

    def __str__(self):
        return f"({_poly_str(self.numerator)})/({_poly_str(self.denominator)})"

    def to_json(self):
        return {"numerator": [str(c) for c in self.numerator],
                "denominator": [str(c) for c in self.denominator],
                "pretty": str(self)}


def _poly_str(coeffs):
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            mon = "t" if i == 1 else f"t^{i}"
            if c == 1:
                parts.append(mon)
            elif c == -1:
                parts.append(f"-{mon}")
            else:
                parts.append(f"{c}{mon}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


@dataclass(frozen=True)
class ZetaSeries:
    """Fixed-point counts N_1..N_max plus an optional rational guess.

    The guess is a fit, reported only when a small rational function
    reproduces every available coefficient; it is never asserted."""

    counts: tuple
    guess: RationalGuess | None

    def to_json(self):
        return {"counts": list(self.counts),
                "guess": None if self.guess is None else self.guess.to_json()}


def zeta_series(system: SubstitutionSystem, n_max: int) -> ZetaSeries:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    counts = tuple(fix_count(system, n) for n in range(1, n_max + 1))
    return ZetaSeries(counts, _rational_zeta_guess(counts, len(system.edges)))


def _series_from_counts(counts):
    """Taylor coefficients of exp(sum N_n t^n / n) via the log-derivative
    recurrence n*z_n = sum N_i z_{n-i}."""
    z = [Fraction(1)]
    for n in range(1, len(counts) + 1):
        z.append(sum(Fraction(counts[i - 1]) * z[n - i]
                     for i in range(1, n + 1)) / n)
    return z


def _solve_linear(rows, rhs):
    """One exact solution of rows*x = rhs over Q, or None."""
    m = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    n_rows = len(m)
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    for i in range(r, n_rows):
        if m[i][-1] != 0:
            return None
    x = [Fraction(0)] * n_cols
    for i, c in enumerate(pivots):
        x[c] = m[i][-1]
    return x


def _rational_zeta_guess(counts, max_deg):
    """Smallest-degree rational function whose series matches all
    coefficients, with at least one surplus coefficient as evidence;
    None when nothing small enough fits."""
    n = len(counts)
    z = _series_from_counts(counts)
    for total in range(0, 2 * max_deg + 1):
        for q_deg in range(0, min(total, max_deg) + 1):
            p_deg = total - q_deg
            if p_deg > max_deg or n < p_deg + q_deg + 1:
                continue
            rows, rhs = [], []
            for k in range(n + 1):
                row = [z[k - i] if 1 <= i <= min(k, q_deg) else Fraction(0)
                       for i in range(1, q_deg + 1)]
                row += [Fraction(-1) if mdeg == k else Fraction(0)
                        for mdeg in range(p_deg + 1)]
                rows.append(row)
                rhs.append(-z[k])
            sol = _solve_linear(rows, rhs)
            if sol is None:
                continue
            den = (Fraction(1),) + tuple(sol[:q_deg])
            num = tuple(sol[q_deg:])
            return RationalGuess(numerator=num, denominator=den)
    return None


# --------------------------------------------- forward orbit expansiveness


@dataclass(frozen=True)
class CoverSpec:
    """Cover of the quotient: each arc is cut into the closed cells of
    its level-fold branch subdivision, and each germ gets one half-open
    neighborhood: the germ itself plus the interiors of the two arc end
    cells one level deeper (open at the inner cut, so the neighborhood
    stays clear of the next cut point)."""

    level: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("cover level must be >= 1")


@dataclass(frozen=True)
class ExpansivenessReport:
    level: int
    n_max: int
    grid_density: int
    point_count: int
    pair_count: int
    max_separation_time: int | None
    unseparated: tuple

    @property
    def all_separated(self):
        return not self.unseparated

    def to_json(self):
        return {
            "level": self.level,
            "n_max": self.n_max,
            "grid_density": self.grid_density,
            "point_count": self.point_count,
            "pair_count": self.pair_count,
            "max_separation_time": self.max_separation_time,
            "all_separated": self.all_separated,
            "unseparated": [list(pair) for pair in self.unseparated],
        }


def cover_membership(system: SubstitutionSystem, cover: CoverSpec, p) -> frozenset:
    """Ids of all cover elements containing the point.

    Arc elements are the closed branch cells ("cell", edge, index) of
    the level-fold map; each germ element ("germ", g) holds the germ
    itself plus the strict interiors of the end cells, one level
    deeper, on its incoming and outgoing arcs.  A cut point belongs to
    both adjacent closed cells.
    """
    if isinstance(p, GermPoint):
        return frozenset({("germ", p.germ)})
    cells = branch_cells(system, p.edge, cover.level)
    out = set()
    for j, (_, lo, hi) in enumerate(cells):
        if lo <= p.t <= hi:
            out.add(("cell", p.edge, j))
    deeper = branch_cells(system, p.edge, cover.level + 1)
    first_hi = deeper[0][2]
    last_lo = deeper[-1][1]
    for g in admissible_germs(system):
        if (p.edge == g.l and p.t > last_lo) or (p.edge == g.r and p.t < first_hi):
            out.add(("germ", g))
    return frozenset(out)


def forward_expansive_witness(system: SubstitutionSystem, cover: CoverSpec,
                              n_max: int = 20,
                              grid_density: int = 64) -> ExpansivenessReport:
    """Separation times of grid-point pairs under the quotient dynamics.

    For each unordered pair of distinct sample points (all germs plus
    all interior rationals j/grid_density), the least n <= n_max is
    found with the two n-step images sharing no cover element.  Pairs
    that never separate are reported as data.
    """
    require_valid(system)
    germs = admissible_germs(system)

    points = [GermPoint(g) for g in germs]
    for e in system.edges:
        for i in range(1, grid_density):
            points.append(Interior(e, Fraction(i, grid_density)))

    def orbit_elements(p):
        out = []
        for _ in range(n_max + 1):
            out.append(cover_membership(system, cover, p))
            p = apply_g(system, p)
        return out

    orbits = _pmap(orbit_elements, points)

    max_sep = None
    unseparated = []
    pair_count = 0
    for i in range(len(points)):
        for k in range(i + 1, len(points)):
            pair_count += 1
            sep = next((n for n in range(n_max + 1)
                        if not (orbits[i][n] & orbits[k][n])), None)
            if sep is None:
                unseparated.append((str(points[i]), str(points[k])))
            elif max_sep is None or sep > max_sep:
                max_sep = sep
    return ExpansivenessReport(
        level=cover.level,
        n_max=n_max,
        grid_density=grid_density,
        point_count=len(points),
        pair_count=pair_count,
        max_separation_time=max_sep,
        unseparated=tuple(unseparated),
    )


# --------------------------------------------------- metric axiom witness


def _normalize_intervals(intervals):
    """Clip to [0,1], sort, and merge closed overlapping/touching."""
    iv = []
    for lo, hi in intervals:
        lo, hi = max(Fraction(0), lo), min(Fraction(1), hi)
        if lo <= hi:
            iv.append((lo, hi))
    iv.sort()
    merged = []
    for lo, hi in iv:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return [tuple(p) for p in merged]


class _SegmentSet:
    """Finite unions of closed subintervals of each arc, plus a vertex
    flag; supports exact image under the substitution and containment."""

    def __init__(self, system, per_edge=None, has_vertex=False):
        self.system = system
        self.per_edge = {e: [] for e in system.edges}
        if per_edge:
            for e, iv in per_edge.items():
                self.per_edge[e] = _normalize_intervals(iv)
        self.has_vertex = has_vertex

    def image(self):
        out = {e: [] for e in self.system.edges}
        vertex = self.has_vertex
        for e, ivs in self.per_edge.items():
            w = self.system.image(e)
            big = len(w)
            for a, b in ivs:
                lo, hi = big * a, big * b
                if math.ceil(lo) <= math.floor(hi):
                    vertex = True
                for j in range(big):
                    s, t = max(lo, Fraction(j)), min(hi, Fraction(j + 1))
                    if s <= t:
                        out[w[j]].append((s - j, t - j))
        return _SegmentSet(self.system, out, vertex)

    def image_power(self, n):
        s = self
        for _ in range(n):
            s = s.image()
        return s

    def contains(self, other):
        """Whether other (as a point set) is a subset of self."""
        if other.has_vertex and not self.has_vertex:
            return False
        for e in self.system.edges:
            cover = list(self.per_edge[e])
            if self.has_vertex:
                cover.extend([(Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))])
            cover = _normalize_intervals(cover)
            for a, b in other.per_edge[e]:
                if not any(lo <= a and b <= hi for lo, hi in cover):
                    return False
        return True


def metric_ball(system: SubstitutionSystem, center, eps: Fraction) -> _SegmentSet:
    """Closed ball of the rose path metric, as exact segments."""
    eps = Fraction(eps)
    if eps <= 0 or eps > Fraction(1, 2):
        raise ValueError("ball radius must be in (0, 1/2]")
    per_edge = {}
    if center is VERTEX:
        for e in system.edges:
            per_edge[e] = [(Fraction(0), eps), (1 - eps, Fraction(1))]
        return _SegmentSet(system, per_edge, has_vertex=True)
    t = center.t
    for e in system.edges:
        iv = []
        dv = min(t, 1 - t)
        if e == center.edge:
            iv.append((t - eps, t + eps))
            if t + eps > 1:
                iv.append((Fraction(0), t + eps - 1))
            if t - eps < 0:
                iv.append((t - eps + 1, Fraction(1)))
        elif dv <= eps:
            iv.append((Fraction(0), eps - dv))
            iv.append((1 - (eps - dv), Fraction(1)))
        per_edge[e] = iv
    return _SegmentSet(system, per_edge, has_vertex=min(t, 1 - t) <= eps)


@dataclass(frozen=True)
class WielerWitness:
    """Grid parameters under which both metric axioms held on every
    sampled configuration.  A sampling certificate, not a proof."""

    k: int
    gamma: Fraction
    beta: Fraction
    axiom1_pairs_checked: int
    axiom2_checks: int

    def to_json(self):
        return {
            "k": self.k,
            "gamma": str(self.gamma),
            "beta": str(self.beta),
            "axiom1_pairs_checked": self.axiom1_pairs_checked,
            "axiom2_checks": self.axiom2_checks,
            "kind": "sampling witness",
        }


def _structured_probes(system, k):
    """Pairs likely to witness metric-axiom failures: same-offset pairs
    in cells carrying equal letters of the 2k-fold map (their 2k-step
    images collide exactly), vertex-anchored cut points, and pairs
    straddling cut points."""
    pairs = []
    for e in system.edges:
        cells = branch_cells(system, e, 2 * k)
        by_letter = {}
        for j, (letter, lo, hi) in enumerate(cells):
            by_letter.setdefault(letter, []).append((lo, hi))
        for spans in by_letter.values():
            for (lo1, hi1), (lo2, hi2) in list(zip(spans, spans[1:]))[:40]:
                for u in (Fraction(1, 2), Fraction(1, 3)):
                    pairs.append((Interior(e, lo1 + u * (hi1 - lo1)),
                                  Interior(e, lo2 + u * (hi2 - lo2))))
        cuts = [lo for _, lo, _ in cells[1:]]
        if not cuts:
            continue
        anchors = sorted({cuts[0], cuts[-1], cuts[len(cuts) // 2],
                          min(cuts, key=lambda c: min(c, 1 - c))})
        widths = [hi - lo for _, lo, hi in cells]
        for c in anchors:
            pairs.append((VERTEX, Interior(e, c)))
        for j, c in enumerate(cuts):
            if j % max(1, len(cuts) // 8) != 0 and c not in anchors:
                continue
            step = min(widths[j], widths[j + 1])
            for u in (Fraction(1, 3), Fraction(1, 7)):
                lo, hi = c - u * step, c + u * step
                if 0 < lo and hi < 1:
                    pairs.append((Interior(e, lo), Interior(e, hi)))
    return pairs


def _random_nearby_pairs(system, beta, sample_count, seed, k):
    """sample_count seeded rational pairs at distance <= beta exactly:
    vertex-to-point, same-arc offsets, and cross-arc pairs near the
    vertex."""
    rng = random.Random(f"{seed}:{k}:{beta}")
    pairs = []
    while len(pairs) < sample_count:
        frac = Fraction(rng.randint(1, 32), 32)
        delta = beta * frac
        mode = rng.randrange(3)
        e = rng.choice(system.edges)
        if mode == 0:
            t = delta if rng.random() < 0.5 else 1 - delta
            pairs.append((VERTEX, Interior(e, t)))
        elif mode == 1:
            den = rng.randint(16, 127)
            t = Fraction(rng.randint(1, den - 1), den)
            if 0 < t + delta < 1:
                pairs.append((Interior(e, t), Interior(e, t + delta)))
            elif 0 < t - delta < 1:
                pairs.append((Interior(e, t), Interior(e, t - delta)))
        else:
            e2 = rng.choice(system.edges)
            d1, d2 = delta / 2, delta / 4
            t1 = d1 if rng.random() < 0.5 else 1 - d1
            t2 = d2 if rng.random() < 0.5 else 1 - d2
            pairs.append((Interior(e, t1), Interior(e2, t2)))
    return pairs


def wieler_axiom_witness(system: SubstitutionSystem, k_max: int = 3,
                         sample_count: int = 200, seed: int = 20260817,
                         gamma_grid=None, beta_grid=None) -> WielerWitness:
    """Search grid parameters (k, gamma, beta) for the two metric
    axioms of an expanding factor presentation.

    Axiom 1 demands that for sampled pairs at distance <= beta, the
    k-step distance is at most gamma^k times the 2k-step distance.
    Axiom 2 demands, for sampled centers x and radii eps <= beta, that
    the k-fold image of the ball of radius eps around the k-step image
    of x lies inside the 2k-fold image of the ball of radius
    gamma*eps around x; ball images are propagated exactly as segment
    unions.  First grid triple passing every check wins; exhaustion
    raises NoWitnessFound (inconclusive, not a refutation).
    """
    require_valid(system)
    gammas = tuple(gamma_grid) if gamma_grid is not None else (
        Fraction(1, 2), Fraction(9, 16), Fraction(5, 8),
        Fraction(11, 16), Fraction(3, 4))
    betas = tuple(beta_grid) if beta_grid is not None else (
        Fraction(1, 2), Fraction(1, 4), Fraction(1, 8),
        Fraction(1, 16), Fraction(1, 32), Fraction(1, 64))
    last_failure = None

    def metric_data(k):
        def compute(pair):
            x, y = pair
            xs, ys = x, y
            d0 = rose_distance(x, y)
            for _ in range(k):
                xs, ys = apply_g_rose(system, xs), apply_g_rose(system, ys)
            dk = rose_distance(xs, ys)
            for _ in range(k):
                xs, ys = apply_g_rose(system, xs), apply_g_rose(system, ys)
            d2k = rose_distance(xs, ys)
            return d0, dk, d2k
        return compute

    for k in range(1, k_max + 1):
        probes = _structured_probes(system, k)
        probe_data = _pmap(metric_data(k), probes)
        random_cache = {}

        centers = [VERTEX]
        for e in system.edges:
            cells = branch_cells(system, e, k)
            ts = {Fraction(j, 7) for j in range(1, 7)}
            ts |= {cells[0][2], cells[-1][1], cells[0][2] / 2}
            centers.extend(Interior(e, t) for t in sorted(ts) if 0 < t < 1)

        for gamma in gammas:
            scale = gamma ** k
            for beta in betas:
                if beta not in random_cache:
                    extra = _random_nearby_pairs(system, beta, sample_count,
                                                 seed, k)
                    random_cache[beta] = list(zip(extra, _pmap(metric_data(k),
                                                               extra)))
                ok = True
                checked = 0
                rows = [*zip(probes, probe_data), *random_cache[beta]]
                for (x, y), (d0, dk, d2k) in rows:
                    if d0 > beta:
                        continue
                    checked += 1
                    if dk > scale * d2k:
                        ok = False
                        last_failure = (k, str(gamma), str(beta), str(x), str(y))
                        break
                if not ok:
                    continue
                ball_checks = 0
                for x in centers:
                    if not ok:
                        break
                    z = x
                    for _ in range(k):
                        z = apply_g_rose(system, z)
                    for eps in (beta, Fraction(2, 3) * beta, Fraction(1, 3) * beta):
                        lhs = metric_ball(system, z, eps).image_power(k)
                        rhs = metric_ball(system, x, gamma * eps).image_power(2 * k)
                        ball_checks += 1
                        if not rhs.contains(lhs):
                            ok = False
                            last_failure = (k, str(gamma), str(beta), str(x),
                                            f"ball eps={eps}")
                            break
                if ok:
                    return WielerWitness(k=k, gamma=gamma, beta=beta,
                                         axiom1_pairs_checked=checked,
                                         axiom2_checks=ball_checks)
    err = NoWitnessFound(f"grid exhausted; last failure: {last_failure}")
    err.last_failure = last_failure
    raise err


# ------------------------------------------------- truncated inverse limit


@dataclass(frozen=True)
class SolenoidPoint:
    """Truncated inverse-limit point: coords = (x0, x1, ..., xm) with
    every consecutive pair satisfying map(x_{i+1}) = x_i exactly."""

    coords: tuple

    @property
    def depth(self):
        return len(self.coords) - 1


def solenoid_point(system: SubstitutionSystem, coords) -> SolenoidPoint:
    coords = tuple(coords)
    if not coords:
        raise ValueError("a truncated point needs at least one coordinate")
    for i in range(len(coords) - 1):
        if apply_g_rose(system, coords[i + 1]) != coords[i]:
            raise ValueError(f"coordinates {i} and {i + 1} are incompatible")
    return SolenoidPoint(coords)


def solenoid_apply_phi(system: SubstitutionSystem, x: SolenoidPoint) -> SolenoidPoint:
    """Shift the truncated point forward: prepend the image of the head."""
    return SolenoidPoint((apply_g_rose(system, x.coords[0]),) + x.coords)


def delete_head(x: SolenoidPoint) -> SolenoidPoint:
    if len(x.coords) < 2:
        raise ValueError("cannot delete the only coordinate")
    return SolenoidPoint(x.coords[1:])


def truncate(x: SolenoidPoint, depth: int) -> SolenoidPoint:
    if depth < 0 or depth > x.depth:
        raise ValueError("truncation depth out of range")
    return SolenoidPoint(x.coords[:depth + 1])


def p_map(system: SubstitutionSystem, x: SolenoidPoint):
    """Quotient point of a truncated inverse-limit point.

    An interior head is its own quotient point; a vertex head is
    resolved to a germ by the coordinate at the flattening depth."""
    k0 = k0_constant(system).value
    if x.depth < k0:
        raise DepthTooShallow(
            f"need depth >= {k0}, got {x.depth}")
    return level_lift(system, k0, x.coords[k0])

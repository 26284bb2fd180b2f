"""Substitution systems on rose graphs.

A system is a finite set of oriented loop edges at a single vertex
together with an image word for every edge.  This module validates the
structural conditions an expanding substitution must satisfy, builds
the occurrence-count matrix, iterates words, tests primitivity, and
encloses the topological entropy (log of the Perron root) in exact
rational bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from .abelian import IntMatrix


class UnknownEdge(ValueError):
    """An image word uses a letter that is not a declared edge."""

    def __init__(self, letter):
        super().__init__(f"unknown edge label {letter!r} in image word")
        self.letter = letter


class ValidationError(ValueError):
    """Base class for structural violations; carries the offending edge."""

    kind = "ValidationError"

    def __init__(self, edge, message):
        super().__init__(message)
        self.edge = edge

    def to_json(self):
        return {"kind": self.kind, "edge": self.edge}


class EmptyImage(ValidationError):
    kind = "EmptyImage"

    def __init__(self, edge):
        super().__init__(edge, f"edge {edge!r} has an empty image word")


class NonSurjective(ValidationError):
    kind = "NonSurjective"

    def __init__(self, edge):
        super().__init__(edge, f"edge {edge!r} occurs in no image word")


class NonExpanding(ValidationError):
    kind = "NonExpanding"

    def __init__(self, edge):
        super().__init__(edge, f"edge {edge!r} never reaches image length 2")


class PrecisionUnreachable(ValueError):
    """The requested enclosure width cannot be met (it is not positive)."""


@dataclass(frozen=True)
class SubstitutionSystem:
    """Oriented rose substitution: edges with one image word per edge.

    Edge labels are single characters so image words parse without
    ambiguity.  Only orientation-preserving substitutions are accepted.
    """

    edges: tuple
    images: tuple
    orientation_preserving: bool = True

    def __post_init__(self):
        if not self.edges:
            raise ValueError("a system needs at least one edge")
        for e in self.edges:
            if not isinstance(e, str) or len(e) != 1:
                raise ValueError(f"edge label {e!r} must be a single character")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("edge labels must be distinct")
        if len(self.images) != len(self.edges):
            raise ValueError("one image word per edge is required")
        alphabet = set(self.edges)
        for w in self.images:
            for ch in w:
                if ch not in alphabet:
                    raise UnknownEdge(ch)
        if not self.orientation_preserving:
            raise ValueError("orientation-reversing substitutions are not supported")

    @classmethod
    def of(cls, edges, images):
        """Build from an edge sequence and a mapping edge -> image word."""
        edges = tuple(edges)
        missing = [e for e in edges if e not in images]
        if missing:
            raise ValueError(f"no image word for edge {missing[0]!r}")
        extra = [e for e in images if e not in edges]
        if extra:
            raise UnknownEdge(extra[0])
        return cls(edges=edges, images=tuple(images[e] for e in edges))

    def image(self, e):
        try:
            return self.images[self.edges.index(e)]
        except ValueError:
            raise UnknownEdge(e) from None

    def image_map(self):
        return dict(zip(self.edges, self.images))

    def __str__(self):
        rules = ", ".join(f"{e}→{w}" for e, w in zip(self.edges, self.images))
        return f"⟨{rules}⟩"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def raise_first(self):
        if self.violations:
            raise self.violations[0]

    def to_json(self):
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


def validate(system: SubstitutionSystem) -> ValidationReport:
    """Check the structural conditions for an expanding substitution.

    Stages are checked in order of severity (empty images, then
    surjectivity, then expansion) and only the first failing stage is
    reported: later stages are not meaningful when an earlier one
    fails.  These are necessary symbolic conditions only, not a
    certificate for the metric axioms.
    """
    empty = tuple(EmptyImage(e) for e, w in zip(system.edges, system.images) if not w)
    if empty:
        return ValidationReport(empty)

    seen = set().union(*[set(w) for w in system.images])
    missing = tuple(NonSurjective(e) for e in system.edges if e not in seen)
    if missing:
        return ValidationReport(missing)

    # |g^(n+1)(e)| = sum of |g^n(f)| over letters f of g(e); once a length
    # reaches 2 it stays >= 2, so checking at n = |edges| suffices.
    d = len(system.edges)
    lengths = {e: 1 for e in system.edges}
    for _ in range(d):
        lengths = {e: sum(lengths[f] for f in system.image(e)) for e in system.edges}
    stuck = tuple(NonExpanding(e) for e in system.edges if lengths[e] < 2)
    return ValidationReport(stuck)


def require_valid(system: SubstitutionSystem):
    validate(system).raise_first()


def substitution_matrix(system: SubstitutionSystem) -> IntMatrix:
    """Occurrence matrix M[e][f] = count of e in the image of f.

    Rows and columns follow the declared edge order; column sums are
    the image word lengths.
    """
    return IntMatrix.from_rows(
        [[system.image(f).count(e) for f in system.edges] for e in system.edges])


def substitute_word(system: SubstitutionSystem, word: str) -> str:
    img = system.image_map()
    return "".join(img[ch] for ch in word)


def iterate_word(system: SubstitutionSystem, word: str, n: int) -> str:
    """The n-fold substitution image of a word (typically a single edge)."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    for ch in word:
        if ch not in system.edges:
            raise UnknownEdge(ch)
    for _ in range(n):
        word = substitute_word(system, word)
    return word


def is_mixing(system: SubstitutionSystem) -> bool:
    """Primitivity of the substitution matrix, checked exactly.

    Uses the Wielandt bound: a primitive d x d matrix has a positive
    power of exponent at most (d-1)^2 + 1.
    """
    require_valid(system)
    m = substitution_matrix(system)
    d = m.rows
    bound = (d - 1) ** 2 + 1
    p = m
    for _ in range(bound):
        if all(x > 0 for row in p.entries for x in row):
            return True
        p = p.mul(m)
    return False


@dataclass(frozen=True)
class EntropyEnclosure:
    """Certified rational enclosure of log(Perron root).

    root_lo < root < root_hi with a sign change of the square-free
    characteristic polynomial across the bracket; value_lo <= log(root)
    <= value_hi.  exact_root is set when the root is rational.
    """

    value_lo: Fraction
    value_hi: Fraction
    root_lo: Fraction
    root_hi: Fraction
    exact_root: Fraction | None
    charpoly: tuple
    squarefree: tuple

    @property
    def width(self):
        return self.value_hi - self.value_lo

    def decimal(self, digits=12):
        mid = (self.value_lo + self.value_hi) / 2
        return _format_fraction(mid, digits)

    def to_json(self):
        return {
            "log_lo": str(self.value_lo),
            "log_hi": str(self.value_hi),
            "root_lo": str(self.root_lo),
            "root_hi": str(self.root_hi),
            "exact_root": None if self.exact_root is None else str(self.exact_root),
            "decimal": self.decimal(),
            "charpoly": list(self.charpoly),
        }


def _format_fraction(x: Fraction, digits: int) -> str:
    sign = "-" if x < 0 else ""
    x = abs(x)
    scaled = round(x * 10 ** digits)
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


def _eval_poly(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _atanh_series(u: Fraction, eps: Fraction) -> tuple:
    """Enclosure of 2*atanh(u) = log((1+u)/(1-u)) for 0 <= u < 1/2."""
    total = Fraction(0)
    term = u
    k = 0
    u2 = u * u
    while True:
        total += 2 * term / (2 * k + 1)
        # tail of 2*sum u^(2j+1)/(2j+1) for j > k, geometric bound
        tail = 2 * term * u2 / ((2 * k + 3) * (1 - u2))
        if tail <= eps:
            return total, total + tail
        term *= u2
        k += 1


def _log2_enclosure(eps: Fraction) -> tuple:
    return _atanh_series(Fraction(1, 3), eps)


def log_enclosure(x: Fraction, eps: Fraction) -> tuple:
    """Rational lo <= log(x) <= hi with hi - lo <= eps, for x > 0."""
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    j = 0
    y = Fraction(x)
    while y >= 2:
        y /= 2
        j += 1
    while y < 1:
        y *= 2
        j -= 1
    u = (y - 1) / (y + 1)
    lo_y, hi_y = _atanh_series(u, eps / 2)
    if j == 0:
        return lo_y, hi_y
    lo_2, hi_2 = _log2_enclosure(eps / (2 * abs(j)))
    if j > 0:
        return lo_y + j * lo_2, hi_y + j * hi_2
    return lo_y + j * hi_2, hi_y + j * lo_2


def _charpoly_coeffs(m: IntMatrix) -> tuple:
    x = sympy.Symbol("x")
    poly = sympy.Matrix(m.tolist()).charpoly(x)
    return tuple(int(c) for c in poly.all_coeffs())


def _squarefree_coeffs(coeffs) -> tuple:
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(coeffs), x).sqf_part()
    return tuple(int(c) for c in poly.all_coeffs())


def _positive_divisors(n):
    n = abs(n)
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            out.add(n // d)
        d += 1
    return out


def _largest_root_bracket(coeffs, rel_width: Fraction):
    """Bracket (lo, hi) around the largest real root of a square-free
    monic integer polynomial with a root strictly greater than 1.

    Returns (lo, hi, exact) with lo < root < hi, poly(lo)*poly(hi) < 0,
    and hi - lo <= rel_width * lo; exact is the root when rational
    (always detected: rational roots of a monic integer polynomial are
    integers dividing the constant term).
    """
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(coeffs), x)
    bound = 1 + max(abs(c) for c in coeffs)

    def roots_above(a, b):
        # number of roots in the half-open interval (a, b]
        n = poly.count_roots(sympy.Rational(a.numerator, a.denominator),
                             sympy.Rational(b.numerator, b.denominator))
        if _eval_poly(coeffs, a) == 0:
            n -= 1
        return n

    stripped = list(coeffs)
    while stripped[-1] == 0:
        stripped.pop()
    exact = None
    for d in sorted((d for d in _positive_divisors(stripped[-1]) if 1 < d <= bound),
                    reverse=True):
        if _eval_poly(coeffs, Fraction(d)) == 0:
            if roots_above(Fraction(d), Fraction(bound)) == 0:
                exact = Fraction(d)
            break  # roots above the largest rational root are irrational

    if exact is not None:
        w = Fraction(1, 2)
        while (roots_above(exact - w, exact + w) != 1
               or _eval_poly(coeffs, exact - w) == 0
               or 2 * w > rel_width * (exact - w)):
            w /= 2
        return exact - w, exact + w, exact

    lo, hi = Fraction(1), Fraction(bound)
    while True:
        m = (lo + hi) / 2
        if roots_above(m, hi) >= 1:
            lo = m
        else:
            assert _eval_poly(coeffs, m) != 0  # rational roots were handled above
            hi = m
        if (hi - lo) <= rel_width * lo and _eval_poly(coeffs, lo) != 0 \
                and roots_above(lo, hi) == 1:
            return lo, hi, None


def entropy(system: SubstitutionSystem, tol: Fraction = Fraction(1, 10 ** 10)) -> EntropyEnclosure:
    """Topological entropy log(Perron root) with a certified enclosure.

    The Perron root is bracketed by bisection on the square-free part
    of the characteristic polynomial (sign change certified), then the
    logarithm is enclosed by an exact rational series.  The result has
    value_hi - value_lo <= tol; everything on this path is rational
    arithmetic.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise PrecisionUnreachable("enclosure width must be positive")
    require_valid(system)
    coeffs = _charpoly_coeffs(substitution_matrix(system))
    sqf = _squarefree_coeffs(coeffs)
    lo, hi, exact = _largest_root_bracket(sqf, tol / 4)
    # log hi - log lo <= (hi - lo)/lo <= tol/4; series adds <= tol/4 per side
    v_lo, _ = log_enclosure(lo, tol / 8)
    _, v_hi = log_enclosure(hi, tol / 8)
    assert v_hi - v_lo <= tol
    return EntropyEnclosure(value_lo=v_lo, value_hi=v_hi, root_lo=lo, root_hi=hi,
                            exact_root=exact, charpoly=coeffs, squarefree=sqf)

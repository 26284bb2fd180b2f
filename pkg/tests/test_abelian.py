"""Tests for exact integer linear algebra and colimit groups."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoidk.abelian import (
    ColimitGroup,
    FgGroup,
    IncompatibleEndo,
    IntMatrix,
    NonCommuting,
    cokernel,
    colim_element_eq,
    colimit,
    hermite_columns,
    induced_ker_coker,
    kernel_basis,
    kernel_rank,
    lattice_member,
    lattice_preimage,
    smith_normal_form,
    solve_integer,
)


def rand_matrix(rng, r, c, lo=-100, hi=100):
    return IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)])


def rand_unimodular(rng, n, ops=12):
    """Product of elementary column operations applied to the identity."""
    m = [list(row) for row in IntMatrix.identity(n).entries]
    if n < 2:
        return IntMatrix.from_rows(m)
    for _ in range(ops):
        i, j = rng.sample(range(n), 2)
        k = rng.randint(-3, 3)
        for row in m:
            row[j] += k * row[i]
    return IntMatrix.from_rows(m)


class TestIntMatrix:
    def test_identity_product(self):
        a = IntMatrix.from_rows([[1, 2], [3, 4]])
        assert a.mul(IntMatrix.identity(2)) == a
        assert IntMatrix.identity(2).mul(a) == a

    def test_power(self):
        a = IntMatrix.from_rows([[1, 1], [0, 1]])
        assert a.power(7)[0, 1] == 7
        assert a.power(0) == IntMatrix.identity(2)

    def test_det_known(self):
        assert IntMatrix.from_rows([[1, 2], [3, 4]]).det() == -2
        assert IntMatrix.from_rows([[2, 4], [1, 2]]).det() == 0
        assert IntMatrix.identity(3).det() == 1
        assert IntMatrix.zeros(0, 0).det() == 1

    def test_det_matches_cofactor_3x3(self):
        rng = random.Random(7)
        for _ in range(50):
            m = rand_matrix(rng, 3, 3, -9, 9)
            e = m.entries
            cof = (e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                   - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                   + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]))
            assert m.det() == cof

    def test_rank(self):
        assert IntMatrix.from_rows([[1, 2], [2, 4]]).rank() == 1
        assert IntMatrix.from_rows([[0, -1, 1], [0, 1, -1]]).rank() == 1
        assert IntMatrix.identity(4).rank() == 4
        assert IntMatrix.zeros(3, 2).rank() == 0

    def test_degenerate_shapes(self):
        a = IntMatrix.zeros(2, 0)
        b = IntMatrix.zeros(0, 3)
        assert a.mul(b) == IntMatrix.zeros(2, 3)
        assert a.transpose() == IntMatrix.zeros(0, 2)
        assert b.transpose() == IntMatrix.zeros(3, 0)


class TestSmith:
    def test_known_forms(self):
        sf = smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]]))
        assert sf.divisors() == (2, 4)
        sf = smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 3]]))
        assert sf.divisors() == (1, 6)
        sf = smith_normal_form(IntMatrix.from_rows([[0, -1, 1], [0, 1, -1]]))
        assert sf.divisors() == (1, 0)

    def check_form(self, a, sf):
        assert sf.u.mul(sf.s).mul(sf.v) == a
        assert abs(sf.u.det()) == 1
        assert abs(sf.v.det()) == 1
        assert sf.u.mul(sf.u_inv) == IntMatrix.identity(a.rows)
        assert sf.v.mul(sf.v_inv) == IntMatrix.identity(a.cols)
        d = sf.divisors()
        assert all(x >= 0 for x in d)
        for i in range(len(d) - 1):
            if d[i] == 0:
                assert d[i + 1] == 0
            else:
                assert d[i + 1] % d[i] == 0
        for i in range(min(sf.s.rows, sf.s.cols), sf.s.rows):
            assert all(x == 0 for x in sf.s.row(i))
        for i in range(sf.s.rows):
            for j in range(sf.s.cols):
                if i != j:
                    assert sf.s[i, j] == 0

    def test_random_roundtrip(self):
        rng = random.Random(20260817)
        for _ in range(120):
            r = rng.randint(1, 5)
            c = rng.randint(1, 5)
            a = rand_matrix(rng, r, c, -30, 30)
            self.check_form(a, smith_normal_form(a))

    def test_rank_nullity(self):
        rng = random.Random(99)
        for _ in range(80):
            a = rand_matrix(rng, rng.randint(1, 5), rng.randint(1, 5), -20, 20)
            assert a.rank() + kernel_rank(a) == a.cols
            kb = kernel_basis(a)
            assert kb.cols == kernel_rank(a)
            for j in range(kb.cols):
                assert all(x == 0 for x in a.mul_vec(kb.col(j)))

    def test_coker_order_equals_det(self):
        rng = random.Random(5)
        n = 0
        while n < 60:
            a = rand_matrix(rng, 4, 4, -10, 10)
            d = a.det()
            if d == 0:
                continue
            n += 1
            assert cokernel(a).order() == abs(d)

    def test_zero_and_empty(self):
        sf = smith_normal_form(IntMatrix.zeros(3, 2))
        assert sf.divisors() == (0, 0)
        sf = smith_normal_form(IntMatrix.zeros(2, 0))
        assert sf.divisors() == ()
        assert kernel_basis(IntMatrix.zeros(2, 0)).cols == 0


class TestHermite:
    def test_lattice_invariance(self):
        rng = random.Random(41)
        for _ in range(60):
            n = rng.randint(1, 4)
            c = rng.randint(1, 4)
            a = rand_matrix(rng, n, c, -15, 15)
            w = rand_unimodular(rng, c)
            assert hermite_columns(a) == hermite_columns(a.mul(w))

    def test_idempotent(self):
        rng = random.Random(42)
        for _ in range(40):
            a = rand_matrix(rng, 3, 3, -15, 15)
            h = hermite_columns(a)
            assert hermite_columns(h) == h

    def test_known(self):
        a = IntMatrix.from_rows([[1, 0], [0, 1], [0, 1]])
        assert hermite_columns(a) == a
        shuffled = IntMatrix.from_rows([[0, 1], [1, 1], [1, 1]])
        assert hermite_columns(shuffled) == a

    def test_drops_zero_columns(self):
        a = IntMatrix.from_rows([[0, 2], [0, 0]])
        h = hermite_columns(a)
        assert (h.rows, h.cols) == (2, 1)
        assert h.col(0) == (2, 0)


class TestSolve:
    def test_roundtrip(self):
        rng = random.Random(17)
        for _ in range(80):
            r = rng.randint(1, 4)
            c = rng.randint(1, 4)
            a = rand_matrix(rng, r, c, -9, 9)
            x = tuple(rng.randint(-9, 9) for _ in range(c))
            b = a.mul_vec(x)
            sol = solve_integer(a, b)
            assert sol is not None
            assert a.mul_vec(sol) == b

    def test_unsolvable(self):
        assert solve_integer(IntMatrix.from_rows([[2]]), (1,)) is None
        assert solve_integer(IntMatrix.from_rows([[1], [1]]), (0, 1)) is None

    def test_lattice_member(self):
        basis = IntMatrix.from_rows([[1, 0], [0, 1], [0, 1]])
        assert lattice_member(basis, (5, 2, 2))
        assert not lattice_member(basis, (0, 1, 2))

    def test_preimage(self):
        f = IntMatrix.from_rows([[2]])
        lat = lattice_preimage(f, IntMatrix.from_rows([[4]]))
        assert lat == IntMatrix.from_rows([[2]])
        lat = lattice_preimage(f, IntMatrix.from_rows([[2]]))
        assert lat == IntMatrix.from_rows([[1]])


class TestFgGroup:
    def test_render(self):
        assert str(FgGroup(0)) == "0"
        assert str(FgGroup(1)) == "Z"
        assert str(FgGroup(2, (3,))) == "Z^2 ⊕ Z/3"
        assert str(FgGroup(0, (2, 4))) == "Z/2 ⊕ Z/4"
        assert str(FgGroup(1, (2,))) == "Z ⊕ Z/2"

    def test_validation(self):
        with pytest.raises(ValueError):
            FgGroup(0, (3, 2))
        with pytest.raises(ValueError):
            FgGroup(0, (1,))

    def test_order(self):
        assert FgGroup(1).order() is None
        assert FgGroup(0, (2, 4)).order() == 8
        assert FgGroup(0).order() == 1

    def test_cokernel_examples(self):
        assert cokernel(IntMatrix.from_rows([[2, 0], [0, 0]])) == FgGroup(1, (2,))
        assert cokernel(IntMatrix.from_rows([[0, -1, 1], [0, 1, -1]])) == FgGroup(1)
        assert cokernel(IntMatrix.identity(3)) == FgGroup(0)


class TestColimit:
    def test_z_inverted_prime(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[2]]))
        assert g.pretty == "Z[1/2]"
        assert g.stable_rank == 1
        assert g.recognized() is None
        g = colimit(FgGroup(1), IntMatrix.from_rows([[-3]]))
        assert g.pretty == "Z[1/3]"

    def test_unimodular_base(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[1]]))
        assert g.pretty == "Z"
        assert g.recognized() == FgGroup(1)
        g = colimit(FgGroup(2), IntMatrix.from_rows([[2, 1], [1, 1]]))
        assert g.pretty == "Z^2"
        assert g.recognized() == FgGroup(2)

    def test_finite_torsion(self):
        g = colimit(FgGroup(0, (6,)), IntMatrix.from_rows([[3]]))
        assert g.recognized() == FgGroup(0, (2,))
        g = colimit(FgGroup(0, (4,)), IntMatrix.from_rows([[2]]))
        assert g.pretty == "0"
        g = colimit(FgGroup(0, (4,)), IntMatrix.from_rows([[3]]))
        assert g.recognized() == FgGroup(0, (4,))

    def test_mixed_structural(self):
        g = colimit(FgGroup(1, (5,)), IntMatrix.from_rows([[2, 0], [0, 1]]))
        assert g.pretty is None
        assert g.stable_rank == 1
        assert g.eventual_torsion == FgGroup(0, (5,))
        assert "stable_rank=1" in str(g)

    def test_incompatible_endo(self):
        rel = IntMatrix.from_rows([[2], [0]])
        with pytest.raises(IncompatibleEndo):
            colimit(rel, IntMatrix.from_rows([[0, 1], [1, 0]]))
        with pytest.raises(IncompatibleEndo):
            colimit(FgGroup(1), IntMatrix.from_rows([[1, 0], [0, 1]]))

    def test_element_eq_dyadic(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[2]]))
        assert colim_element_eq(g, ((1,), 0), ((2,), 1))
        assert colim_element_eq(g, ((3,), 2), ((6,), 3))
        assert not colim_element_eq(g, ((1,), 0), ((1,), 1))

    def test_element_eq_matches_rational_model(self):
        rng = random.Random(2026)
        for m in (2, 3, 6):
            g = colimit(FgGroup(1), IntMatrix.from_rows([[m]]))
            for _ in range(100):
                v, w = rng.randint(-40, 40), rng.randint(-40, 40)
                j, k = rng.randint(0, 6), rng.randint(0, 6)
                expect = Fraction(v, m ** j) == Fraction(w, m ** k)
                assert colim_element_eq(g, ((v,), j), ((w,), k)) == expect

    def test_element_eq_with_torsion(self):
        g = colimit(FgGroup(0, (4,)), IntMatrix.from_rows([[2]]))
        assert colim_element_eq(g, ((1,), 0), ((0,), 0))
        g = colimit(FgGroup(0, (4,)), IntMatrix.from_rows([[3]]))
        assert not colim_element_eq(g, ((1,), 0), ((0,), 0))
        assert colim_element_eq(g, ((1,), 0), ((3,), 1))

    def test_json_shape(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[2]]))
        j = g.to_json()
        assert j["kind"] == "colimit"
        assert j["name"] == "Z[1/2]"
        assert j["base"] == {"kind": "fg", "rank": 1, "torsion": [], "name": "Z"}


class TestInducedKerCoker:
    def test_negation_on_dyadics(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[2]]))
        ker, cok = induced_ker_coker(g, IntMatrix.from_rows([[-1]]))
        assert ker.pretty == "0"
        assert cok.pretty == "0"

    def test_zero_on_integers(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[1]]))
        ker, cok = induced_ker_coker(g, IntMatrix.from_rows([[0]]))
        assert ker.pretty == "Z"
        assert cok.pretty == "Z"

    def test_one_minus_p_on_q_adics(self):
        for p, q in ((3, 2), (5, 2), (5, 3), (2, 3)):
            g = colimit(FgGroup(1), IntMatrix.from_rows([[q]]))
            ker, cok = induced_ker_coker(g, IntMatrix.from_rows([[1 - p]]))
            assert ker.pretty == "0"
            expected = colimit(FgGroup(0, (p - 1,)), IntMatrix.from_rows([[q]])) \
                if p > 2 else None
            if p == 2:
                assert cok.pretty == "0"
            else:
                assert cok.stable_rank == 0
                assert cok.eventual_torsion == expected.eventual_torsion

    def test_non_commuting(self):
        g = colimit(FgGroup(2), IntMatrix.from_rows([[0, 1], [0, 0]]))
        with pytest.raises(NonCommuting):
            induced_ker_coker(g, IntMatrix.from_rows([[1, 0], [0, 0]]))

    def test_shape_mismatch(self):
        g = colimit(FgGroup(1), IntMatrix.from_rows([[2]]))
        with pytest.raises(NonCommuting):
            induced_ker_coker(g, IntMatrix.identity(2))


small_entries = st.integers(min_value=-12, max_value=12)


@st.composite
def small_matrix(draw, max_dim=4):
    r = draw(st.integers(min_value=1, max_value=max_dim))
    c = draw(st.integers(min_value=1, max_value=max_dim))
    rows = draw(st.lists(st.lists(small_entries, min_size=c, max_size=c),
                         min_size=r, max_size=r))
    return IntMatrix.from_rows(rows)


@settings(max_examples=60, deadline=None)
@given(small_matrix())
def test_smith_properties(a):
    sf = smith_normal_form(a)
    assert sf.u.mul(sf.s).mul(sf.v) == a
    assert abs(sf.u.det()) == 1
    assert abs(sf.v.det()) == 1
    d = [x for x in sf.divisors() if x != 0]
    for x, y in zip(d, d[1:]):
        assert y % x == 0
    assert len(d) == a.rank()


@settings(max_examples=60, deadline=None)
@given(small_matrix())
def test_kernel_annihilates(a):
    kb = kernel_basis(a)
    for j in range(kb.cols):
        col = kb.col(j)
        assert any(x != 0 for x in col)
        assert all(x == 0 for x in a.mul_vec(col))


@settings(max_examples=60, deadline=None)
@given(small_matrix(max_dim=3), st.integers(min_value=0, max_value=3))
def test_colimit_of_identity_power_is_base(a, _n):
    base = cokernel(a)
    n = base.rank + len(base.torsion)
    g = colimit(base, IntMatrix.identity(n))
    assert g.pretty == str(base)

"""Point dynamics, periodic counts, covers, and metric witnesses."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoidk.dynamics import (
    VERTEX,
    CoverSpec,
    DepthTooShallow,
    GermPoint,
    Interior,
    NoWitnessFound,
    apply_g,
    apply_g_rose,
    branch_cells,
    collapse_map,
    cover_membership,
    delete_head,
    fix_count,
    fix_count_oracle,
    forward_expansive_witness,
    level_lift,
    metric_ball,
    p_map,
    rose_distance,
    rose_fix_count,
    solenoid_apply_phi,
    solenoid_point,
    truncate,
    wieler_axiom_witness,
    zeta_series,
)
from solenoidk.abelian import IntMatrix
from solenoidk.germ_quotient import Germ, admissible_germs, tau_of
from solenoidk.graph_substitution import substitution_matrix

from conftest import make_aab_ab, make_three_solenoid, make_two_solenoid

F = Fraction


def rational(rng, lo_den=2, hi_den=499):
    den = rng.randint(lo_den, hi_den)
    return F(rng.randint(1, den - 1), den)


class TestPoints:
    def test_interior_validates_range(self):
        with pytest.raises(ValueError):
            Interior("a", F(0))
        with pytest.raises(ValueError):
            Interior("a", F(3, 2))

    def test_vertex_is_singleton(self):
        assert VERTEX is type(VERTEX)()
        assert str(VERTEX) == "vertex"

    def test_point_strings(self):
        assert str(Interior("a", F(1, 3))) == "a@1/3"
        assert str(GermPoint(Germ("b", "a"))) == "germ ba"


class TestApplyG:
    def test_doubling_step(self, two_solenoid):
        assert apply_g(two_solenoid, Interior("a", F(1, 3))) == Interior("a", F(2, 3))

    def test_aab_middle_letter(self, aab_ab):
        assert apply_g(aab_ab, Interior("a", F(1, 2))) == Interior("a", F(1, 2))

    def test_germ_point_follows_tau(self, aab_ab):
        assert apply_g(aab_ab, GermPoint(Germ("b", "a"))) == GermPoint(Germ("b", "a"))

    def test_cut_point_lands_on_germ(self, aab_ab):
        assert apply_g(aab_ab, Interior("a", F(1, 3))) == GermPoint(Germ("a", "a"))
        assert apply_g(aab_ab, Interior("a", F(2, 3))) == GermPoint(Germ("a", "b"))

    def test_rose_map_collapses_cuts(self, aab_ab):
        assert apply_g_rose(aab_ab, Interior("a", F(1, 3))) is VERTEX
        assert apply_g_rose(aab_ab, VERTEX) is VERTEX

    @given(num=st.integers(1, 996), den=st.integers(997, 1993), pick=st.integers(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_collapse_conjugacy(self, num, den, pick):
        # pushing a point through the quotient map then collapsing equals
        # collapsing first and using the rose map
        system = make_aab_ab()
        if num >= den:
            num = num % den or 1
        p = Interior(system.edges[pick], F(num, den))
        assert collapse_map(apply_g(system, p)) == apply_g_rose(system, collapse_map(p))


class TestBranchCells:
    def test_aab_level_two_cells(self, aab_ab):
        cells = branch_cells(aab_ab, "a", 2)
        assert [c[0] for c in cells] == list("aabaabab")
        assert [(c[1], c[2]) for c in cells[:3]] == [
            (F(0), F(1, 9)), (F(1, 9), F(2, 9)), (F(2, 9), F(1, 3))]
        assert cells[-1][1:] == (F(5, 6), F(1))

    def test_cells_partition_the_arc(self, bundled_system):
        for e in bundled_system.edges:
            for n in range(1, 5):
                cells = branch_cells(bundled_system, e, n)
                assert cells[0][1] == 0 and cells[-1][2] == 1
                for (_, _, hi), (_, lo, _) in zip(cells, cells[1:]):
                    assert hi == lo

    def test_refinement_nests(self, bundled_system):
        for e in bundled_system.edges:
            for n in range(1, 4):
                coarse = branch_cells(bundled_system, e, n)
                for _, lo, hi in branch_cells(bundled_system, e, n + 1):
                    assert any(clo <= lo and hi <= chi for _, clo, chi in coarse)

    def test_branch_slopes_expand(self, bundled_system):
        # slope of a branch is 1/width, so widths must be <= 2^-n
        for e in bundled_system.edges:
            for n in range(1, 6):
                for _, lo, hi in branch_cells(bundled_system, e, n):
                    assert hi - lo <= F(1, 2 ** n)


def tau_matrix(system):
    germs = admissible_germs(system)
    index = {g: i for i, g in enumerate(germs)}
    cols = [[0] * len(germs) for _ in germs]
    for j, g in enumerate(germs):
        cols[index[tau_of(system, g)]][j] = 1
    return IntMatrix.from_rows(cols)


def letter_matrix(system, take):
    edges = system.edges
    rows = [[0] * len(edges) for _ in edges]
    for j, e in enumerate(edges):
        rows[edges.index(take(system.image(e)))][j] = 1
    return IntMatrix.from_rows(rows)


class TestFixCount:
    def test_matches_oracle(self, bundled_system):
        for n in range(1, 9):
            assert fix_count(bundled_system, n) == fix_count_oracle(bundled_system, n)

    def test_circle_cover_counts(self):
        two, three = make_two_solenoid(), make_three_solenoid()
        for n in range(1, 11):
            assert fix_count(two, n) == 2 ** n - 1
            assert fix_count(three, n) == 3 ** n - 1

    def test_aab_ab_values(self, aab_ab):
        assert [fix_count(aab_ab, n) for n in range(1, 5)] == [2, 6, 17, 46]

    def test_rose_and_quotient_counts_agree(self, bundled_system):
        # computable content of the shared zeta function across levels
        for n in range(1, 9):
            assert rose_fix_count(bundled_system, n) == fix_count(bundled_system, n)

    def test_trace_formula(self, bundled_system):
        # N_n = tr(M^n) - tr(first^n) - tr(last^n) + tr(tau^n), a third
        # route through linear algebra
        m = substitution_matrix(bundled_system)
        first = letter_matrix(bundled_system, lambda w: w[0])
        last = letter_matrix(bundled_system, lambda w: w[-1])
        t = tau_matrix(bundled_system)
        for n in range(1, 7):
            expected = (sum(m.power(n)[i, i] for i in range(m.rows))
                        - sum(first.power(n)[i, i] for i in range(first.rows))
                        - sum(last.power(n)[i, i] for i in range(last.rows))
                        + sum(t.power(n)[i, i] for i in range(t.rows)))
            assert fix_count(bundled_system, n) == expected

    def test_rejects_nonpositive_period(self, two_solenoid):
        with pytest.raises(ValueError):
            fix_count(two_solenoid, 0)


class TestZetaSeries:
    def test_doubling_guess(self, two_solenoid):
        z = zeta_series(two_solenoid, 6)
        assert z.counts == (1, 3, 7, 15, 31, 63)
        assert z.guess.numerator == (F(1), F(-1))
        assert z.guess.denominator == (F(1), F(-2))

    def test_aab_ab_guess(self, aab_ab):
        z = zeta_series(aab_ab, 8)
        assert z.counts[:2] == (2, 6)
        assert z.guess.numerator == (F(1), F(-1))
        assert z.guess.denominator == (F(1), F(-3), F(1))

    def test_ab_ab_matches_doubling(self, ab_ab):
        z = zeta_series(ab_ab, 8)
        assert z.counts == tuple(2 ** n - 1 for n in range(1, 9))
        assert str(z.guess) == "(1 - t)/(1 - 2t)"

    def test_divisor_monotonicity(self, bundled_system):
        counts = zeta_series(bundled_system, 8).counts
        for n in range(1, 9):
            for d in range(1, n):
                if n % d == 0:
                    assert counts[d - 1] <= counts[n - 1]

    def test_insufficient_data_gives_no_guess(self, aab_ab):
        assert zeta_series(aab_ab, 1).guess is None

    def test_json_shape(self, two_solenoid):
        blob = zeta_series(two_solenoid, 4).to_json()
        assert blob["counts"] == [1, 3, 7, 15]
        assert blob["guess"]["denominator"] == ["1", "-2"]


class TestExpansiveness:
    def test_doubling_level_one_separates(self, two_solenoid):
        report = forward_expansive_witness(two_solenoid, CoverSpec(1),
                                           n_max=12, grid_density=32)
        assert report.all_separated
        assert report.max_separation_time == 4

    def test_membership_of_cut_point(self, two_solenoid):
        ids = cover_membership(two_solenoid, CoverSpec(1), Interior("a", F(1, 2)))
        assert ("cell", "a", 0) in ids and ("cell", "a", 1) in ids

    def test_germ_element_is_own_only(self, aab_ab):
        ids = cover_membership(aab_ab, CoverSpec(2), GermPoint(Germ("a", "b")))
        assert ids == frozenset({("germ", Germ("a", "b"))})

    def test_zero_horizon_reports_unseparated(self, two_solenoid):
        report = forward_expansive_witness(two_solenoid, CoverSpec(1),
                                           n_max=0, grid_density=16)
        assert not report.all_separated
        assert report.unseparated

    def test_refining_never_slows_separation(self, aab_ab):
        points = [GermPoint(g) for g in admissible_germs(aab_ab)]
        for e in aab_ab.edges:
            points.extend(Interior(e, F(i, 16)) for i in range(1, 16))

        def separation(p, q, level):
            cov = CoverSpec(level)
            for n in range(15):
                if not (cover_membership(aab_ab, cov, p)
                        & cover_membership(aab_ab, cov, q)):
                    return n
                p, q = apply_g(aab_ab, p), apply_g(aab_ab, q)
            return None

        for p, q in itertools.combinations(points, 2):
            coarse, fine = separation(p, q, 2), separation(p, q, 3)
            if coarse is not None:
                assert fine is not None and fine <= coarse


class TestWielerWitness:
    def test_doubling_witness(self, two_solenoid):
        w = wieler_axiom_witness(two_solenoid)
        assert (w.k, w.gamma, w.beta) == (1, F(1, 2), F(1, 8))

    def test_aab_ab_witness(self, aab_ab):
        # gamma = 1/2 provably fails axiom 2 at the cut point of arc b,
        # where one side expands by 3 but the other by 2*2*gamma
        w = wieler_axiom_witness(aab_ab)
        assert (w.k, w.gamma, w.beta) == (1, F(3, 4), F(1, 16))

    def test_ab_ab_witness(self, ab_ab):
        w = wieler_axiom_witness(ab_ab)
        assert (w.k, w.gamma, w.beta) == (1, F(1, 2), F(1, 8))

    def test_exhausted_grid_raises(self, two_solenoid):
        with pytest.raises(NoWitnessFound) as exc:
            wieler_axiom_witness(two_solenoid, k_max=1,
                                 gamma_grid=[F(1, 1000)])
        assert exc.value.last_failure is not None

    def test_witness_json(self, two_solenoid):
        blob = wieler_axiom_witness(two_solenoid).to_json()
        assert blob["k"] == 1
        assert blob["gamma"] == "1/2"
        assert blob["kind"] == "sampling witness"


class TestMetricModel:
    def test_same_arc_wraparound(self):
        assert rose_distance(Interior("a", F(1, 10)), Interior("a", F(9, 10))) == F(1, 5)

    def test_cross_arc_through_vertex(self):
        d = rose_distance(Interior("a", F(1, 10)), Interior("b", F(3, 4)))
        assert d == F(1, 10) + F(1, 4)

    def test_vertex_distance(self):
        assert rose_distance(VERTEX, Interior("b", F(7, 8))) == F(1, 8)
        assert rose_distance(VERTEX, VERTEX) == 0

    def test_ball_spills_across_vertex(self, aab_ab):
        ball = metric_ball(aab_ab, Interior("a", F(1, 16)), F(1, 8))
        assert ball.has_vertex
        assert ball.per_edge["b"] == [(F(0), F(1, 16)), (F(15, 16), F(1))]

    def test_ball_image_hits_vertex(self, two_solenoid):
        ball = metric_ball(two_solenoid, Interior("a", F(1, 2)), F(1, 8))
        assert not ball.has_vertex
        assert ball.image().has_vertex

    def test_containment_is_reflexive_and_strict(self, two_solenoid):
        small = metric_ball(two_solenoid, Interior("a", F(1, 4)), F(1, 16))
        big = metric_ball(two_solenoid, Interior("a", F(1, 4)), F(1, 8))
        assert big.contains(small)
        assert not small.contains(big)


class TestSolenoidPoints:
    def test_compatibility_enforced(self, two_solenoid):
        with pytest.raises(ValueError):
            solenoid_point(two_solenoid, (Interior("a", F(1, 4)),
                                          Interior("a", F(1, 3))))

    def test_phi_prepends_image(self, two_solenoid):
        x = solenoid_point(two_solenoid, (Interior("a", F(1, 4)),
                                          Interior("a", F(1, 8))))
        y = solenoid_apply_phi(two_solenoid, x)
        assert [str(c) for c in y.coords] == ["a@1/2", "a@1/4", "a@1/8"]
        assert delete_head(y) == x

    def test_truncate(self, two_solenoid):
        x = solenoid_point(two_solenoid, (Interior("a", F(1, 4)),
                                          Interior("a", F(1, 8)),
                                          Interior("a", F(1, 16))))
        assert truncate(x, 1).coords == x.coords[:2]
        with pytest.raises(ValueError):
            truncate(x, 5)

    def test_p_map_on_interior_head(self, two_solenoid):
        x = solenoid_point(two_solenoid, (Interior("a", F(1, 4)),))
        assert p_map(two_solenoid, x) == Interior("a", F(1, 4))

    def test_p_map_resolves_vertex_head(self, aab_ab):
        # all-vertex itinerary lands on the flattened germ ba
        x = solenoid_point(aab_ab, (VERTEX, VERTEX))
        assert p_map(aab_ab, x) == GermPoint(Germ("b", "a"))
        y = solenoid_point(aab_ab, (VERTEX, Interior("a", F(1, 3))))
        assert p_map(aab_ab, y) == GermPoint(Germ("a", "a"))

    def test_p_map_needs_depth(self, aab_ab):
        with pytest.raises(DepthTooShallow):
            p_map(aab_ab, solenoid_point(aab_ab, (VERTEX,)))

    def test_collapse_after_p_is_head_projection(self, bundled_system):
        rng = random.Random(20260817)
        for _ in range(250):
            z = Interior(rng.choice(bundled_system.edges), rational(rng))
            depth = rng.randint(1, 4)
            forward = [z]
            for _ in range(depth):
                forward.append(apply_g_rose(bundled_system, forward[-1]))
            x = solenoid_point(bundled_system, tuple(reversed(forward)))
            assert collapse_map(p_map(bundled_system, x)) == x.coords[0]


class TestLevelLift:
    def test_lift_is_identity_at_level_zero(self, two_solenoid):
        p = Interior("a", F(2, 7))
        assert level_lift(two_solenoid, 0, p) == p

    def test_lift_of_vertex(self, aab_ab):
        assert level_lift(aab_ab, 1, VERTEX) == GermPoint(Germ("b", "a"))

    def test_lift_splits_at_cuts(self, aab_ab):
        assert level_lift(aab_ab, 1, Interior("a", F(1, 3))) == GermPoint(Germ("a", "a"))
        assert level_lift(aab_ab, 1, Interior("a", F(1, 2))) == Interior("a", F(1, 2))

import math

import pytest
from hypothesis import given, settings, strategies as st

from ccrit import criticality as crit
from ccrit.errors import BudgetError, CcritDomainError
from ccrit.lattice_sums import w_d
from ccrit.specfun import EULER_GAMMA, bessel_k, euler_gamma

UNIT = crit.GLParams(1.0, 1.0, 1.0)


def k0_pairs_brute(k_max=12):
    return math.fsum(float(bessel_k(0, 2 * math.pi * a * b))
                     for a in range(1, k_max + 1) for b in range(1, k_max + 1) if a * b <= k_max)


def k0_triples_brute(n_max=8):
    return math.fsum(float(bessel_k(0, 2 * math.pi * a * math.hypot(b, c)))
                     for a in range(1, n_max + 1) for b in range(1, n_max + 1) for c in range(1, n_max + 1))


class TestTypes:
    @pytest.mark.parametrize("args", [(0, 1, 1), (1, -1, 1), (1, 1, 0), (math.inf, 1, 1)])
    def test_glparams_positive(self, args):
        with pytest.raises(CcritDomainError):
            crit.GLParams(*args)

    def test_geometry(self):
        assert crit.Geometry("wire", (2, 2)).is_regular
        assert not crit.Geometry("grain", (1, 1, 2)).is_regular
        with pytest.raises(CcritDomainError):
            crit.Geometry("wire", (1.0,))
        with pytest.raises(CcritDomainError):
            crit.Geometry("sphere", (1.0,))
        with pytest.raises(CcritDomainError):
            crit.Geometry("film", (0.0,))

    def test_result_dict(self):
        d = crit.tc_film(UNIT, 2.0).as_dict()
        assert set(d) == {"tc", "c_constant", "min_size", "transition_exists"}


class TestConstants:
    def test_c1(self):
        c1 = crit.c1_constant()
        assert round(c1, 4) == crit.PUBLISHED_C1
        assert abs(c1 - crit.PUBLISHED_C1) <= 5e-5
        assert c1 == 6.0 * euler_gamma() / math.pi

    def test_c2(self):
        c2 = crit.c2_constant()
        assert abs(c2.value - crit.PUBLISHED_C2) <= 1e-4
        assert c2.error_bound <= 1e-10
        assert c2.terms_used <= 12

    def test_c2_decomposition(self):
        lead = 9.0 * EULER_GAMMA / math.pi
        assert lead == pytest.approx(1.653601, abs=1e-6)
        bessel = crit.c2_constant().value - lead
        assert bessel == pytest.approx(12.0 / math.pi * k0_pairs_brute(), rel=1e-12)
        assert bessel == pytest.approx(3.51e-3, abs=1e-5)

    def test_c2_from_w2(self):
        # substituting the square-wire W_2 gives C2 = 9 gamma / pi + (6 / pi) L W_2(0; L, L)
        for L in (1.0, 2.5):
            w = w_d(0.0, (L, L)).value
            assert crit.c2_constant().value == pytest.approx(
                9 * EULER_GAMMA / math.pi + 6 / math.pi * L * w, rel=1e-14)

    def test_c3(self):
        c3 = crit.c3_constant()
        assert abs(c3.value - crit.PUBLISHED_C3) <= 1e-3
        assert abs(c3.value - crit.PUBLISHED_C3_ALT) > 1e-3
        assert c3.error_bound <= 1e-10

    def test_c3_parts(self):
        parts = crit.c3_parts()
        lead = parts["one"].value + parts["gamma"].value
        assert lead == pytest.approx(2.653601, abs=1e-6)
        rest = sum(p.value for k, p in parts.items() if k not in ("one", "gamma"))
        assert rest == pytest.approx(2.2e-2, abs=1e-3)
        exp_sum = math.fsum(math.exp(-2 * math.pi * a * b) / a
                            for a in range(1, 13) for b in range(1, 13) if a * b <= 12)
        assert parts["exp_sum"].value == pytest.approx(12 / math.pi * exp_sum, rel=1e-13)
        assert parts["k0_pair"].value == pytest.approx(48 / math.pi * k0_pairs_brute(), rel=1e-13)
        assert parts["k0_triple"].value == pytest.approx(48 / math.pi * k0_triples_brute(), rel=1e-12)

    def test_ordering(self):
        assert crit.c1_constant() < crit.c2_constant().value < crit.c3_constant().value


class TestLaws:
    def test_film_example(self):
        r = crit.tc_film(UNIT, 10.0)
        assert r.tc == pytest.approx(1.0 - crit.c1_constant() / 10.0, abs=1e-15)
        assert r.tc == pytest.approx(0.88976, abs=5e-6)
        assert r.transition_exists

    def test_wire_example(self):
        r = crit.tc_wire_square(UNIT, 100.0)
        assert r.tc == pytest.approx(1.0 - 0.16571, abs=1e-5)

    def test_grain_example(self):
        r = crit.tc_grain_cubic(UNIT, 1000.0)
        assert r.tc == pytest.approx(1.0 - crit.c3_constant().value / 10.0, rel=1e-15)

    @pytest.mark.parametrize("g", [UNIT, crit.GLParams(1.3, 0.7, 2.1), crit.GLParams(0.02, 5.0, 90.0)])
    def test_exact_zero_at_min_size(self, g):
        for fn in (crit.tc_film, crit.tc_wire_square, crit.tc_grain_cubic):
            r = fn(g, fn(g, 1.0).min_size)
            assert abs(r.tc) <= 1e-14 * max(1.0, g.t0)
            assert not r.transition_exists

    def test_min_sizes(self):
        g = crit.GLParams(1.3, 0.7, 2.1)
        base = 0.7 / (1.3 * 2.1)
        assert crit.tc_film(g, 1.0).min_size == pytest.approx(crit.c1_constant() * base)
        assert crit.tc_wire_square(g, 1.0).min_size == pytest.approx((crit.c2_constant().value * base) ** 2)
        assert crit.tc_grain_cubic(g, 1.0).min_size == pytest.approx((crit.c3_constant().value * base) ** 3)

    def test_negative_tc_not_clamped(self):
        r = crit.tc_film(UNIT, 0.5)
        assert r.tc < 0.0 and not r.transition_exists

    def test_bulk_limit(self):
        assert crit.tc_film(UNIT, 1e12).tc == pytest.approx(1.0, abs=1e-11)
        assert crit.tc_wire_square(UNIT, 1e24).tc == pytest.approx(1.0, abs=1e-11)
        assert crit.tc_grain_cubic(UNIT, 1e36).tc == pytest.approx(1.0, abs=1e-11)

    def test_collinearity(self):
        g = crit.GLParams(1.3, 0.7, 2.1)
        for fn, power in ((crit.tc_film, 1), (crit.tc_wire_square, 2), (crit.tc_grain_cubic, 3)):
            pts = [(1.0 / s, fn(g, s ** power).tc) for s in (1.0, 2.0, 4.0)]
            s1 = (pts[1][1] - pts[0][1]) / (pts[1][0] - pts[0][0])
            s2 = (pts[2][1] - pts[1][1]) / (pts[2][0] - pts[1][0])
            assert abs(s1 - s2) <= 1e-12

    def test_equal_linear_size_ordering(self):
        for L in (0.5, 1.0, 3.0):
            assert (crit.tc_film(UNIT, L).tc > crit.tc_wire_square(UNIT, L * L).tc
                    > crit.tc_grain_cubic(UNIT, L ** 3).tc)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0),
           st.floats(0.01, 100.0), st.floats(0.5, 50.0))
    def test_scale_covariance(self, alpha, lam, t0, s, size):
        a = crit.GLParams(alpha, lam, t0)
        b = crit.GLParams(s * alpha, s * lam, t0)
        for fn in (crit.tc_film, crit.tc_wire_square, crit.tc_grain_cubic):
            assert fn(a, size).tc == pytest.approx(fn(b, size).tc, rel=1e-12, abs=1e-12 * t0)

    @pytest.mark.parametrize("fn", [crit.tc_film, crit.tc_wire_square, crit.tc_grain_cubic])
    def test_size_validation(self, fn):
        with pytest.raises(CcritDomainError):
            fn(UNIT, 0.0)


class TestWireGeneral:
    def test_square_consistency(self):
        for L in (0.7, 1.0, 3.0):
            assert crit.tc_wire_general(UNIT, L, L) == crit.tc_wire_square(UNIT, L * L)

    def test_square_formula_agrees(self):
        # the literal rectangular formula at L1 = L2 matches the C2 law
        L = 1.7
        literal = 1.0 - crit.wire_shift(L, L)
        assert literal == pytest.approx(crit.tc_wire_square(UNIT, L * L).tc, rel=1e-14)

    def test_swap(self):
        assert crit.tc_wire_general(UNIT, 1.0, 2.0) == crit.tc_wire_general(UNIT, 2.0, 1.0)

    def test_long_side_finite(self):
        for L2 in (10.0, 1e2, 1e3):
            r = crit.tc_wire_general(UNIT, 1.0, L2)
            assert math.isfinite(r.tc)
        with pytest.raises(BudgetError):
            crit.tc_wire_general(UNIT, 1.0, 1e6)

    def test_rectangle_min_size(self):
        g = crit.GLParams(1.3, 0.7, 2.1)
        r = crit.tc_wire_general(g, 1.0, 2.0)
        # the effective constant reproduces tc through the linear law
        assert r.tc == pytest.approx(g.t0 - r.c_constant * g.coupling / (g.alpha * math.sqrt(2.0)))

    def test_dispatch(self):
        assert crit.tc_for(UNIT, crit.Geometry("film", (3.0,))) == crit.tc_film(UNIT, 3.0)
        assert crit.tc_for(UNIT, crit.Geometry("wire", (2.0, 2.0))) == crit.tc_wire_square(UNIT, 4.0)
        assert crit.tc_for(UNIT, crit.Geometry("grain", (2.0,) * 3)) == crit.tc_grain_cubic(UNIT, 8.0)
        assert crit.tc_for(UNIT, crit.Geometry("wire", (1.0, 2.0))) == crit.tc_wire_general(UNIT, 1.0, 2.0)
        with pytest.raises(CcritDomainError):
            crit.tc_for(UNIT, crit.Geometry("grain", (1.0, 1.0, 2.0)))


class TestPoleCancellation:
    def test_square_limit(self):
        lim = crit.bracket_limit(1.0, 1.0, (1e-2, 1e-3))
        w = w_d(0.0, (1.0, 1.0)).value
        expected = math.sqrt(math.pi) * (3 * EULER_GAMMA + 2 * w)
        assert abs(lim.value - expected) <= 1e-4 * expected
        assert crit.wire_bracket_limit(1.0, 1.0) == pytest.approx(expected, rel=1e-15)

    def test_finite_and_stable(self):
        a = crit.bracket_pole_cancellation(1.0, 1.0, 1e-3)
        b = crit.bracket_pole_cancellation(1.0, 1.0, 1e-4)
        assert math.isfinite(a) and math.isfinite(b)
        assert abs(a - b) <= 1e-2 * abs(b)

    def test_residual_shrinks(self):
        r3 = crit.bracket_residual(1.0, 1.0, 1e-3)
        r4 = crit.bracket_residual(1.0, 1.0, 1e-4)
        assert r3 / r4 >= 5.0

    def test_unequal_sides_reported(self):
        lim = crit.bracket_limit(1.0, 2.0)
        assert math.isfinite(lim.value) and lim.residual >= 0.0
        assert lim.value == pytest.approx(crit.wire_bracket_limit(1.0, 2.0), rel=1e-4)

    def test_exact_continuation_differs(self):
        # keeping every factor D-dependent leaves a finite, different limit
        frozen = crit.bracket_limit(1.0, 2.0).value
        exact = crit.bracket_limit(1.0, 2.0, exact=True).value
        assert math.isfinite(exact) and abs(exact - frozen) > 1e-3

    @pytest.mark.parametrize("eps", [0.0, -1e-3, 0.02, math.nan])
    def test_eps_domain(self, eps):
        with pytest.raises(CcritDomainError):
            crit.bracket_pole_cancellation(1.0, 1.0, eps)

    def test_length_domain(self):
        with pytest.raises(CcritDomainError):
            crit.bracket_pole_cancellation(0.0, 1.0, 1e-3)

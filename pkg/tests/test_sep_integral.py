"""The exact pipeline: change of variables, regions, partial integrals, the
radial volume polynomial, and the final probability.

Expected polynomial constants are frozen from their published factored forms
and rebuilt here with bare ring operations, independent of the integration
machinery under test.
"""

from fractions import Fraction as F

import numpy as np
import pytest

from sepprob.exactmath import MultiPoly, compose
from sepprob.sep_integral import (
    REGION_NAMES,
    SymbolicReal,
    X,
    T1,
    T2,
    T3,
    ZERO_CONDITIONED_VOLUME,
    centered_vandermonde_in_gaps_matches,
    conditioned_volume,
    gap_change_of_variables,
    gap_integrand,
    gap_integrand_pullback,
    gap_piece,
    gap_piece_partials,
    gap_piece_sum,
    radial_shell_integral,
    radial_volume_identity_holds,
    region_bounds_ordered,
    region_integral,
    region_volume,
    separability_probability,
    separable_slice_poly,
    separable_slice_volume,
    support_polys,
    vandermonde_gap_poly,
)

SPOT_X = (F(1, 100), F(1, 6), F(33, 100))


def x1():
    return MultiPoly.variable(1, 0)


def one1():
    return MultiPoly.constant(1, 1)


def expected_piece_1():
    x = x1()
    bracket = x**4 * 567 - x**3 * 3564 + x**2 * 5526 - x * 3152 - one1() * 1345
    return x * (x * 3 - one1()) ** 9 * bracket / 387370509926400


def expected_piece_3():
    return MultiPoly(
        1,
        {
            (14,): F(-1, 691891200),
            (3,): F(15013, 84757991915520),
            (2,): F(-1531501, 7628219272396800),
            (1,): F(115799, 1983337010823168),
        },
    )


def expected_piece_2():
    return MultiPoly(
        1,
        {
            (14,): F(-499, 17712414720),
            (13,): F(41, 151388160),
            (12,): F(-1061, 1135411200),
            (11,): F(653, 371589120),
            (10,): F(-163, 82575360),
            (9,): F(557, 412876800),
            (8,): F(-11, 20643840),
            (7,): F(1, 10321920),
            (3,): F(-90533, 84757991915520),
            (2,): F(3677549, 7628219272396800),
            (1,): F(-613427, 9916685054115840),
        },
    )


def expected_sum():
    x = x1()
    bracket = x**3 * 33 + x**2 * 162 + x * 72 + one1() * 8
    return x * x * (one1() - x) ** 9 * bracket / 40874803200


def expected_radial_poly():
    a = x1()
    return (one1() - a) ** 9 * (a**3 * 33 + a**2 * 162 + a * 72 + one1() * 8)


class TestChangeOfVariables:
    def test_jacobian(self):
        assert gap_change_of_variables().jacobian == F(1, 24)

    def test_forward_at_uniform_point(self):
        change = gap_change_of_variables()
        values = [p.evaluate([0, 0, 0, 1]) for p in change.forward]
        assert values == [0, 0, 0, 0]

    def test_roundtrip_is_identity(self):
        change = gap_change_of_variables()
        for k in range(4):
            back = compose(change.inverse[k], list(change.forward))
            assert back == MultiPoly.variable(4, k)

    def test_support_scale_in_gaps(self):
        _, _, b3 = support_polys()
        t1, t2, t3 = (MultiPoly.variable(4, i) for i in (T1, T2, T3))
        assert b3 == t1 + t2 + t3 / 3


class TestGapVandermonde:
    def test_point_value(self):
        assert vandermonde_gap_poly().evaluate([0, 1, 1, 1]) == F(55, 144)

    def test_vanishes_without_middle_gap(self):
        v = vandermonde_gap_poly()
        assert v.substitute(T2, MultiPoly(4)).is_zero

    def test_matches_entry_difference_product(self):
        assert centered_vandermonde_in_gaps_matches()


class TestGapIntegrands:
    def test_pullback_identities(self):
        assert gap_integrand(1, "pos") == gap_integrand_pullback(1)
        assert gap_integrand(2) == gap_integrand_pullback(2)
        assert gap_integrand(3) == gap_integrand_pullback(3)

    def test_negative_branch_is_sign_flip(self):
        x = MultiPoly.variable(4, X)
        b1, b2, b3 = support_polys()
        flipped = (b3 * b3 - b2 * b2) / 64 * x * (x + b1) ** 2
        assert gap_integrand(1, "neg") == flipped

    def test_zero_at_x_zero(self):
        g = gap_integrand(1, "pos")
        assert g.substitute(X, MultiPoly(4)).is_zero

    def test_third_vanishes_on_its_breakpoint(self):
        _, _, b3 = support_polys()
        g = gap_integrand(3)
        assert g.substitute(X, b3).is_zero

    def test_branch_argument_contract(self):
        with pytest.raises(ValueError):
            gap_integrand(1)
        with pytest.raises(ValueError):
            gap_integrand(2, "pos")


class TestRegions:
    def test_volumes_nonnegative_at_spot_values(self):
        for xv in SPOT_X:
            for name in REGION_NAMES:
                assert region_volume(name, xv) >= 0, (name, xv)

    def test_bounds_ordered_at_spot_values(self):
        for xv in SPOT_X:
            for name in REGION_NAMES:
                assert region_bounds_ordered(name, xv), (name, xv)

    def test_simplex_volume(self):
        assert region_volume("Delta3", F(1, 6)) == F(1, 6)

    def test_main_region_decomposition(self):
        # The umbrella region is the simplex minus the steep cap.
        for xv in SPOT_X:
            assert region_volume("R", xv) == region_volume("Delta3", xv) - region_volume("R2a", xv)

    def test_halves_have_equal_volume(self):
        for xv in SPOT_X:
            assert region_volume("R1a", xv) == region_volume("R1b", xv)

    def test_region_integral_vs_gauss_quadrature(self):
        # Independent numerical check of the simplex contribution to the third
        # partial integral, at x = 1/6, against tensorized Gauss-Legendre
        # quadrature (exact for polynomial integrands up to rounding).
        integrand = vandermonde_gap_poly() * gap_integrand(3)
        exact = region_integral("Delta3", integrand).evaluate([F(1, 6)])

        nodes, weights = np.polynomial.legendre.leggauss(12)
        nodes = 0.5 * (nodes + 1.0)
        weights = 0.5 * weights
        xv = 1.0 / 6.0
        total = 0.0
        for t3, w3 in zip(nodes, weights):
            for u2, w2 in zip(nodes, weights):
                t2 = u2 * (1.0 - t3)
                j2 = 1.0 - t3
                for u1, w1 in zip(nodes, weights):
                    t1 = u1 * (1.0 - t2 - t3)
                    j1 = 1.0 - t2 - t3
                    total += w3 * w2 * w1 * j2 * j1 * integrand.evaluate_float([xv, t1, t2, t3])
        assert abs(float(exact) - total) < 1e-9

    def test_unknown_region_rejected(self):
        with pytest.raises(ValueError):
            region_volume("R9z", F(1, 6))


class TestPartialIntegrals:
    def test_first_piece_matches(self):
        assert gap_piece(1) == expected_piece_1()

    def test_first_piece_halves_equal(self):
        partials = gap_piece_partials(1)
        assert partials["R1a"] == partials["R1b"]
        assert partials["R1a"] * 2 == expected_piece_1()

    def test_third_piece_matches(self):
        assert gap_piece(3) == expected_piece_3()

    def test_second_piece_matches_published_expansion(self):
        got = gap_piece(2)
        want = expected_piece_2()
        if got != want:
            diff = got - want
            report = [f"x^{e[0]}: got {got.coefficient(e)}, want {want.coefficient(e)}"
                      for e, _ in sorted(diff.terms.items())]
            pytest.fail("second partial integral differs term by term:\n" + "\n".join(report))

    def test_sum_matches_factored_form(self):
        assert gap_piece_sum() == expected_sum()

    def test_sum_times_denominator_is_factored_polynomial(self):
        lhs = gap_piece_sum() * 40874803200
        x = x1()
        rhs = x * x * (one1() - x) ** 9 * (x**3 * 33 + x**2 * 162 + x * 72 + one1() * 8)
        assert (lhs - rhs).is_zero

    def test_order_invariance(self):
        assert gap_piece(2, order=[3, 2, 1, 0]) == gap_piece(2)
        assert gap_piece(3, order=[2, 0, 1]) == gap_piece(3)

    def test_second_piece_region_partials(self):
        # Signed per-region contributions, frozen from their published
        # intermediate factored forms.
        x, one = x1(), one1()
        want = {
            "Delta3": -x * (x * x * 725985 - x * 560326 + one * 123355) / 96842627481600,
            "R2ab": -(x**8)
            * (x**6 * 2894 - x**5 * 24570 + x**4 * 81900 - x**3 * 150150
               + x * x * 160875 - x * 96525 + one * 25740)
            / 177124147200,
            "R2a": x * (x * x * 637485030 - x * 525965687 + one * 120181250) / 99166850541158400,
            "R2b": -(x**7)
            * (x**7 * 1572 - x**6 * 17550 + x**5 * 62712 - x**4 * 120835
               + x**3 * 141570 - x * x * 106821 + x * 51480 - one * 12870)
            / 132843110400,
        }
        got = gap_piece_partials(2)
        for name, expected in want.items():
            assert got[name] == expected, name

    def test_third_piece_region_partials(self):
        x, one = x1(), one1()
        want = {
            "Delta3": x * (x * x * 2340 - x * 3341 + one * 1220) / 1513166054400,
            "R3a": -x * (x * x * 135789030 - x * 199046263 + one * 74163970) / 99166850541158400,
            "R3b": -(x**14) / 691891200,
        }
        got = gap_piece_partials(3)
        for name, expected in want.items():
            assert got[name] == expected, name


class TestRadialVolume:
    def test_prefactor_and_polynomial(self):
        f = separable_slice_poly()
        assert f.prefactor == SymbolicReal(F(1, 319334400), 5)
        assert f.poly == expected_radial_poly()

    def test_value_at_zero(self):
        assert separable_slice_volume(0) == SymbolicReal(F(1, 39916800), 5)

    def test_value_at_one_third(self):
        expected = F(2, 3) ** 9 * (F(33, 27) + 162 * F(1, 9) + 72 * F(1, 3) + 8)
        assert separable_slice_volume(F(1, 3)) == SymbolicReal(expected / 319334400, 5)

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            separable_slice_volume(F(1, 2))

    def test_conditioned_volume(self):
        assert conditioned_volume(0) == SymbolicReal(F(1, 9676800), 5)
        assert conditioned_volume(F(1, 2)) == ZERO_CONDITIONED_VOLUME * F(3, 4) ** 6
        with pytest.raises(ValueError):
            conditioned_volume(1)

    def test_radial_shell_integral(self):
        assert radial_shell_integral() == F(1024, 45045)

    def test_radial_identity(self):
        assert radial_volume_identity_holds()

    def test_shell_weighted_consistency(self):
        # (pi/2) * integral_0^{1/3} a^2 f(a) da equals (2 pi)^6 times the
        # integral of the summed partials over the same range, symbolically.
        from sepprob.exactmath import integrate_once

        f = separable_slice_poly()
        a = MultiPoly.variable(1, 0)
        weighted = a * a * f.poly
        lhs_scalar = integrate_once(weighted, 0, 0, F(1, 3)).evaluate([0])
        lhs = f.prefactor * lhs_scalar * SymbolicReal(F(1, 2), 1)
        rhs_scalar = integrate_once(gap_piece_sum(), 0, 0, F(1, 3)).evaluate([0])
        rhs = SymbolicReal(rhs_scalar * 64, 6)
        assert lhs == rhs

    def test_radial_identity_is_sharp(self):
        # Any perturbation of the slice volume or the scaling exponent must
        # break the identity; this guards against a vacuous check.
        from sepprob import sep_integral as si
        from sepprob.volumes import state_space_volume_hs

        shell = SymbolicReal(radial_shell_integral() / 2, 1)
        perturbed = SymbolicReal(F(101, 100) / 9676800, 5)
        assert shell * perturbed != state_space_volume_hs(4)

        a = x1()
        wrong_moment = a * a * (one1() - a * a) ** 5
        from sepprob.exactmath import integrate_once

        wrong_shell = SymbolicReal(integrate_once(wrong_moment, 0, 0, 1).evaluate([0]) / 2, 1)
        assert wrong_shell * ZERO_CONDITIONED_VOLUME != state_space_volume_hs(4)


class TestProbability:
    def test_exact_value(self):
        assert separability_probability() == F(8, 33)

    def test_decimal_rendering(self):
        assert abs(float(separability_probability()) - 0.24242424242424243) < 1e-16

    def test_pi_powers_cancel(self):
        ratio = separable_slice_volume(0) / ZERO_CONDITIONED_VOLUME
        assert ratio.pi_power == 0 and ratio.radicand == 1

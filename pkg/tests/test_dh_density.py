"""Planar chamber density (three routes), marginal support, and the
one-variable gap density with its quadrature oracle."""

import random
from fractions import Fraction as F

from sepprob.dh_density import (
    CHAMBER_LABELS,
    DISTINCT_WEIGHTS,
    MarginalSupport,
    bravyi_compatible,
    classify_chamber,
    convolution_density_closed,
    convolution_density_jump,
    fiber_polytope_density,
    marginal_gap_density,
    marginal_gap_density_numeric,
    marginal_support,
    moment_polytope,
    total_gap_mass,
    vandermonde_over_twelve,
    weights_from_roots,
)
from sepprob.exactmath import MultiPoly
from sepprob.volumes import CenteredSpectrum, Spectrum

SPEC_45 = CenteredSpectrum([F(1, 5), F(1, 50), F(-7, 100), F(-3, 20)])


def random_simple_centered(rng):
    while True:
        raw = sorted({F(rng.randint(1, 300), 601) for _ in range(4)}, reverse=True)
        if len(raw) == 4:
            total = sum(raw)
            return CenteredSpectrum([x / total - F(1, 4) for x in raw])


class TestWeights:
    def test_multiset(self):
        ws = weights_from_roots()
        assert len(ws) == 6
        assert sorted(ws) == sorted([(-2, 2), (-2, 0), (-2, 0), (-2, -2), (0, -2), (0, -2)])

    def test_doubled_weights(self):
        ws = weights_from_roots()
        assert ws.count((-2, 0)) == 2
        assert ws.count((0, -2)) == 2

    def test_single_root_image(self):
        # The root (0, 1, -1, 0) maps to (2, -2); its negative is (-2, 2).
        from sepprob.dh_density import _project_to_plane

        px, py = _project_to_plane((0, 1, -1, 0))
        assert (-px, -py) == (-2, 2)

    def test_distinct_weights_cover_multiset(self):
        assert set(weights_from_roots()) == set(DISTINCT_WEIGHTS)


class TestClosedDensity:
    def test_point_values(self):
        d = convolution_density_closed()
        assert d.evaluate(-2, -1) == F(7, 64)   # inside C2
        assert d.evaluate(-1, 1) == 0           # wall r + s = 0
        assert d.evaluate(1, 1) == 0            # outside the support

    def test_chamber_classification(self):
        assert classify_chamber(-2, 1) == "C1"
        assert classify_chamber(-2, -1) == "C2"
        assert classify_chamber(-1, -2) == "C3"
        assert classify_chamber(1, 0) == "C0"
        # Walls resolve deterministically with priority C1 > C2 > C3.
        assert classify_chamber(-1, 0) == "C1"
        assert classify_chamber(-1, -1) == "C2"

    def test_wall_continuity_exact(self):
        d = convolution_density_closed()
        r = MultiPoly.variable(2, 0)
        zero = MultiPoly(2)
        # p1(r, 0) = p2(r, 0); p2(r, r) = p3(r, r); p1(r, -r) = 0; p3(0, s) = 0.
        assert d.piece("C1").substitute(1, zero) == d.piece("C2").substitute(1, zero)
        assert d.piece("C2").substitute(1, r) == d.piece("C3").substitute(1, r)
        assert d.piece("C1").substitute(1, -r).is_zero
        assert d.piece("C3").substitute(0, zero).is_zero

    def test_nonnegative_on_chambers(self):
        d = convolution_density_closed()
        grid = 100
        for i in range(grid):
            r = -5.0 * (i + 1) / grid
            for j in range(grid):
                theta = j / (grid - 1)
                assert d.evaluate_float(r, -r * theta) >= -1e-12   # C1
                assert d.evaluate_float(r, r * theta) >= -1e-12    # C2
                assert d.evaluate_float(r, r - 5 * theta) >= -1e-12  # C3


class TestJumpDerivation:
    def test_structural_equality_with_closed(self):
        assert convolution_density_jump() == convolution_density_closed()

    def test_piece_progression(self):
        jump = convolution_density_jump()
        r = MultiPoly.variable(2, 0)
        s = MultiPoly.variable(2, 1)
        assert jump.piece("C1") == (r + s) ** 2 / 64
        assert jump.piece("C2") == jump.piece("C1") - s * s / 32
        assert jump.piece("C3") == jump.piece("C2") + (r - s) ** 2 / 64
        assert jump.piece("C3") == r * r / 32

    def test_truncation_order_insensitive(self):
        assert convolution_density_jump(order=4) == convolution_density_jump(order=12)


class TestFiberOracle:
    def test_known_point(self):
        assert abs(fiber_polytope_density((-2, -1)) - 7 / 64) < 1e-9

    def test_outside_cone(self):
        assert fiber_polytope_density((1, 1)) == 0.0

    def test_boundary(self):
        assert abs(fiber_polytope_density((-1, 1))) < 1e-9

    def test_agreement_random_points(self):
        rng = random.Random(17)
        d = convolution_density_closed()
        den = 499
        for label in CHAMBER_LABELS:
            for _ in range(100):
                r = F(-rng.randint(1, 5 * den), den)
                if label == "C1":
                    s = F(rng.randint(0, -r.numerator), den)
                elif label == "C2":
                    s = F(rng.randint(r.numerator, 0), den)
                elif label == "C3":
                    s = r - F(rng.randint(0, 3 * den), den)
                else:
                    r = F(rng.randint(1, 2 * den), den)
                    s = F(rng.randint(-2 * den, 2 * den), den)
                err = abs(fiber_polytope_density((r, s)) - float(d.evaluate(r, s)))
                assert err < 1e-9, (label, r, s, err)


class TestMarginalSupport:
    def test_worked_example(self):
        assert marginal_support(SPEC_45) == MarginalSupport(F(1, 10), F(13, 50), F(11, 25))

    def test_degenerate_b1(self):
        c = CenteredSpectrum([F(3, 20), F(1, 20), F(-1, 20), F(-3, 20)])
        assert marginal_support(c).b1 == 0

    def test_symmetric_degenerate(self):
        c = CenteredSpectrum([F(3, 8), F(-1, 8), F(-1, 8), F(-1, 8)])
        b = marginal_support(c)
        assert b.b2 == b.b3 == F(1, 2)

    def test_ordering_invariant(self):
        rng = random.Random(23)
        for _ in range(50):
            b = marginal_support(random_simple_centered(rng))
            assert 0 <= b.b1 <= b.b2 <= b.b3


class TestMomentPolytope:
    def test_vertices_on_boundary(self):
        b = marginal_support(SPEC_45)
        poly = moment_polytope(b)
        for x, y in [(b.b2, b.b1), (b.b1, b.b2), (b.b2, b.b3), (b.b3, b.b2), (b.b1, b.b3), (b.b3, b.b1)]:
            assert poly.contains(x, y)

    def test_outside_box(self):
        b = marginal_support(SPEC_45)
        assert not moment_polytope(b).contains(b.b3 + F(1, 1000), 0)

    def test_origin(self):
        b = marginal_support(SPEC_45)
        # |0 - 0| <= b3 - b1 always holds, so the origin is a member.
        assert moment_polytope(b).contains(0, 0)


class TestBravyi:
    def test_maximally_mixed(self):
        s = Spectrum([F(1, 4)] * 4)
        assert bravyi_compatible(s, F(1, 2), F(1, 2))

    def test_pure_entangled(self):
        s = Spectrum([1, 0, 0, 0])
        assert bravyi_compatible(s, F(1, 2), F(1, 2))

    def test_pure_mismatched_marginals(self):
        s = Spectrum([1, 0, 0, 0])
        assert not bravyi_compatible(s, F(1, 2), F(0))


class TestMarginalGapDensity:
    def test_vanishes_at_ends(self):
        d = marginal_gap_density(SPEC_45)
        assert d.evaluate(0) == 0
        assert d.evaluate(marginal_support(SPEC_45).b3) == 0

    def test_exact_mass_worked_example(self):
        assert total_gap_mass(SPEC_45) == vandermonde_over_twelve(SPEC_45)

    def test_exact_mass_random(self):
        rng = random.Random(31)
        for _ in range(10):
            c = random_simple_centered(rng)
            assert total_gap_mass(c) == vandermonde_over_twelve(c)

    def test_continuity_at_breakpoints(self):
        d = marginal_gap_density(SPEC_45)
        for i in range(len(d.pieces) - 1):
            bp = d.breakpoints[i + 1]
            assert d.pieces[i].evaluate([bp]) == d.pieces[i + 1].evaluate([bp])

    def test_nonnegative_on_support(self):
        d = marginal_gap_density(SPEC_45)
        b3 = float(marginal_support(SPEC_45).b3)
        for i in range(501):
            assert d.evaluate_float(b3 * i / 500) >= -1e-12

    def test_degenerate_b1_drops_first_piece(self):
        c = CenteredSpectrum([F(3, 20), F(1, 20), F(-1, 20), F(-3, 20)])
        d = marginal_gap_density(c)
        assert d.breakpoints[0] == 0 and d.breakpoints[1] > 0
        assert total_gap_mass(c) == vandermonde_over_twelve(c)

    def test_scaling_covariance(self):
        rng = random.Random(37)
        for _ in range(10):
            c = random_simple_centered(rng)
            tau = F(rng.randint(1, 9), rng.randint(1, 9))
            base = marginal_support(c)
            scaled = marginal_support(c.scaled(tau))
            assert scaled == MarginalSupport(tau * base.b1, tau * base.b2, tau * base.b3)
            assert marginal_gap_density(c.scaled(tau)).breakpoints[-1] == tau * base.b3


class TestMarginalOracle:
    SPECTRA = [
        SPEC_45,
        CenteredSpectrum([F(1, 10), F(1, 100), F(-7, 200), F(-3, 40)]),
        CenteredSpectrum([F(9, 40), F(1, 40), F(-2, 40), F(-8, 40)]),
    ]

    def test_agreement_grid(self):
        for c in self.SPECTRA:
            d = marginal_gap_density(c)
            b3 = float(marginal_support(c).b3)
            for i in range(1, 51):
                x = b3 * i / 52
                got = marginal_gap_density_numeric(c, x)
                want = d.evaluate_float(x)
                assert abs(got - want) < 1e-6, (c.entries, x, got, want)

    def test_inside_first_interval(self):
        b1 = float(marginal_support(SPEC_45).b1)
        x = 0.5 * b1
        d = marginal_gap_density(SPEC_45)
        assert abs(marginal_gap_density_numeric(SPEC_45, x) - d.evaluate_float(x)) < 1e-8

    def test_support_edge(self):
        b3 = float(marginal_support(SPEC_45).b3)
        assert abs(marginal_gap_density_numeric(SPEC_45, b3 - 1e-6)) < 1e-6

    def test_outside_support(self):
        assert marginal_gap_density_numeric(SPEC_45, -0.1) == 0.0
        assert marginal_gap_density_numeric(SPEC_45, 0.9) == 0.0

"""Exact pipeline from the marginal-gap density to the separability
probability 8/33.

The centered-spectrum simplex is reparametrized by scaled spectral gaps,
the gap density is pulled back, and three partial integrals over explicit
iterated regions assemble the conditioned separable volume polynomial.  All
arithmetic is exact; no floating point enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import NamedTuple, Sequence

from .exactmath import (
    MultiPoly,
    SymbolicReal,
    compose,
    extract_univariate,
    integrate_once,
    iterated_integrate,
)
from .volumes import state_space_volume_hs

# Integrand variables: the free gap parameter x plus the three scaled
# spectral gaps of the global spectrum.
X, T1, T2, T3 = 0, 1, 2, 3

_F = Fraction


def _v(i: int) -> MultiPoly:
    return MultiPoly.variable(4, i)


def _c(q) -> MultiPoly:
    return MultiPoly.constant(4, q)


class ChangeOfVariables(NamedTuple):
    """Affine reparametrization of centered spectra by scaled gaps."""

    forward: tuple[MultiPoly, ...]  # centered entries as polynomials in (t1..t4)
    inverse: tuple[MultiPoly, ...]  # gap coordinates as polynomials in the entries
    jacobian: Fraction


def gap_change_of_variables() -> ChangeOfVariables:
    """Map t -> centered spectrum and back, with the exact volume factor.

    Forward: entry_k = sum_{j>=k} t_j / j - 1/4; inverse: t_k = k * (gap of
    consecutive entries), t_4 = 4*entry_4 + 1.  The Jacobian is computed from
    the reduced 3x3 matrix after eliminating t_4 on the trace-zero surface.
    """
    t = [MultiPoly.variable(4, i) for i in range(4)]
    quarter = MultiPoly.constant(4, _F(1, 4))
    forward = []
    for k in range(4):
        p = -quarter
        for j in range(k, 4):
            p = p + t[j] * _F(1, j + 1)
        forward.append(p)

    lam = [MultiPoly.variable(4, i) for i in range(4)]
    inverse = (
        lam[0] - lam[1],
        (lam[1] - lam[2]) * 2,
        (lam[2] - lam[3]) * 3,
        lam[3] * 4 + MultiPoly.constant(4, 1),
    )

    # Eliminate t4 = 1 - t1 - t2 - t3 and differentiate the first three
    # entries with respect to (t1, t2, t3).
    elim = MultiPoly.constant(4, 1) - t[0] - t[1] - t[2]
    reduced = [p.substitute(3, elim) for p in forward[:3]]
    m = [[reduced[i].derivative(j).evaluate([0, 0, 0, 0]) for j in range(3)] for i in range(3)]
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    return ChangeOfVariables(tuple(forward), inverse, abs(det))


def vandermonde_gap_poly() -> MultiPoly:
    """Spectrum Vandermonde in gap coordinates.

    t1*t2*t3*(2t1+t2)*(3t2+2t3)*(6t1+3t2+2t3) / 432, expanded.
    """
    t1, t2, t3 = _v(T1), _v(T2), _v(T3)
    return (
        t1 * t2 * t3 * (t1 * 2 + t2) * (t2 * 3 + t3 * 2) * (t1 * 6 + t2 * 3 + t3 * 2) / 432
    )


def support_polys() -> tuple[MultiPoly, MultiPoly, MultiPoly]:
    """Marginal-support breakpoints in gap coordinates.

    Returns (b1_signed, b2, b3) with b1_signed = t1 - t3/3; its absolute
    value is resolved per integration subregion.
    """
    t1, t2, t3 = _v(T1), _v(T2), _v(T3)
    return (t1 - t3 / 3, t1 + t3 / 3, t1 + t2 + t3 / 3)


def gap_integrand(k: int, branch: str | None = None) -> MultiPoly:
    """The k-th gap-density contribution pulled back to gap coordinates.

    k = 1 comes in two sign-resolved variants: branch "pos" for the part of
    the region where t1 - t3/3 >= x and "neg" where t1 - t3/3 <= -x.  The
    k = 2 contribution carries a negative prefactor; it subtracts mass.
    """
    x = _v(X)
    t1, t2, t3 = _v(T1), _v(T2), _v(T3)
    if k == 1:
        if branch not in ("pos", "neg"):
            raise ValueError("contribution 1 needs branch 'pos' or 'neg'")
        signed = (t1 - t3 / 3) if branch == "pos" else (t3 / 3 - t1)
        return t2 * (t1 + t2 / 2 + t3 / 3) / 32 * (signed - x) ** 2 * x
    if branch is not None:
        raise ValueError("only contribution 1 has branches")
    if k == 2:
        return -(t1 + t2 / 2) * (t2 / 2 + t3 / 3) / 16 * (t1 + t3 / 3 - x) ** 2 * x
    if k == 3:
        return t1 * t3 / 48 * (t1 + t2 + t3 / 3 - x) ** 2 * x
    raise ValueError("contribution index must be 1, 2 or 3")


def gap_integrand_pullback(k: int) -> MultiPoly:
    """The same contribution built directly from the breakpoint polynomials.

    Cross-check target for :func:`gap_integrand`.  For k = 1 this uses the
    signed breakpoint t1 - t3/3, so it matches the "pos" branch; the "neg"
    branch matches after flipping that sign.
    """
    x = _v(X)
    b1, b2, b3 = support_polys()
    if k == 1:
        return (b3 * b3 - b2 * b2) / 64 * x * (x - b1) ** 2
    if k == 2:
        return (b1 * b1 - b3 * b3) / 64 * x * (x - b2) ** 2
    if k == 3:
        return (b2 * b2 - b1 * b1) / 64 * x * (x - b3) ** 2
    raise ValueError("contribution index must be 1, 2 or 3")


# Iterated integration bounds, innermost triple first.  Each bound is linear
# and may depend on x and on the not-yet-integrated gap variables only.
def _bounds(name: str) -> list[tuple[int, MultiPoly, MultiPoly]]:
    x = _v(X)
    t1, t2, t3 = _v(T1), _v(T2), _v(T3)
    zero = _c(0)
    one = _c(1)
    if name == "R1a":
        return [
            (T1, x + t3 / 3, one / 3 - t2 / 3 - t3 / 9),
            (T2, zero, one - x * 3 - t3 * _F(4, 3)),
            (T3, zero, (one - x * 3) * _F(3, 4)),
        ]
    if name == "R1b":
        return [
            (T3, x * 3 + t1 * 3, one - t1 - t2),
            (T1, zero, (one - x * 3 - t2) / 4),
            (T2, zero, one - x * 3),
        ]
    if name == "Delta3":
        return [
            (T1, zero, one - t2 - t3),
            (T2, zero, one - t3),
            (T3, zero, one),
        ]
    if name in ("R2a", "R3a"):
        return [
            (T1, one / 3 - t2 / 3 - t3 / 9, one - t2 - t3),
            (T2, zero, one - t3 * _F(4, 3)),
            (T3, zero, _c(_F(3, 4))),
        ]
    if name == "R2b":
        return [
            (T2, zero, one - t1 - t3),
            (T1, zero, x - t3 / 3),
            (T3, zero, x * 3),
        ]
    if name == "R2ab":
        return [
            (T2, one - t1 * 3 - t3 / 3, one - t1 - t3),
            (T1, t3 / 3, x - t3 / 3),
            (T3, zero, x * _F(3, 2)),
        ]
    if name == "R3b":
        return [
            (T1, zero, x - t2 - t3 / 3),
            (T2, zero, x - t3 / 3),
            (T3, zero, x * 3),
        ]
    raise ValueError(f"unknown region {name!r}")


REGION_NAMES = ("R", "Delta3", "R1a", "R1b", "R2a", "R2b", "R2ab", "R3a", "R3b")

# Signed decompositions behind each partial integral: (region, sign, branch).
REGION_DECOMPOSITION: dict[int, list[tuple[str, int, str | None]]] = {
    1: [("R1a", +1, "pos"), ("R1b", +1, "neg")],
    2: [("Delta3", +1, None), ("R2ab", +1, None), ("R2a", -1, None), ("R2b", -1, None)],
    3: [("Delta3", +1, None), ("R3a", -1, None), ("R3b", -1, None)],
}

# Measure factor: the x2 spectrum-ordering unfolding over the Jacobian 4!.
_MEASURE_FACTOR = _F(2, 24)


def region_integral(name: str, integrand: MultiPoly) -> MultiPoly:
    """Exact iterated integral of ``integrand`` over one named region.

    The result is a univariate polynomial in the free gap parameter x.
    """
    return extract_univariate(iterated_integrate(integrand, _bounds(name)), X)


def region_volume(name: str, at_x) -> Fraction:
    """Exact Euclidean volume of a named region for a fixed x value.

    The umbrella region "R" is the simplex minus its steep cap, which is the
    only piece that has no single iterated-bounds form.
    """
    xv = Fraction(at_x)
    if name == "R":
        return region_volume("Delta3", xv) - region_volume("R2a", xv)
    vol = region_integral(name, _c(1))
    return vol.evaluate([xv])


def region_bounds_ordered(name: str, at_x, samples: int = 4) -> bool:
    """Spot-check lower <= upper for every bound pair at a fixed x.

    Walks the bounds outermost first, sampling each variable on a rational
    grid inside its own range.
    """
    if name == "R":
        return region_bounds_ordered("Delta3", at_x, samples) and region_bounds_ordered(
            "R2a", at_x, samples
        )
    xv = Fraction(at_x)
    bounds = list(reversed(_bounds(name)))

    def walk(level: int, point: list[Fraction]) -> bool:
        if level == len(bounds):
            return True
        var, lower, upper = bounds[level]
        lo = lower.evaluate(point)
        hi = upper.evaluate(point)
        if lo > hi:
            return False
        for i in range(samples):
            value = lo + (hi - lo) * _F(i, samples - 1) if samples > 1 else lo
            nxt = list(point)
            nxt[var] = value
            if not walk(level + 1, nxt):
                return False
        return True

    return walk(0, [xv, _F(0), _F(0), _F(0)])


@lru_cache(maxsize=None)
def gap_piece_partials(k: int) -> dict[str, MultiPoly]:
    """Signed per-region contributions to the k-th partial integral."""
    out: dict[str, MultiPoly] = {}
    for name, sign, branch in REGION_DECOMPOSITION[k]:
        integrand = vandermonde_gap_poly() * gap_integrand(k, branch)
        out[name] = region_integral(name, integrand) * (sign * _MEASURE_FACTOR)
    return out


def gap_piece(k: int, order: Sequence[int] | None = None) -> MultiPoly:
    """The k-th partial integral as an exact univariate polynomial in x.

    ``order`` optionally permutes the summation order of the signed
    subregions; the result is independent of it.
    """
    partials = list(gap_piece_partials(k).values())
    if order is not None:
        if sorted(order) != list(range(len(partials))):
            raise ValueError("order must permute the subregion indices")
        partials = [partials[i] for i in order]
    total = MultiPoly(1)
    for p in partials:
        total = total + p
    return total


@lru_cache(maxsize=None)
def gap_piece_sum() -> MultiPoly:
    return gap_piece(1) + gap_piece(2) + gap_piece(3)


@dataclass(frozen=True)
class RadialVolumePoly:
    """Conditioned separable-slice volume as prefactor times a primitive
    integer polynomial in the marginal Bloch radius."""

    prefactor: SymbolicReal
    poly: MultiPoly  # arity 1, integer coefficients, content 1

    def evaluate(self, a) -> SymbolicReal:
        value = self.poly.evaluate([Fraction(a)])
        return self.prefactor * value

    def to_float(self, a: float) -> float:
        return self.prefactor.to_float() * self.poly.evaluate_float([a])


def _content(p: MultiPoly) -> Fraction:
    nums = [abs(c.numerator) for c in p.terms.values()]
    dens = [c.denominator for c in p.terms.values()]
    return Fraction(gcd(*nums), lcm(*dens)) if nums else Fraction(1)


@lru_cache(maxsize=None)
def separable_slice_poly() -> RadialVolumePoly:
    """The conditioned separable volume as a function of the Bloch radius.

    Valid on [0, 1/3]; the value at 0 extends by continuity.  The partial
    integrals carry an overall x^2 factor that must cancel against the
    radial density; failure to cancel means an integration bug upstream and
    raises immediately.
    """
    total = gap_piece_sum()
    if total.min_degree_in(0) < 2:
        raise ArithmeticError("radial factor x^2 did not cancel; integration is inconsistent")
    q = total.shift_down(0, 2) * 128
    content = _content(q)
    return RadialVolumePoly(SymbolicReal(content, pi_power=5), q / content)


def separable_slice_volume(a) -> SymbolicReal:
    """Conditioned separable volume at Bloch radius ``a`` in [0, 1/3]."""
    a = Fraction(a)
    if not 0 <= a <= _F(1, 3):
        raise ValueError("the closed form is only established on [0, 1/3]")
    return separable_slice_poly().evaluate(a)


# Conditioned full-slice volume at radius 0; the radial identity check below
# confirms it against the independently computed state-space volume.
ZERO_CONDITIONED_VOLUME = SymbolicReal(_F(1, 9676800), pi_power=5)


def conditioned_volume(a) -> SymbolicReal:
    """HS volume of the fixed-marginal slice at Bloch radius ``a`` < 1.

    Scales as (1 - a^2)^6 from the radius-0 slice.
    """
    a = Fraction(a)
    if not 0 <= a < 1:
        raise ValueError("Bloch radius must lie in [0, 1)")
    return ZERO_CONDITIONED_VOLUME * (1 - a * a) ** 6


def radial_shell_integral() -> Fraction:
    """Exact value of the radial moment integral of the slice scaling.

    integral_0^1 a^2 (1 - a^2)^6 da, computed by the polynomial engine.
    """
    a = MultiPoly.variable(1, 0)
    integrand = a * a * (MultiPoly.constant(1, 1) - a * a) ** 6
    return integrate_once(integrand, 0, 0, 1).evaluate([0])


def radial_volume_identity_holds() -> bool:
    """Exact check that slicing by marginal radius recovers the state space.

    (pi/2) * radial moment * slice volume at 0  ==  full two-qubit HS volume.
    """
    shell = SymbolicReal(radial_shell_integral() / 2, pi_power=1)
    lhs = shell * ZERO_CONDITIONED_VOLUME
    return lhs == state_space_volume_hs(4)


def separability_probability() -> Fraction:
    """The headline ratio: separable slice volume over slice volume at 0."""
    sep = separable_slice_volume(0)
    full = ZERO_CONDITIONED_VOLUME
    ratio = sep / full
    if ratio.pi_power != 0 or ratio.radicand != 1:
        raise ArithmeticError("pi powers failed to cancel in the probability")
    return ratio.coeff


def centered_vandermonde_in_gaps_matches() -> bool:
    """Structural identity: the gap-coordinate Vandermonde equals the product
    of entry differences pushed through the change of variables."""
    change = gap_change_of_variables()
    product = MultiPoly.constant(4, 1)
    for i in range(4):
        for j in range(i + 1, 4):
            product = product * (change.forward[i] - change.forward[j])
    # The forward map lives in (t1..t4) with indices 0..3; shift into the
    # integrand variable layout (x, t1, t2, t3) where t4 = 1 - t1 - t2 - t3.
    t_in_layout = [
        _v(T1),
        _v(T2),
        _v(T3),
        _c(1) - _v(T1) - _v(T2) - _v(T3),
    ]
    return compose(product, t_in_layout) == vandermonde_gap_poly()

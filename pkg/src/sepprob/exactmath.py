"""Exact arithmetic substrate: multivariate polynomials over the rationals,
truncated Laurent series in one formal variable, and symbolic constants of the
form q * pi**k * sqrt(m).

Rationals are plain ``fractions.Fraction`` (arbitrary precision; denominators
like 15! appear downstream and must stay exact).  Polynomials map exponent
tuples to nonzero Fraction coefficients, so equality is structural and
bit-exact.  Variables are positional indices; the modules that build concrete
expressions keep their own symbol tables.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, pi, sqrt
from typing import Mapping, Sequence

Rational = Fraction

Exponent = tuple[int, ...]


def rational_str(q: Fraction) -> str:
    """Serialize a rational as the stable "num/den" form."""
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s: str) -> Fraction:
    """Parse "num/den", a bare integer, or a decimal literal."""
    s = s.strip()
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return Fraction(s)


def decimal_str(x: float) -> str:
    """Render a float with 17 significant digits (round-trip safe)."""
    return format(x, ".17g")


class MultiPoly:
    """Multivariate polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples of length ``arity`` to nonzero Fractions;
    the zero polynomial is the empty map.  Instances are treated as immutable.
    """

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[Exponent, Fraction] | None = None):
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        self.arity = arity
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                if len(exps) != arity:
                    raise ValueError(f"exponent tuple {exps} does not match arity {arity}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                coeff = Fraction(coeff)
                if coeff != 0:
                    clean[tuple(exps)] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, arity: int, value) -> "MultiPoly":
        value = Fraction(value)
        if value == 0:
            return cls(arity)
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def variable(cls, arity: int, index: int) -> "MultiPoly":
        if not 0 <= index < arity:
            raise ValueError(f"variable index {index} out of range for arity {arity}")
        exps = [0] * arity
        exps[index] = 1
        return cls(arity, {tuple(exps): Fraction(1)})

    @classmethod
    def linear(cls, arity: int, coeffs: Mapping[int, Fraction] | Sequence, const=0) -> "MultiPoly":
        """Affine form const + sum coeffs[i] * x_i."""
        if not isinstance(coeffs, Mapping):
            coeffs = dict(enumerate(coeffs))
        p = cls.constant(arity, const)
        for i, c in coeffs.items():
            p = p + cls.variable(arity, i) * Fraction(c)
        return p

    # -- ring operations ---------------------------------------------------

    def _check_arity(self, other: "MultiPoly") -> None:
        if self.arity != other.arity:
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.arity, other)
        self._check_arity(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return MultiPoly(self.arity, terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.arity, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.arity, other)
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            c = Fraction(other)
            return MultiPoly(self.arity, {e: k * c for e, k in self.terms.items()})
        self._check_arity(other)
        terms: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.arity, terms)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "MultiPoly":
        c = Fraction(scalar)
        if c == 0:
            raise ZeroDivisionError("division of polynomial by zero")
        return self * (1 / c)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = MultiPoly.constant(self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.constant(self.arity, other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self, var: int | None = None) -> int:
        """Total degree, or degree in one variable; zero polynomial gives -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        return max(e[var] for e in self.terms)

    def min_degree_in(self, var: int) -> int:
        """Smallest exponent of ``var`` across terms; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return min(e[var] for e in self.terms)

    def involves(self, var: int) -> bool:
        return any(e[var] > 0 for e in self.terms)

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in graded-lexicographic order (canonical presentation)."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def coefficient(self, exps: Exponent) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def evaluate(self, values: Sequence) -> Fraction:
        """Exact evaluation at a full point (Fractions in, Fraction out)."""
        if len(values) != self.arity:
            raise ValueError("evaluation point has wrong length")
        vals = [Fraction(v) for v in values]
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for v, e in zip(vals, exps):
                if e:
                    term *= v**e
            total += term
        return total

    def evaluate_float(self, values: Sequence[float]) -> float:
        if len(values) != self.arity:
            raise ValueError("evaluation point has wrong length")
        total = 0.0
        for exps, coeff in self.terms.items():
            term = float(coeff)
            for v, e in zip(values, exps):
                if e:
                    term *= v**e
            total += term
        return total

    # -- calculus ----------------------------------------------------------

    def substitute(self, var: int, value: "MultiPoly") -> "MultiPoly":
        """Exact composition: replace variable ``var`` by the polynomial ``value``."""
        if not 0 <= var < self.arity:
            raise ValueError(f"variable index {var} out of range")
        if not isinstance(value, MultiPoly):
            value = MultiPoly.constant(self.arity, value)
        self._check_arity(value)
        # Group by the exponent of var, then use Horner on cached powers.
        powers: dict[int, MultiPoly] = {0: MultiPoly.constant(self.arity, 1)}
        result = MultiPoly(self.arity)
        for exps, coeff in self.terms.items():
            k = exps[var]
            if k not in powers:
                m = max(powers)
                p = powers[m]
                for j in range(m + 1, k + 1):
                    p = p * value
                    powers[j] = p
            rest = list(exps)
            rest[var] = 0
            result = result + MultiPoly(self.arity, {tuple(rest): coeff}) * powers[k]
        return result

    def derivative(self, var: int) -> "MultiPoly":
        if not 0 <= var < self.arity:
            raise ValueError(f"variable index {var} out of range")
        terms: dict[Exponent, Fraction] = {}
        for exps, coeff in self.terms.items():
            k = exps[var]
            if k == 0:
                continue
            e = list(exps)
            e[var] = k - 1
            terms[tuple(e)] = coeff * k
        return MultiPoly(self.arity, terms)

    def antiderivative(self, var: int) -> "MultiPoly":
        if not 0 <= var < self.arity:
            raise ValueError(f"variable index {var} out of range")
        terms: dict[Exponent, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = list(exps)
            e[var] = exps[var] + 1
            terms[tuple(e)] = coeff / (exps[var] + 1)
        return MultiPoly(self.arity, terms)

    def shift_down(self, var: int, k: int) -> "MultiPoly":
        """Divide exactly by var**k (every term must carry at least var**k)."""
        terms: dict[Exponent, Fraction] = {}
        for exps, coeff in self.terms.items():
            if exps[var] < k:
                raise ArithmeticError(f"term {exps} not divisible by variable {var}**{k}")
            e = list(exps)
            e[var] = exps[var] - k
            terms[tuple(e)] = coeff
        return MultiPoly(self.arity, terms)

    def to_json(self) -> list[dict]:
        return [
            {"exps": list(exps), "coeff": rational_str(coeff)}
            for exps, coeff in self.sorted_terms()
        ]

    def __repr__(self) -> str:
        if self.is_zero:
            return "MultiPoly(0)"
        parts = []
        for exps, coeff in self.sorted_terms():
            mono = "*".join(f"x{i}^{e}" for i, e in enumerate(exps) if e)
            parts.append(f"{coeff}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"


def compose(outer: MultiPoly, inner: Sequence[MultiPoly]) -> MultiPoly:
    """Simultaneous substitution: outer(x_0, ..., x_{k-1}) with x_i := inner[i].

    All inner polynomials must share one arity, which becomes the arity of
    the result.  Unlike repeated ``substitute`` calls, the replacement is
    simultaneous, so inner polynomials may reuse the same variable indices.
    """
    if len(inner) != outer.arity:
        raise ValueError("need one inner polynomial per outer variable")
    if not inner:
        return MultiPoly(0, dict(outer.terms))
    arity = inner[0].arity
    if any(q.arity != arity for q in inner):
        raise ValueError("inner polynomials must share one arity")
    result = MultiPoly(arity)
    powers: list[dict[int, MultiPoly]] = [{0: MultiPoly.constant(arity, 1)} for _ in inner]
    for exps, coeff in outer.terms.items():
        term = MultiPoly.constant(arity, coeff)
        for i, e in enumerate(exps):
            if e not in powers[i]:
                m = max(powers[i])
                p = powers[i][m]
                for j in range(m + 1, e + 1):
                    p = p * inner[i]
                    powers[i][j] = p
            term = term * powers[i][e]
        result = result + term
    return result


def extract_univariate(p: MultiPoly, var: int) -> MultiPoly:
    """Collapse a polynomial that only involves ``var`` down to arity 1."""
    terms: dict[Exponent, Fraction] = {}
    for exps, coeff in p.terms.items():
        if any(e and i != var for i, e in enumerate(exps)):
            raise ValueError(f"polynomial involves variables other than {var}")
        terms[(exps[var],)] = coeff
    return MultiPoly(1, terms)


def integrate_once(p: MultiPoly, var: int, lower, upper) -> MultiPoly:
    """Definite integral of ``p`` in ``var`` between polynomial bounds.

    The bounds must not involve ``var``; the result is the antiderivative
    evaluated by exact substitution.
    """
    if not isinstance(lower, MultiPoly):
        lower = MultiPoly.constant(p.arity, lower)
    if not isinstance(upper, MultiPoly):
        upper = MultiPoly.constant(p.arity, upper)
    if lower.involves(var) or upper.involves(var):
        raise ValueError(f"integration bound depends on variable {var}")
    anti = p.antiderivative(var)
    return anti.substitute(var, upper) - anti.substitute(var, lower)


def iterated_integrate(
    p: MultiPoly, bounds: Sequence[tuple[int, MultiPoly | int | Fraction, MultiPoly | int | Fraction]]
) -> MultiPoly:
    """Nested definite integral, innermost bound triple first.

    Each bound may depend only on variables not yet integrated out; violating
    that ordering raises ValueError.
    """
    done: set[int] = set()
    result = p
    for var, lower, upper in bounds:
        if var in done:
            raise ValueError(f"variable {var} integrated twice")
        if not isinstance(lower, MultiPoly):
            lower = MultiPoly.constant(p.arity, lower)
        if not isinstance(upper, MultiPoly):
            upper = MultiPoly.constant(p.arity, upper)
        for b in (lower, upper):
            bad = [v for v in done if b.involves(v)]
            if bad:
                raise ValueError(f"bound for variable {var} depends on integrated-out {bad}")
        result = integrate_once(result, var, lower, upper)
        done.add(var)
    return result


class LaurentSeries:
    """Truncated Laurent series sum_{d=min_degree}^{truncation_order} c_d z**d.

    Coefficients are MultiPoly values in the outer variables.  Only what the
    residue extraction needs is implemented: multiplication, the exponential
    of a linear form, and inverses of linear factors c + b*z.
    """

    __slots__ = ("arity", "min_degree", "truncation_order", "coeffs")

    def __init__(self, arity: int, min_degree: int, coeffs: Sequence[MultiPoly], truncation_order: int):
        if len(coeffs) != truncation_order - min_degree + 1:
            raise ValueError("coefficient list length must be truncation_order - min_degree + 1")
        self.arity = arity
        self.min_degree = min_degree
        self.truncation_order = truncation_order
        self.coeffs = list(coeffs)

    @classmethod
    def one(cls, arity: int, order: int) -> "LaurentSeries":
        coeffs = [MultiPoly.constant(arity, 1 if d == 0 else 0) for d in range(order + 1)]
        return cls(arity, 0, coeffs, order)

    @classmethod
    def exp_linear(cls, exponent: MultiPoly, order: int) -> "LaurentSeries":
        """exp(L * z) truncated at z**order, L a polynomial in the outer variables."""
        coeffs = []
        power = MultiPoly.constant(exponent.arity, 1)
        for j in range(order + 1):
            coeffs.append(power * Fraction(1, factorial(j)))
            power = power * exponent
        return cls(exponent.arity, 0, coeffs, order)

    @classmethod
    def inverse_linear(cls, arity: int, constant, z_coeff, order: int) -> "LaurentSeries":
        """1 / (constant + z_coeff * z) as a truncated series.

        Zero constant gives the single pole term z**-1 / z_coeff; otherwise a
        geometric expansion around z = 0.
        """
        c = Fraction(constant)
        b = Fraction(z_coeff)
        if c == 0:
            if b == 0:
                raise ZeroDivisionError("factor is identically zero")
            coeffs = [MultiPoly.constant(arity, Fraction(1) / b)]
            coeffs += [MultiPoly.constant(arity, 0) for _ in range(order + 1)]
            return cls(arity, -1, coeffs, order)
        ratio = -b / c
        coeffs = []
        val = Fraction(1) / c
        for _ in range(order + 1):
            coeffs.append(MultiPoly.constant(arity, val))
            val *= ratio
        return cls(arity, 0, coeffs, order)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        order = min(self.truncation_order, other.truncation_order)
        lo = self.min_degree + other.min_degree
        out = [MultiPoly(self.arity) for _ in range(order - lo + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            da = self.min_degree + i
            for j, b in enumerate(other.coeffs):
                d = da + other.min_degree + j
                if d > order:
                    break
                if b.is_zero:
                    continue
                out[d - lo] = out[d - lo] + a * b
        return LaurentSeries(self.arity, lo, out, order)

    def coefficient(self, degree: int) -> MultiPoly:
        if degree < self.min_degree or degree > self.truncation_order:
            return MultiPoly(self.arity)
        return self.coeffs[degree - self.min_degree]

    def residue(self) -> MultiPoly:
        """Coefficient of z**-1; requires the window to cover degree -1."""
        if self.min_degree > -1 or self.truncation_order < -1:
            raise ValueError("series window does not include degree -1")
        return self.coefficient(-1)


def residue_of_exp_over_linear_factors(
    exponent: MultiPoly,
    factors: Sequence[tuple[Fraction | int, Fraction | int]],
    order: int = 8,
) -> MultiPoly:
    """Res_{z=0} [ exp(L*z) / prod_k (c_k + b_k z) ] as an exact polynomial.

    ``exponent`` is L, a polynomial in the outer variables; each factor is a
    pair (constant, z-coefficient).  With no zero-constant factor there is no
    pole and the residue is zero.  The truncation order must cover the pole
    order; the default 8 is ample for pole order up to 3.
    """
    pole_order = sum(1 for c, _ in factors if Fraction(c) == 0)
    if pole_order == 0:
        return MultiPoly(exponent.arity)
    if order < pole_order:
        raise ValueError(f"truncation order {order} below pole order {pole_order}")
    series = LaurentSeries.exp_linear(exponent, order)
    for c, b in factors:
        series = series * LaurentSeries.inverse_linear(exponent.arity, c, b, order)
    return series.residue()


def _square_free_split(n: int) -> tuple[int, int]:
    """Return (s, m) with n = s*s*m and m square-free."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    s, m = 1, 1
    d = 2
    rest = n
    while d * d <= rest:
        if rest % d == 0:
            e = 0
            while rest % d == 0:
                rest //= d
                e += 1
            s *= d ** (e // 2)
            if e % 2:
                m *= d
        d += 1 if d == 2 else 2
    m *= rest
    return s, m


class SymbolicReal:
    """Exact constant coeff * pi**pi_power * sqrt(radicand).

    The radicand is kept square-free; zero is canonically (0, 0, 1).  Sums
    are only defined between like terms (same pi power and radicand), which
    is all the volume formulas need.
    """

    __slots__ = ("coeff", "pi_power", "radicand")

    def __init__(self, coeff, pi_power: int = 0, radicand: int = 1):
        coeff = Fraction(coeff)
        if pi_power < 0:
            raise ValueError("pi_power must be nonnegative")
        if coeff == 0:
            self.coeff, self.pi_power, self.radicand = Fraction(0), 0, 1
            return
        s, m = _square_free_split(radicand)
        self.coeff = coeff * s
        self.pi_power = pi_power
        self.radicand = m

    @classmethod
    def from_rational(cls, q) -> "SymbolicReal":
        return cls(Fraction(q))

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def __mul__(self, other) -> "SymbolicReal":
        if isinstance(other, SymbolicReal):
            return SymbolicReal(
                self.coeff * other.coeff,
                self.pi_power + other.pi_power,
                self.radicand * other.radicand,
            )
        return SymbolicReal(self.coeff * Fraction(other), self.pi_power, self.radicand)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SymbolicReal":
        if isinstance(other, SymbolicReal):
            if other.is_zero:
                raise ZeroDivisionError
            if other.radicand != self.radicand:
                raise ValueError("quotient of unlike radicands is not representable")
            if other.pi_power > self.pi_power:
                raise ValueError("quotient would need a negative pi power")
            return SymbolicReal(self.coeff / other.coeff, self.pi_power - other.pi_power, 1)
        return SymbolicReal(self.coeff / Fraction(other), self.pi_power, self.radicand)

    def _like(self, other: "SymbolicReal") -> bool:
        return (self.pi_power, self.radicand) == (other.pi_power, other.radicand)

    def __add__(self, other: "SymbolicReal") -> "SymbolicReal":
        if not isinstance(other, SymbolicReal):
            other = SymbolicReal.from_rational(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if not self._like(other):
            raise ValueError("sum of unlike symbolic constants is not representable")
        return SymbolicReal(self.coeff + other.coeff, self.pi_power, self.radicand)

    def __sub__(self, other: "SymbolicReal") -> "SymbolicReal":
        return self + (other * Fraction(-1))

    def __neg__(self) -> "SymbolicReal":
        return self * Fraction(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicReal):
            other = SymbolicReal.from_rational(other)
        return (
            self.coeff == other.coeff
            and self.pi_power == other.pi_power
            and self.radicand == other.radicand
        )

    def __hash__(self):
        return hash((self.coeff, self.pi_power, self.radicand))

    def to_float(self) -> float:
        return float(self.coeff) * pi**self.pi_power * sqrt(self.radicand)

    def to_json(self) -> dict:
        return {"coeff": rational_str(self.coeff), "pi_pow": self.pi_power, "sqrt": self.radicand}

    def __repr__(self) -> str:
        s = f"{self.coeff}"
        if self.pi_power:
            s += f"*pi^{self.pi_power}"
        if self.radicand != 1:
            s += f"*sqrt({self.radicand})"
        return f"SymbolicReal({s})"

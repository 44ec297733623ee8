"""Self-check suite behind ``verify all``.

Each check returns (name, passed, detail).  The default scales keep the whole
suite under a minute; ``deep=True`` reruns the stochastic checks at full
acceptance scale.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from . import dh_density as dh
from . import sampling as sp
from . import sep_integral as si
from . import volumes as vol
from .exactmath import MultiPoly, integrate_once, residue_of_exp_over_linear_factors
from .volumes import CenteredSpectrum

Check = tuple[str, bool, str]


def _random_poly(rng: random.Random, arity: int, degree: int) -> MultiPoly:
    terms = {}
    for _ in range(rng.randint(1, 6)):
        exps = tuple(rng.randint(0, degree) for _ in range(arity))
        terms[exps] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    return MultiPoly(arity, terms)


def check_ring_axioms(seed: int) -> Check:
    rng = random.Random(seed)
    for _ in range(60):
        a, b, c = (_random_poly(rng, 2, 3) for _ in range(3))
        if (a + b) * c != a * c + b * c:
            return ("poly distributivity", False, "distributivity violated")
        if a * b != b * a:
            return ("poly distributivity", False, "commutativity violated")
    return ("poly distributivity", True, "60 random triples")


def check_fundamental_theorem(seed: int) -> Check:
    rng = random.Random(seed)
    for _ in range(100):
        p = _random_poly(rng, 2, 6)
        v = rng.randint(0, 1)
        if p.antiderivative(v).derivative(v) != p:
            return ("derivative of antiderivative", False, "mismatch")
    return ("derivative of antiderivative", True, "100 random polynomials, degree <= 6")


def check_integral_linearity(seed: int) -> Check:
    rng = random.Random(seed)
    for _ in range(40):
        p, q = _random_poly(rng, 2, 4), _random_poly(rng, 2, 4)
        alpha = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        beta = Fraction(rng.randint(-5, 5), rng.randint(1, 5))
        lhs = integrate_once(p * alpha + q * beta, 0, 0, 1)
        rhs = integrate_once(p, 0, 0, 1) * alpha + integrate_once(q, 0, 0, 1) * beta
        if lhs != rhs:
            return ("integration linearity", False, "mismatch")
    return ("integration linearity", True, "40 random combinations")


def check_residue_truncation(seed: int) -> Check:
    rng = random.Random(seed)
    for _ in range(25):
        exponent = _random_poly(rng, 2, 1)
        factors = [(Fraction(0), Fraction(rng.choice([-4, -2, 2, 4]))) for _ in range(3)]
        factors.append((Fraction(rng.choice([1, 2, 3])), Fraction(rng.randint(-3, 3))))
        lo = residue_of_exp_over_linear_factors(exponent, factors, order=4)
        hi = residue_of_exp_over_linear_factors(exponent, factors, order=8)
        if lo != hi:
            return ("residue truncation insensitivity", False, "orders 4 and 8 disagree")
    return ("residue truncation insensitivity", True, "25 random pole configurations")


def check_volume_identities(seed: int) -> Check:
    for n in range(1, 9):
        b = n * (n - 1) // 2
        if vol.flag_volume_hs(n) != vol.flag_volume_euclid(n) * (2**b):
            return ("volume identities", False, f"flag scaling fails at N={n}")
    for n in (2, 3, 4):
        lhs = vol.state_space_volume_hs(n)
        rhs = vol.flag_volume_hs(n) * vol.simplex_vandermonde_integral(n) * vol.SymbolicReal(1, 0, n)
        if lhs != rhs:
            return ("volume identities", False, f"state-space identity fails at N={n}")
    rng = random.Random(seed)
    for _ in range(50):
        raw = sorted({Fraction(rng.randint(-40, 40), 97) for _ in range(4)}, reverse=True)
        if len(raw) < 4:
            continue
        centered = CenteredSpectrum([x - sum(raw) / 4 for x in raw])
        if not vol.hs_symplectic_relation_holds(centered):
            return ("volume identities", False, f"orbit relation fails at {centered}")
    return ("volume identities", True, "flag scaling, state space, 50 random orbits")


def check_density_routes(seed: int, points_per_chamber: int = 100) -> Check:
    closed = dh.convolution_density_closed()
    if dh.convolution_density_jump() != closed:
        return ("density routes", False, "wall-crossing route disagrees with closed form")
    r = MultiPoly.variable(2, 0)
    s = MultiPoly.variable(2, 1)
    walls = [
        closed.piece("C1").substitute(1, MultiPoly(2)) - closed.piece("C2").substitute(1, MultiPoly(2)),
        closed.piece("C2").substitute(1, r) - closed.piece("C3").substitute(1, r),
        closed.piece("C1").substitute(1, -r),
        closed.piece("C3").substitute(0, MultiPoly(2)),
    ]
    if any(not w.is_zero for w in walls):
        return ("density routes", False, "wall continuity identity broken")
    rng = random.Random(seed)
    worst = 0.0
    for label in ("C0", "C1", "C2", "C3"):
        for _ in range(points_per_chamber):
            pt = _chamber_point(rng, label)
            err = abs(dh.fiber_polytope_density(pt) - float(closed.evaluate(*pt)))
            worst = max(worst, err)
    if worst > 1e-9:
        return ("density routes", False, f"fiber oracle off by {worst:.2e}")
    return ("density routes", True, f"jump==closed, walls exact, oracle max err {worst:.1e}")


def _chamber_point(rng: random.Random, label: str) -> tuple[Fraction, Fraction]:
    den = 997
    rr = Fraction(-rng.randint(1, 5 * den), den)
    if label == "C1":
        ss = Fraction(rng.randint(0, -rr.numerator), den)
    elif label == "C2":
        ss = Fraction(rng.randint(rr.numerator, 0), den)
    elif label == "C3":
        ss = rr - Fraction(rng.randint(0, 3 * den), den)
    else:
        rr = Fraction(rng.randint(1, 3 * den), den)
        ss = Fraction(rng.randint(-5 * den, 5 * den), den)
    return rr, ss


def check_density_nonnegative(grid: int = 100) -> Check:
    closed = dh.convolution_density_closed()
    for i in range(grid):
        for j in range(grid):
            r = -5.0 * (i + 1) / grid
            theta = j / max(grid - 1, 1)
            for s_val in ((-r) * theta, r * theta, r - 5.0 * theta):
                if closed.evaluate_float(r, s_val) < -1e-12:
                    return ("density nonnegativity", False, f"negative at {(r, s_val)}")
    return ("density nonnegativity", True, f"{3 * grid * grid} grid points across chambers")


def _random_simple_centered(rng: random.Random) -> CenteredSpectrum:
    while True:
        raw = sorted({Fraction(rng.randint(1, 200), 401) for _ in range(4)}, reverse=True)
        if len(raw) == 4:
            total = sum(raw)
            return CenteredSpectrum([x / total - Fraction(1, 4) for x in raw])


def check_marginal_mass(seed: int, trials: int = 10) -> Check:
    rng = random.Random(seed)
    for _ in range(trials):
        c = _random_simple_centered(rng)
        if dh.total_gap_mass(c) != dh.vandermonde_over_twelve(c):
            return ("marginal density mass", False, f"mass identity fails for {c.entries}")
    return ("marginal density mass", True, f"{trials} random simple spectra, exact")


def check_marginal_oracle(grid: int = 50) -> Check:
    spectra = [
        CenteredSpectrum([Fraction(1, 5), Fraction(1, 50), Fraction(-7, 100), Fraction(-3, 20)]),
        CenteredSpectrum([Fraction(2, 10), Fraction(1, 50), Fraction(-7, 100), Fraction(-3, 20)]).scaled(Fraction(1, 2)),
        CenteredSpectrum([Fraction(9, 40), Fraction(1, 40), Fraction(-2, 40), Fraction(-8, 40)]),
    ]
    worst = 0.0
    for c in spectra:
        density = dh.marginal_gap_density(c)
        b3 = float(dh.marginal_support(c).b3)
        for i in range(1, grid + 1):
            x = b3 * i / (grid + 1)
            err = abs(dh.marginal_gap_density_numeric(c, x) - density.evaluate_float(x))
            worst = max(worst, err)
    if worst > 1e-6:
        return ("marginal oracle", False, f"max |oracle - closed| = {worst:.2e}")
    return ("marginal oracle", True, f"3 spectra x {grid} points, max err {worst:.1e}")


def check_scaling_covariance(seed: int) -> Check:
    rng = random.Random(seed)
    for _ in range(10):
        c = _random_simple_centered(rng)
        tau = Fraction(rng.randint(1, 8), rng.randint(1, 8))
        base = dh.marginal_support(c)
        scaled = dh.marginal_support(c.scaled(tau))
        if tuple(scaled) != tuple(tau * b for b in base):
            return ("scaling covariance", False, "breakpoints do not scale linearly")
        if dh.marginal_gap_density(c.scaled(tau)).breakpoints[-1] != tau * base.b3:
            return ("scaling covariance", False, "support does not scale")
    return ("scaling covariance", True, "10 random spectra and scale factors")


def check_regions() -> Check:
    for x in (Fraction(1, 100), Fraction(1, 6), Fraction(33, 100)):
        for name in si.REGION_NAMES:
            if si.region_volume(name, x) < 0:
                return ("integration regions", False, f"{name} has negative volume at x={x}")
            if not si.region_bounds_ordered(name, x):
                return ("integration regions", False, f"{name} bounds disordered at x={x}")
    return ("integration regions", True, "volumes nonnegative, bounds ordered at 3 spot values")


def check_exact_pipeline() -> Check:
    if not si.centered_vandermonde_in_gaps_matches():
        return ("exact pipeline", False, "gap-coordinate Vandermonde mismatch")
    partials = si.gap_piece_partials(1)
    if partials["R1a"] != partials["R1b"]:
        return ("exact pipeline", False, "the two halves of the first partial differ")
    if si.gap_piece(2, order=[3, 1, 0, 2]) != si.gap_piece(2):
        return ("exact pipeline", False, "partial integral depends on summation order")
    if not si.radial_volume_identity_holds():
        return ("exact pipeline", False, "radial volume identity fails")
    prob = si.separability_probability()
    if prob != Fraction(8, 33):
        return ("exact pipeline", False, f"probability is {prob}, not 8/33")
    return ("exact pipeline", True, "Vandermonde, halves, order invariance, radial identity, 8/33")


def check_sampling_core(seed: int) -> Check:
    rng = sp.stream_rng(seed)
    rho = sp.hs_random_state(4, rng)
    if not sp.is_valid_density_matrix(rho):
        return ("sampling core", False, "flat-measure sample is not a density matrix")
    u = sp.haar_unitary(4, rng)
    if np.max(np.abs(u.conj().T @ u - np.eye(4))) > 1e-12:
        return ("sampling core", False, "unitary sample fails U†U = I")
    if np.max(np.abs(sp.partial_transpose(sp.partial_transpose(rho)) - rho)) != 0.0:
        return ("sampling core", False, "partial transpose is not an involution")
    bell = np.zeros((4, 4), dtype=complex)
    for i in (0, 3):
        for j in (0, 3):
            bell[i, j] = 0.5
    if abs(np.linalg.eigvalsh(sp.partial_transpose(bell))[0] + 0.5) > 1e-12:
        return ("sampling core", False, "maximally entangled state misses min eigenvalue -1/2")
    if sp.is_ppt(bell):
        return ("sampling core", False, "maximally entangled state passed the transpose test")
    est1 = sp.estimate_sep_prob(sp.SamplerConfig(seed=seed, count=2000))
    est2 = sp.estimate_sep_prob(sp.SamplerConfig(seed=seed, count=2000), threads=4)
    if est1 != est2:
        return ("sampling core", False, "estimator is not thread-deterministic")
    return ("sampling core", True, "validity, unitarity, transpose, entangled witness, determinism")


def check_fixed_spectrum(seed: int, count: int = 20000) -> Check:
    lam = [0.45, 0.27, 0.18, 0.10]
    centered = CenteredSpectrum([Fraction(9, 20) - Fraction(1, 4), Fraction(27, 100) - Fraction(1, 4),
                                 Fraction(18, 100) - Fraction(1, 4), Fraction(1, 10) - Fraction(1, 4)])
    b3 = float(dh.marginal_support(centered).b3)
    gaps = sp.fixed_spectrum_gaps(lam, count, seed)
    if gaps.max() > b3 + 1e-9 or gaps.min() < -1e-12:
        return ("fixed-spectrum gaps", False, f"gap outside [0, {b3}]")
    rho = sp.sample_fixed_spectrum(lam, sp.stream_rng(seed, 99))
    spec = np.sort(np.linalg.eigvalsh(rho))[::-1]
    if np.max(np.abs(spec - np.array(lam))) > 1e-10:
        return ("fixed-spectrum gaps", False, "orbit sample does not keep the spectrum")
    return ("fixed-spectrum gaps", True, f"{count} samples stay inside the support")


def check_monte_carlo_global(seed: int, count: int) -> Check:
    est = sp.estimate_sep_prob(sp.SamplerConfig(seed=seed, count=count), threads=4)
    target = 8.0 / 33.0
    band = max(0.002, 5.0 * est.stderr)
    ok = abs(est.fraction - target) <= band
    return (
        "global separability fraction",
        ok,
        f"{est.fraction:.5f} vs {target:.5f} (n={count}, ±{band:.4f})",
    )


def check_conditioned_constancy(seed: int, count: int) -> Check:
    worst = 0.0
    details = []
    for a in (0.0, 0.2, 0.4):
        stats = sp.conditioned_ppt_stats(a, sp.SamplerConfig(seed=seed, count=count))
        dev = abs(stats.fraction - 8.0 / 33.0)
        worst = max(worst, dev)
        details.append(f"a={a}: {stats.fraction:.4f}")
    return ("conditioned constancy", worst <= 0.01, "; ".join(details) + f" (max dev {worst:.4f})")


def check_halfbound_equivalence(seed: int, count: int) -> Check:
    stats = sp.conditioned_ppt_stats(0.0, sp.SamplerConfig(seed=seed, count=count))
    ok = stats.agreement_halfbound == 1.0 and stats.band_count < max(1, count // 1000)
    return (
        "transpose vs half-bound tests",
        ok,
        f"agreement {stats.agreement_halfbound:.6f}, band {stats.band_count}/{count}",
    )


def check_marginal_law(seed: int, count: int) -> Check:
    centered = CenteredSpectrum([Fraction(1, 5), Fraction(1, 50), Fraction(-7, 100), Fraction(-3, 20)])
    density = dh.marginal_gap_density(centered)
    mass = density.integral()
    b3 = dh.marginal_support(centered).b3
    bins = 50
    edges = [Fraction(i) * b3 / bins for i in range(bins + 1)]
    gaps = sp.fixed_spectrum_gaps([0.45, 0.27, 0.18, 0.10], count, seed)
    counts, _ = np.histogram(gaps, bins=np.array([float(e) for e in edges]))
    width = float(b3) / bins
    sup = 0.0
    sigma_peak = 0.0
    for i in range(bins):
        empirical = counts[i] / (count * width)
        prob = float(density.integral_between(edges[i], edges[i + 1]) / mass)
        sup = max(sup, abs(empirical - prob / width))
        sigma_peak = max(sigma_peak, np.sqrt(prob * (1.0 - prob) / count) / width)
    # Seed-robust bound: 3.5 binomial sigmas of the fullest bin.  A wrong
    # density or normalization overshoots this by an order of magnitude.
    bound = 3.5 * sigma_peak
    return (
        "fixed-spectrum marginal law",
        sup < bound,
        f"sup-norm {sup:.4f} over {bins} bins (bound {bound:.4f}, n={count})",
    )


def run_all(seed: int = 42, deep: bool = False) -> list[Check]:
    mc_n = 1_000_000 if deep else 50_000
    har_n = 100_000 if deep else 20_000
    law_n = 1_000_000 if deep else 200_000
    return [
        check_ring_axioms(seed),
        check_fundamental_theorem(seed + 1),
        check_integral_linearity(seed + 2),
        check_residue_truncation(seed + 3),
        check_volume_identities(seed + 4),
        check_density_routes(seed + 5),
        check_density_nonnegative(),
        check_marginal_mass(seed + 6),
        check_marginal_oracle(),
        check_scaling_covariance(seed + 7),
        check_regions(),
        check_exact_pipeline(),
        check_sampling_core(seed + 8),
        check_fixed_spectrum(seed + 9),
        check_monte_carlo_global(seed + 10, mc_n),
        check_conditioned_constancy(seed + 11, har_n),
        check_halfbound_equivalence(seed + 12, har_n),
        check_marginal_law(seed + 13, law_n),
    ]

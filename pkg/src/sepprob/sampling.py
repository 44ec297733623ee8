"""Monte Carlo cross-validation lab for two-qubit separability.

Random density matrices under the flat (Hilbert-Schmidt) measure, Haar
fixed-spectrum orbits, a hit-and-run walk on fixed-marginal slices, the
positive-partial-transpose test, and the marginal-gap statistic.

Everything stochastic is driven by counter-based Philox streams keyed by
(seed, stream index), so results are bit-reproducible for a given seed and
independent of how work is split across threads.  Batch entry points carve
the sample range into fixed blocks, one stream per block.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
PPT_TOL = 1e-10

_MASK64 = (1 << 64) - 1
_BLOCK = 32768

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (_SX, _SY, _SZ)


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for one (seed, stream) pair; streams never collide."""
    key = ((seed & _MASK64) << 64) | (stream & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs shared by the samplers; burn_in and thinning only matter for
    the hit-and-run walk."""

    seed: int
    count: int
    burn_in: int = 1000
    thinning: int = 10
    tolerance: float = PPT_TOL

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.thinning < 1:
            raise ValueError("thinning must be at least 1")


def is_valid_density_matrix(rho: np.ndarray, tol: float = PSD_TOL) -> bool:
    """Hermitian within 1e-12, unit trace within 1e-12, spectrum >= -tol."""
    if rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        return False
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
        return False
    return float(np.linalg.eigvalsh(rho)[0]) >= -tol


def _ginibre(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (n, n) if size is None else (size, n, n)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def hs_random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """One density matrix under the flat measure: G G^dag normalized, with G
    a square standard complex Gaussian matrix."""
    g = _ginibre(n, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _hs_random_block(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    g = _ginibre(n, rng, size)
    rho = g @ g.conj().transpose(0, 2, 1)
    tr = np.einsum("bii->b", rho).real
    return rho / tr[:, None, None]


def hs_random_states(n: int, count: int, seed: int, threads: int = 1) -> np.ndarray:
    """Batch of flat-measure states, reproducible regardless of thread count."""
    return _blocked_map(
        lambda rng, size: _hs_random_block(n, rng, size), count, seed, threads, (n, n)
    )


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix, with the R diagonal
    rotated to be positive so the factorization is measure-correct."""
    q, r = np.linalg.qr(_ginibre(n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _haar_block(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(n, rng, size))
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def hermitian_eigs(m: np.ndarray, vectors: bool = False):
    """Descending eigenvalues of a Hermitian matrix (optionally with a
    matching column eigenvector matrix).  Rejects visibly non-Hermitian
    input rather than symmetrizing it silently."""
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("matrix is not Hermitian within tolerance")
    if vectors:
        w, v = np.linalg.eigh(m)
        return w[::-1], v[:, ::-1]
    return np.linalg.eigvalsh(m)[::-1]


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduce a two-qubit state to the kept subsystem (1 or 2)."""
    if rho.shape != (4, 4):
        raise ValueError("partial trace expects a 4x4 two-qubit state")
    r = rho.reshape(2, 2, 2, 2)
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    if keep == 2:
        return np.einsum("ijil->jl", r)
    raise ValueError("keep must be 1 or 2")


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Partial transpose of a two-qubit state (an involution; output is
    Hermitian, possibly indefinite)."""
    if rho.shape != (4, 4):
        raise ValueError("partial transpose expects a 4x4 two-qubit state")
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def _pt_block(states: np.ndarray) -> np.ndarray:
    n = states.shape[0]
    return states.reshape(n, 2, 2, 2, 2).transpose(0, 1, 4, 3, 2).reshape(n, 4, 4)


def ppt_min_eigs(states: np.ndarray) -> np.ndarray:
    """Smallest partial-transpose eigenvalue for a batch of states."""
    return np.linalg.eigvalsh(_pt_block(states))[:, 0]


def is_ppt(rho: np.ndarray, tol: float = PPT_TOL) -> bool:
    """Peres-Horodecki test: partial transpose positive semidefinite up to
    ``tol``.  For two qubits this decides separability exactly."""
    return float(np.linalg.eigvalsh(partial_transpose(rho))[0]) >= -tol


def is_half_bounded(rho: np.ndarray, tol: float = PPT_TOL) -> bool:
    """Whether no eigenvalue exceeds 1/2 (up to ``tol``)."""
    return float(np.linalg.eigvalsh(rho)[-1]) <= 0.5 + tol


def _blocked_map(fn, count: int, seed: int, threads: int, tail_shape) -> np.ndarray:
    """Run ``fn(rng, size)`` over fixed-size blocks with per-block streams.

    Block boundaries and stream keys depend only on (seed, count), so the
    concatenated output is identical for any thread count.
    """
    blocks = [(i, min(_BLOCK, count - i * _BLOCK)) for i in range((count + _BLOCK - 1) // _BLOCK)]

    def run(block):
        idx, size = block
        return fn(stream_rng(seed, idx), size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return np.concatenate(parts) if parts else np.empty((0, *tail_shape), dtype=complex)


class SepEstimate(NamedTuple):
    n: int
    ppt_count: int
    fraction: float
    stderr: float
    indeterminate: int


def estimate_sep_prob(config: SamplerConfig, threads: int = 1) -> SepEstimate:
    """Monte Carlo separability fraction over flat-measure two-qubit states.

    Counts partial transposes with smallest eigenvalue >= -tolerance;
    samples inside the (-tol, tol) band are reported separately as
    indeterminate.  Deterministic given the seed.
    """
    if config.count < 1000:
        raise ValueError("estimate_sep_prob needs at least 1000 samples")
    tol = config.tolerance
    totals = {"ppt": 0, "band": 0}

    def block_stats(rng, size):
        states = _hs_random_block(4, rng, size)
        mins = ppt_min_eigs(states)
        return np.array([int(np.sum(mins >= -tol)), int(np.sum(np.abs(mins) < tol))])

    counts = _blocked_map(lambda rng, size: block_stats(rng, size)[None, :], config.count,
                          config.seed, threads, (2,))
    ppt = int(counts[:, 0].sum())
    band = int(counts[:, 1].sum())
    frac = ppt / config.count
    stderr = float(np.sqrt(frac * (1.0 - frac) / config.count))
    return SepEstimate(config.count, ppt, frac, stderr, band)


def sample_fixed_spectrum(spectrum: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """One state with the given spectrum, uniformly over the unitary orbit."""
    lam = np.asarray([float(x) for x in spectrum])
    u = haar_unitary(len(lam), rng)
    return (u * lam) @ u.conj().T


def _fixed_spectrum_block(lam: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    u = _haar_block(len(lam), rng, size)
    return (u * lam) @ u.conj().transpose(0, 2, 1)


def marginal_gap(rho: np.ndarray) -> float:
    """Spread of the first reduced state: 1 - 2 * (its smallest eigenvalue).

    Equals the eigenvalue gap of the traceless part of the marginal; always
    in [0, 1].
    """
    w = np.linalg.eigvalsh(partial_trace(rho, 1))
    return float(1.0 - 2.0 * w[0])


def _marginal_gaps_block(states: np.ndarray) -> np.ndarray:
    r = states.reshape(-1, 2, 2, 2, 2)
    red = np.einsum("bijkj->bik", r)
    half_diff = 0.5 * (red[:, 0, 0] - red[:, 1, 1]).real
    radius = np.sqrt(half_diff**2 + np.abs(red[:, 0, 1]) ** 2)
    return 2.0 * radius


def fixed_spectrum_gaps(spectrum: Sequence[float], count: int, seed: int, threads: int = 1) -> np.ndarray:
    """Marginal gaps of ``count`` fixed-spectrum orbit samples."""
    lam = np.asarray([float(x) for x in spectrum])

    def block(rng, size):
        return _marginal_gaps_block(_fixed_spectrum_block(lam, rng, size))[:, None]

    return _blocked_map(block, count, seed, threads, (1,))[:, 0]


# ---------------------------------------------------------------------------
# Hit-and-run on a fixed-marginal slice.

def _conditioned_basis() -> np.ndarray:
    """Orthonormal (HS) basis of the 12 traceless directions that leave the
    first marginal untouched."""
    mats = [np.kron(_I2, s) / 2.0 for s in _PAULIS]
    mats += [np.kron(s1, s2) / 2.0 for s1 in _PAULIS for s2 in _PAULIS]
    return np.array(mats)


_BASIS12 = _conditioned_basis()


def conditioned_start(a: float) -> np.ndarray:
    """Center of the slice: (fixed marginal) tensor (maximally mixed)."""
    return np.kron((_I2 + a * _SZ) / 2.0, _I2 / 2.0)


class _ChainDriver:
    """Vectorized hit-and-run over independent chains, one stream per chain."""

    MAX_REDRAWS = 100
    _EPS = 1e-13

    def __init__(self, a: float, seed: int, chains: int):
        if not 0.0 <= a < 1.0:
            raise ValueError("Bloch radius must lie in [0, 1)")
        self.states = np.repeat(conditioned_start(a)[None, :, :], chains, axis=0)
        self.rngs = [stream_rng(seed, c) for c in range(chains)]
        self.chains = chains

    def _directions(self, mask: np.ndarray) -> np.ndarray:
        coef = np.empty((int(mask.sum()), 12))
        for row, c in enumerate(np.flatnonzero(mask)):
            coef[row] = self.rngs[c].standard_normal(12)
        coef /= np.linalg.norm(coef, axis=1, keepdims=True)
        return np.einsum("ck,kij->cij", coef, _BASIS12)

    def step(self) -> None:
        k = self.chains
        w, v = np.linalg.eigh(self.states)
        w = np.clip(w, 1e-14, None)
        inv_sqrt = np.einsum("cij,cj,ckj->cik", v, 1.0 / np.sqrt(w), v.conj())

        d = np.empty_like(self.states)
        lo = np.empty(k)
        hi = np.empty(k)
        pending = np.ones(k, dtype=bool)
        for attempt in range(self.MAX_REDRAWS + 1):
            if not pending.any():
                break
            if attempt == self.MAX_REDRAWS:
                raise RuntimeError("chord solve kept failing; state stuck on the boundary")
            d[pending] = self._directions(pending)
            m = inv_sqrt[pending] @ d[pending] @ inv_sqrt[pending]
            mu = np.linalg.eigvalsh(m)
            mu_min, mu_max = mu[:, 0], mu[:, -1]
            ok = (mu_max > self._EPS) & (mu_min < -self._EPS)
            idx = np.flatnonzero(pending)
            good = idx[ok]
            lo[good] = -1.0 / mu_max[ok]
            hi[good] = -1.0 / mu_min[ok]
            pending[good] = False

        t = np.empty(k)
        for c in range(k):
            t[c] = lo[c] + self.rngs[c].uniform() * (hi[c] - lo[c])
        self.states = self.states + t[:, None, None] * d
        self.states = 0.5 * (self.states + self.states.conj().transpose(0, 2, 1))


def hit_and_run_conditioned(a: float, config: SamplerConfig) -> Iterator[np.ndarray]:
    """Single-chain walk over the fixed-marginal slice at Bloch radius ``a``.

    Yields ``config.count`` states, emitting every ``thinning`` steps after
    ``burn_in`` steps; uniform over the slice in the flat metric.
    """
    driver = _ChainDriver(a, config.seed, 1)
    for _ in range(config.burn_in):
        driver.step()
    emitted = 0
    while emitted < config.count:
        for _ in range(config.thinning):
            driver.step()
        yield driver.states[0].copy()
        emitted += 1


def conditioned_samples(a: float, config: SamplerConfig, chains: int = 64) -> np.ndarray:
    """Hit-and-run sample batch, merged round-robin across parallel chains.

    Each chain has its own stream, so the output depends only on
    (seed, count, burn_in, thinning, chains).
    """
    chains = min(chains, config.count)
    driver = _ChainDriver(a, config.seed, chains)
    for _ in range(config.burn_in):
        driver.step()
    rounds = -(-config.count // chains)
    out = np.empty((rounds * chains, 4, 4), dtype=complex)
    for r in range(rounds):
        for _ in range(config.thinning):
            driver.step()
        out[r * chains : (r + 1) * chains] = driver.states
    return out[: config.count]


class ConditionedStats(NamedTuple):
    fraction: float
    stderr: float
    agreement_halfbound: float
    band_count: int
    indeterminate: int


def conditioned_ppt_stats(
    a: float, config: SamplerConfig, chains: int = 64, band: float = 1e-9
) -> ConditionedStats:
    """Separability fraction on a fixed-marginal slice, plus the comparison
    between the partial-transpose test and the max-eigenvalue-1/2 test.

    Samples whose top eigenvalue sits within ``band`` of 1/2 are excluded
    from the agreement figure and reported as band_count.
    """
    states = conditioned_samples(a, config, chains)
    mins = ppt_min_eigs(states)
    lam_max = np.linalg.eigvalsh(states)[:, -1]

    tol = config.tolerance
    ppt = mins >= -tol
    halfb = lam_max <= 0.5 + tol
    in_band = np.abs(lam_max - 0.5) < band
    outside = ~in_band
    agree = float(np.mean(ppt[outside] == halfb[outside])) if outside.any() else 1.0
    frac = float(np.mean(ppt))
    stderr = float(np.sqrt(frac * (1.0 - frac) / len(states)))
    return ConditionedStats(frac, stderr, agree, int(in_band.sum()), int(np.sum(np.abs(mins) < tol)))

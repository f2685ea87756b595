"""The Haldane-Shastry spin ring: Hamiltonian, closed-form ground-state oracle,
exact correlators, and a vectorized CTMC rate provider.

The ground state lives on the half-filling sector. Its amplitude is a product
of up to C(L/2, 2) squared sines, which underflows doubles long before L = 56,
so all amplitude arithmetic stays in (sign, log-magnitude) form. Ratios
between configurations one particle-hop apart are updated incrementally in
O(L) from a table of pair log-sines.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .fixed_node import FixedNodeChain, GeneratorRates, ground_energy
from .hamiltonian import (
    AmplitudeOracle,
    BitConfiguration,
    PauliTerm,
    SignedLogAmplitude,
    SparseHamiltonian,
    TableOracle,
)


class HSModel:
    """Coupling and log-sine tables for a ring of L (even) qubits."""

    def __init__(self, L: int):
        if L < 2 or L % 2:
            raise ValueError(f"L must be even and >= 2, got {L}")
        self.L = L
        d = np.arange(L)[:, None] - np.arange(L)[None, :]
        with np.errstate(divide="ignore"):
            self.coupling = np.where(
                d == 0, 0.0, 1.0 / (4.0 * (L / np.pi * np.sin(np.pi * d / L)) ** 2)
            )
            # 2 log|sin(pi (i-j) / L)|, the per-pair log magnitude contribution
            self.log_sin2 = np.where(d == 0, 0.0, 2.0 * np.log(np.abs(np.sin(np.pi * d / L))))

    def hamiltonian(self) -> SparseHamiltonian:
        """sum_{i<j} J_ij (X_i X_j + Y_i Y_j + Z_i Z_j), J from the ring distance."""
        terms = []
        for i in range(self.L):
            for j in range(i + 1, self.L):
                c = float(self.coupling[i, j])
                for p in ("X", "Y", "Z"):
                    terms.append(PauliTerm(c, ((i, p), (j, p))))
        return SparseHamiltonian(self.L, terms)

    def alternating_state(self) -> BitConfiguration:
        """The 1010... configuration; it carries the largest amplitude."""
        return BitConfiguration.from_sites(range(0, self.L, 2), self.L)

    def amplitude_table(self, normalized: bool = True) -> np.ndarray:
        """Dense 2^L amplitude vector (small L only); zero off half filling."""
        if self.L > 24:
            raise ValueError(f"dense table at L={self.L} exceeds the sector cap")
        oracle = HSOracle(self)
        table = np.zeros(1 << self.L)
        for x in half_filling_states(self.L):
            table[x.bits] = oracle.log_amplitude(x).value()
        if normalized:
            table /= np.linalg.norm(table)
        return table


def half_filling_states(L: int) -> list[BitConfiguration]:
    """The Hamming-weight L/2 sector in ascending order."""
    states = [
        BitConfiguration.from_sites(occ, L)
        for occ in itertools.combinations(range(L), L // 2)
    ]
    states.sort()
    return states


def hs_hamiltonian(L: int) -> SparseHamiltonian:
    return HSModel(L).hamiltonian()


class HSOracle(AmplitudeOracle):
    """Closed-form ground-state amplitudes: sign (-1)^(sum_k k x_k) with 0-based
    sites, log magnitude sum over occupied pairs of 2 log|sin(pi (i-j)/L)|."""

    def __init__(self, model: HSModel):
        self.model = model

    def log_amplitude(self, x: BitConfiguration) -> SignedLogAmplitude:
        L = self.model.L
        if x.n != L:
            raise ValueError(f"state has {x.n} sites, model has {L}")
        if x.weight != L // 2:
            return SignedLogAmplitude(0, -math.inf)
        occ = np.array(x.occupied_sites())
        sign = -1 if int(occ.sum()) % 2 else 1
        S = self.model.log_sin2
        logmag = float(S[np.ix_(occ, occ)].sum()) / 2.0  # each pair counted twice
        return SignedLogAmplitude(sign, logmag)

    def _swap_sites(self, x: BitConfiguration, y: BitConfiguration):
        """(i, j) when y is x with one occupied site i moved to j, else None."""
        diff = x.bits ^ y.bits
        if diff.bit_count() != 2 or x.weight != y.weight:
            return None
        n = x.n
        i = j = -1
        while diff:
            low = diff & -diff
            site = n - low.bit_length()
            if x.bit(site):
                i = site
            else:
                j = site
            diff ^= low
        if i < 0 or j < 0:
            return None
        return i, j

    def ratio(self, x: BitConfiguration, y: BitConfiguration) -> float:
        """O(L) incremental ratio for single particle hops, generic otherwise."""
        swap = self._swap_sites(x, y)
        if swap is None:
            return super().ratio(x, y)
        if x.weight != self.model.L // 2:
            return super().ratio(x, y)  # raises ZeroAmplitudeError
        i, j = swap
        occ = np.array(x.occupied_sites())
        occ = occ[occ != i]
        S = self.model.log_sin2
        delta = float(S[j, occ].sum() - S[i, occ].sum())
        sign = -1.0 if (i + j) % 2 else 1.0
        return sign * math.exp(delta)


class HSFastChain(FixedNodeChain):
    """CTMC rate provider with all (L/2)^2 hop rates computed in one sweep.

    Produces the same generator columns as the generic path: hop (i -> j) has
    H entry 2 J_ij > 0 and amplitude-ratio sign (-1)^(i+j), so odd-distance
    hops are the sign-compatible ones and carry rate 2 J_ij |ratio|.
    """

    def __init__(self, model: HSModel, **kwargs):
        self.model = model
        kwargs.setdefault("reference", model.alternating_state())
        super().__init__(model.hamiltonian(), HSOracle(model), **kwargs)

    def rates(self, x: BitConfiguration) -> GeneratorRates:
        if self._cache_size:
            cached = self._cache.get(x)
            if cached is not None:
                return cached
        L = self.model.L
        occ = np.array(x.occupied_sites(), dtype=np.intp)
        mask01 = np.zeros(L, dtype=bool)
        mask01[occ] = True
        unocc = np.nonzero(~mask01)[0]
        S = self.model.log_sin2
        J = self.model.coupling
        colsum = S[:, occ].sum(axis=1)
        delta = colsum[unocc][None, :] - S[np.ix_(occ, unocc)] - colsum[occ][:, None]
        odd = ((occ[:, None] + unocc[None, :]) % 2).astype(bool)
        hvals = 2.0 * J[np.ix_(occ, unocc)]
        with np.errstate(over="raise"):
            mag = hvals * np.exp(delta)
        rates = np.where(odd, mag, 0.0)
        total = float(rates.sum())
        # diagonal route: <x|F|x> - lambda1 with the S+ compensation folded in
        z = np.where(mask01, -1.0, 1.0)
        zz_diag = float(z @ J @ z) / 2.0
        diag_f = zz_diag + float(np.where(odd, 0.0, mag).sum())
        tol = 1e-9 * max(1.0, abs(self.lambda1), total)
        if abs(total - (diag_f - self.lambda1)) > tol:
            raise RuntimeError(
                f"fast-path rate sum {total} disagrees with diagonal "
                f"{diag_f - self.lambda1} at {x}"
            )
        keep = rates >= self.rate_floor * total
        oi, ui = np.nonzero(keep)
        kept = rates[oi, ui]
        total = float(kept.sum())
        base = x.bits
        targets = tuple(
            BitConfiguration(base ^ (1 << (L - 1 - int(occ[a]))) ^ (1 << (L - 1 - int(unocc[b]))), L)
            for a, b in zip(oi, ui)
        )
        r = GeneratorRates(x, targets, kept, total, self.lambda1)
        if self._cache_size:
            if len(self._cache) >= self._cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[x] = r
        return r


def exact_zz(L: int, d: int) -> float:
    """Literal two-point formula at separation i - j = -d.

    Note: this evaluates the cited closed form as printed, which is exactly
    1/4 of the Z_i Z_j expectation of the half-filling ground state (spin-1/2
    operator convention in the source); see brute_zz for the Z-convention
    ground truth. The factor has been verified numerically across (L, d).
    """
    if not 1 <= d <= L - 1:
        raise ValueError(f"need 1 <= d <= L-1, got d={d}")
    ks = np.arange(1, L // 2 + 1)
    series = float(np.sum(np.sin((2 * ks - 1) * np.pi * (-d) / L) / (2 * ks - 1)))
    prefactor = (-1.0) ** (-d) / (2.0 * L * math.sin(math.pi * (-d) / L))
    return series * prefactor


def brute_zz(L: int, i: int, j: int) -> float:
    """<psi| Z_i Z_j |psi> summed over the half-filling sector (1-based sites)."""
    if L > 24:
        raise ValueError(f"sector size C({L},{L//2}) exceeds the brute-force cap")
    if not (1 <= i <= L and 1 <= j <= L):
        raise ValueError(f"sites must be in 1..{L}")
    if i == j:
        return 1.0
    oracle = HSOracle(HSModel(L))
    num = 0.0
    den = 0.0
    for x in half_filling_states(L):
        a = oracle.log_amplitude(x)
        w = math.exp(2.0 * a.logmag)
        zi = 1.0 - 2.0 * x.bit(i - 1)
        zj = 1.0 - 2.0 * x.bit(j - 1)
        num += w * zi * zj
        den += w
    return num / den


def m_d(x: BitConfiguration, d: int) -> float:
    """Ring-averaged ZZ correlator (1/L) sum_i Z_i Z_{Mod(i+d)} of a basis state."""
    L = x.n
    if not 1 <= d <= L - 1:
        raise ValueError(f"need 1 <= d <= L-1, got d={d}")
    z = 1.0 - 2.0 * x.to01().astype(float)
    return float(np.mean(z * np.roll(z, -d)))


def observable_m_d(d: int):
    """m_d as a state function usable by the samplers."""

    def f(x: BitConfiguration) -> float:
        return m_d(x, d)

    f.__name__ = f"M_{d}"
    return f


class CorruptOracle(TableOracle):
    """Table-backed oracle for a noise-corrupted ground state."""

    def __init__(self, table: np.ndarray, n: int, kappa: float, seed: int, tv: float):
        super().__init__(table, n)
        self.kappa = kappa
        self.seed = seed
        self.tv = tv


def corrupt(model: HSModel, kappa: float, seed: int) -> tuple[CorruptOracle, float]:
    """Add N(0, kappa/2^L) noise to every normalized amplitude and renormalize.

    Returns the table-backed oracle and the 1-norm distance between the clean
    and corrupted probability vectors (twice the total variation distance).
    An exactly-zero perturbed amplitude is resampled (probability-zero event).
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    L = model.L
    if L > 24:
        raise ValueError(f"corrupt materializes 2^{L} amplitudes; capped at L=20-ish")
    clean = model.amplitude_table(normalized=True)
    rng = np.random.default_rng(seed)
    sigma = kappa / (1 << L)
    table = clean + rng.normal(0.0, sigma, size=clean.shape)
    for idx in np.nonzero(table == 0.0)[0]:
        while table[idx] == 0.0:
            table[idx] = clean[idx] + rng.normal(0.0, sigma)
    table = table / np.linalg.norm(table)
    tv = float(np.abs(table**2 - clean**2).sum())
    return CorruptOracle(table, L, kappa, seed, tv), tv


def hs_lambda1(model: HSModel) -> float:
    """Ground energy from the amplitude-ratio row sum at the reference state."""
    return ground_energy(model.hamiltonian(), HSOracle(model), model.alternating_state())

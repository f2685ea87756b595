"""Fixed-node transformation and the CTMC generator, built lazily from (H, oracle).

Sign-violating off-diagonal entries (those with
sign(<psi|x>) * sign(<x|H|y>) * sign(<y|psi>) > 0) are zeroed and compensated
on the diagonal, preserving the ground state, the ground energy, and the
spectral gap. The generator reads the resulting operator as outgoing rates
rate(x -> y) = max(0, -<y|H|x> <y|psi>/<x|psi>).

Everything here is restricted to the support of psi: a nonzero H entry into a
zero-amplitude state classifies as sign-compatible with zero rate, so the
chain never leaves the support sector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import (
    ENTRY_EPS,
    AmplitudeOracle,
    BitConfiguration,
    ZeroAmplitudeError,
)


class OracleInconsistencyError(RuntimeError):
    """Oracle and Hamiltonian disagree (wrong lambda1, bad ratios, ...)."""


class SignClass(enum.Enum):
    S_PLUS = "S+"
    S_MINUS = "S-"
    DIAGONAL = "diagonal"
    ABSENT = "absent"


def classify(H, oracle: AmplitudeOracle, x: BitConfiguration, y: BitConfiguration) -> SignClass:
    """Sign class of the (x, y) pair; ties at a zero product go to S_MINUS."""
    if x == y:
        return SignClass.DIAGONAL
    h = H.entry(x, y)
    if abs(h) <= ENTRY_EPS:
        return SignClass.ABSENT
    product = oracle.sign(x) * (1 if h > 0 else -1) * oracle.sign(y)
    return SignClass.S_PLUS if product > 0 else SignClass.S_MINUS


def ground_energy(H, oracle: AmplitudeOracle, x_ref: BitConfiguration) -> float:
    """lambda1 = sum_y <y|H|x_ref> <y|psi>/<x_ref|psi>, independent of x_ref."""
    if oracle.sign(x_ref) == 0:
        raise ZeroAmplitudeError(f"reference state {x_ref} has zero amplitude")
    total = 0.0
    for y, h in H.row(x_ref):
        if y == x_ref:
            total += h
        else:
            total += h * oracle.ratio(x_ref, y)
    return total


def _row_with_ratios(H, oracle, x):
    """(diagonal, [(y, h, h*ratio)]) for the off-diagonal entries of column x."""
    if oracle.sign(x) == 0:
        raise ZeroAmplitudeError(f"state {x} has zero amplitude")
    diag = 0.0
    off = []
    for y, h in H.row(x):
        if y == x:
            diag = h
        else:
            off.append((y, h, h * oracle.ratio(x, y)))
    return diag, off


def fixed_node_row(H, oracle: AmplitudeOracle, x: BitConfiguration):
    """Column x of the fixed-node operator F.

    Off-diagonal entries survive only on sign-compatible (S-) pairs; the
    zeroed S+ entries are folded into the diagonal as
    sum <x|H|z> <z|psi>/<x|psi>.
    """
    hxx, off = _row_with_ratios(H, oracle, x)
    out = []
    diag = hxx
    for y, h, hr in off:
        if hr > 0.0:
            diag += hr
        else:
            out.append((y, h))
    return [(x, diag)] + out


@dataclass(frozen=True)
class GeneratorRates:
    """Outgoing column of the generator at ``source``.

    total_rate equals the sum of the outgoing rates exactly; the same number
    recomputed from the fixed-node diagonal, <x|F|x> - lambda1, must agree
    within tolerance (cross-checked at construction).
    """

    source: BitConfiguration
    targets: tuple[BitConfiguration, ...]
    rates: np.ndarray
    total_rate: float
    lambda1: float
    _cumulative: np.ndarray | None = field(default=None, compare=False, repr=False)

    def outgoing(self):
        return list(zip(self.targets, self.rates))

    def cumulative(self) -> np.ndarray:
        cum = self._cumulative
        if cum is None:
            cum = np.cumsum(self.rates)
            object.__setattr__(self, "_cumulative", cum)
        return cum


RATE_FLOOR = 1e-14
RATE_CHECK_TOL = 1e-9


def generator_rates(
    H,
    oracle: AmplitudeOracle,
    lambda1: float,
    x: BitConfiguration,
    rate_floor: float = RATE_FLOOR,
    check: bool = True,
) -> GeneratorRates:
    """Outgoing rates max(0, -<y|H|x> <y|psi>/<x|psi>) for the column of x.

    Rates below rate_floor * total are dropped (a controlled approximation
    that avoids degenerate exponential draws). With ``check`` the total is
    verified against <x|F|x> - lambda1 within RATE_CHECK_TOL scale.
    """
    hxx, off = _row_with_ratios(H, oracle, x)
    diag_f = hxx
    targets = []
    rates = []
    for y, h, hr in off:
        if hr > 0.0:
            diag_f += hr
        elif hr < 0.0:
            targets.append(y)
            rates.append(-hr)
    rates = np.asarray(rates, dtype=float)
    total = float(rates.sum())
    if rates.size and rate_floor > 0.0:
        keep = rates >= rate_floor * total
        if not keep.all():
            targets = [t for t, k in zip(targets, keep) if k]
            rates = rates[keep]
            total = float(rates.sum())
    if check:
        total_diag = diag_f - lambda1
        tol = RATE_CHECK_TOL * max(1.0, abs(lambda1), total)
        if total_diag < -tol:
            raise OracleInconsistencyError(
                f"negative total rate {total_diag} at {x}: wrong lambda1 or bad oracle"
            )
        if abs(total - total_diag) > tol:
            raise OracleInconsistencyError(
                f"rate sum {total} vs diagonal {total_diag} at {x} "
                f"(difference {total - total_diag:.3e} beyond {tol:.1e})"
            )
    return GeneratorRates(x, tuple(targets), rates, total, lambda1)


class FixedNodeChain:
    """The CTMC (H, oracle, lambda1) with per-state rate computation.

    lambda1 is computed once at construction from ``reference`` and verified
    by recomputation at a few states reached by a short random walk; drift
    beyond 1e-8 indicates an inconsistent oracle. Rate columns are recomputed
    on every visit unless ``cache_size`` > 0 enables a bounded cache with
    identical semantics.
    """

    SELF_CHECK_TOL = 1e-8

    def __init__(
        self,
        H,
        oracle: AmplitudeOracle,
        reference: BitConfiguration,
        rate_floor: float = RATE_FLOOR,
        cache_size: int = 0,
        self_check: bool = True,
        self_check_states: int = 3,
        self_check_seed: int = 0,
    ):
        self.hamiltonian = H
        self.oracle = oracle
        self.reference = reference
        self.rate_floor = rate_floor
        self.lambda1 = ground_energy(H, oracle, reference)
        self._cache: dict[BitConfiguration, GeneratorRates] = {}
        self._cache_size = cache_size
        if self_check:
            self._startup_check(self_check_states, self_check_seed)

    @property
    def n(self) -> int:
        return self.hamiltonian.n

    def _startup_check(self, count: int, seed: int):
        rng = np.random.default_rng(seed)
        x = self.reference
        visited = []
        for _ in range(count):
            nbrs = [
                y
                for y, _ in self.hamiltonian.row(x)
                if y != x and self.oracle.sign(y) != 0
            ]
            if not nbrs:
                break
            x = nbrs[rng.integers(len(nbrs))]
            visited.append(x)
        for y in visited:
            lam = ground_energy(self.hamiltonian, self.oracle, y)
            if abs(lam - self.lambda1) > self.SELF_CHECK_TOL * max(1.0, abs(self.lambda1)):
                raise OracleInconsistencyError(
                    f"ground energy drifts: {self.lambda1} at {self.reference} "
                    f"vs {lam} at {y}"
                )

    def rates(self, x: BitConfiguration) -> GeneratorRates:
        if self._cache_size:
            cached = self._cache.get(x)
            if cached is not None:
                return cached
        r = generator_rates(
            self.hamiltonian, self.oracle, self.lambda1, x, rate_floor=self.rate_floor
        )
        if self._cache_size:
            if len(self._cache) >= self._cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[x] = r
        return r

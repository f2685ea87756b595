"""Error analysis for chain output: integrated autocorrelation time with
automatic windowing, error bars, the per-transition normalized time, and the
split-chain R-hat convergence statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .gillespie import Trajectory
from .hamiltonian import BitConfiguration

WINDOW_FACTOR = 5.0  # Sokal's automatic-window constant


@dataclass
class DiscreteSeries:
    """f evaluated on the grid tau0 + j h, j = 1 .. floor((T - tau0)/h)."""

    values: np.ndarray
    h: float
    tau0: float = 0.0
    source: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series has non-finite values")

    def __len__(self):
        return len(self.values)


def discretize(
    traj: Trajectory,
    f: Callable[[BitConfiguration], float],
    h: float,
    tau0: float = 0.0,
) -> DiscreteSeries:
    """Sample a trajectory on a regular grid by binary search over segment ends.

    A grid point exactly at a transition takes the pre-transition state: the
    path is constant on half-open-left intervals (tau, tau + dtau].
    """
    if h <= 0:
        raise ValueError(f"need h > 0, got {h}")
    if h >= traj.total_time - tau0:
        raise ValueError(f"h={h} leaves no grid points in ({tau0}, {traj.total_time}]")
    m = int((traj.total_time - tau0) / h + 1e-9)
    grid = tau0 + h * np.arange(1, m + 1)
    ends = traj.cumulative_ends()
    idx = np.searchsorted(ends, grid, side="left")
    idx = np.minimum(idx, len(traj.segments) - 1)
    fvals = np.array([f(state) for state, _ in traj.segments])
    return DiscreteSeries(fvals[idx], h, tau0)


def autocorrelation(values: np.ndarray) -> np.ndarray:
    """Normalized autocorrelation rho(s) by FFT self-convolution."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n]
    if acov[0] <= 0:
        raise ValueError("zero-variance series has no autocorrelation")
    return acov / acov[0]


@dataclass
class TauEstimate:
    """Integrated autocorrelation time; flagged when no valid window existed."""

    tau: float
    window: int
    flagged: bool


def tau_integrated(values, window_factor: float = WINDOW_FACTOR) -> TauEstimate:
    """tau = 1 + 2 sum_s rho(s), truncated at the smallest W with W >= C tau(W).

    A constant series is degenerate and returns the series length as a
    flagged sentinel; a series too short to close the window is flagged too.
    """
    if isinstance(values, DiscreteSeries):
        values = values.values
    x = np.asarray(values, dtype=float)
    if len(x) < 16:
        raise ValueError(f"series of length {len(x)} is too short")
    if np.all(x == x[0]) or np.var(x) == 0.0:
        return TauEstimate(float(len(x)), 0, True)
    rho = autocorrelation(x)
    taus = 2.0 * np.cumsum(rho) - 1.0
    windows = np.arange(len(taus))
    ok = windows >= window_factor * taus
    ok[0] = False
    if not ok.any():
        return TauEstimate(float(taus[-1]), len(taus) - 1, True)
    w = int(np.argmax(ok))
    return TauEstimate(float(taus[w]), w, False)


def tau_stderr(tau: float, window: int, length: int) -> float:
    """Madras-Sokal variance estimate for the windowed tau."""
    return tau * math.sqrt(max(0.0, 2.0 * (2.0 * window + 1.0) / length))


def error_bar(values, tau: float) -> float:
    """sigma_hat = sqrt(var * tau / N): the correlation-inflated standard error."""
    if isinstance(values, DiscreteSeries):
        values = values.values
    x = np.asarray(values, dtype=float)
    return float(math.sqrt(np.var(x) * tau / len(x)))


def tau_normalized(tau_int: float, h: float, flips: int, total_time: float) -> float:
    """Autocorrelation time in transitions: tau h r / T, r the total flip count."""
    if total_time <= 0:
        raise ValueError(f"need total_time > 0, got {total_time}")
    return tau_int * h * flips / total_time


def split_rhat(chains: Sequence[np.ndarray]) -> float:
    """Rank-free split R-hat: halve every chain, then sqrt((N-1)/N + B/(N W)).

    Degenerate ensembles use sentinels: no between-half dispersion at all is
    perfect agreement (exactly 1); dispersion without within-chain variance is
    non-convergence (infinity).
    """
    if len(chains) < 2:
        raise ValueError("need at least 2 chains")
    arrs = [np.asarray(c, dtype=float) for c in chains]
    length = len(arrs[0])
    if any(len(a) != length for a in arrs):
        raise ValueError("chains must have equal lengths")
    if length < 4:
        raise ValueError(f"chains of length {length} are too short to split")
    half = length // 2
    halves = []
    for a in arrs:
        halves.append(a[:half])
        halves.append(a[length - half :])
    halves = np.asarray(halves)
    n = half
    means = halves.mean(axis=1)
    B = n * means.var(ddof=1)
    W = halves.var(axis=1, ddof=1).mean()
    if B == 0.0:
        return 1.0
    if W <= B * 1e-15:
        return math.inf
    return math.sqrt((n - 1) / n + B / (n * W))


@dataclass
class ChainDiagnostics:
    """Bundled Appendix-style error report for one observable of one run."""

    observable: str
    mu_hat: float
    sigma_hat: float
    tau_int: float
    tau_window: int
    tau_flagged: bool
    tau_normalized: float | None
    r_hat: float | None
    h: float
    tau0: float
    total_time: float
    flips: int | None

    def to_json_dict(self) -> dict:
        return asdict(self)


def diagnose(
    observable: str,
    series: DiscreteSeries,
    flips: int | None = None,
    total_time: float | None = None,
    sibling_series: Sequence[np.ndarray] | None = None,
    window_factor: float = WINDOW_FACTOR,
) -> ChainDiagnostics:
    """Full report: mean, windowed tau, error bar, per-transition tau, R-hat."""
    est = tau_integrated(series.values, window_factor)
    mu = float(series.values.mean())
    sig = error_bar(series.values, est.tau)
    T = total_time if total_time is not None else series.tau0 + series.h * len(series)
    tnorm = None
    if flips is not None:
        tnorm = tau_normalized(est.tau, series.h, flips, T)
    rhat = None
    if sibling_series is not None and len(sibling_series) >= 2:
        rhat = split_rhat([np.asarray(s) for s in sibling_series])
    return ChainDiagnostics(
        observable=observable,
        mu_hat=mu,
        sigma_hat=sig,
        tau_int=est.tau,
        tau_window=est.window,
        tau_flagged=est.flagged,
        tau_normalized=tnorm,
        r_hat=rhat,
        h=series.h,
        tau0=series.tau0,
        total_time=float(T),
        flips=flips,
    )

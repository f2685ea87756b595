"""Event-driven simulation of the fixed-node CTMC.

Holding times are exponential with the total outgoing rate and jumps are
drawn by inverse CDF over the rate list. The path is piecewise constant with
the state attached to the half-open-left interval (tau, tau + dtau], so a
query exactly at a transition time reads the pre-transition state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .fixed_node import GeneratorRates
from .hamiltonian import BitConfiguration


class AbsorbingStateError(RuntimeError):
    """The chain cannot leave the current state: zero total outgoing rate.

    The generator is irreducible on the support of a unique ground state, so
    hitting this signals an inconsistent oracle/Hamiltonian pair.
    """


def make_rng(seed: int) -> np.random.Generator:
    """Philox counter-based stream; a fixed seed reproduces trajectories bit for bit."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class Trajectory:
    """Piecewise-constant CTMC path: ordered (state, holding time) segments."""

    segments: list[tuple[BitConfiguration, float]]
    total_time: float
    truncated: bool = False
    _ends: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def flips(self) -> int:
        return len(self.segments) - 1

    @property
    def final_state(self) -> BitConfiguration:
        return self.segments[-1][0]

    def cumulative_ends(self) -> np.ndarray:
        if self._ends is None:
            self._ends = np.cumsum([h for _, h in self.segments])
        return self._ends

    def state_at(self, s: float) -> BitConfiguration:
        """xi(s); a query exactly at a transition returns the pre-transition state."""
        if not 0 <= s <= self.total_time:
            raise ValueError(f"time {s} outside [0, {self.total_time}]")
        if s == 0.0:
            return self.segments[0][0]
        idx = int(np.searchsorted(self.cumulative_ends(), s, side="left"))
        return self.segments[min(idx, len(self.segments) - 1)][0]


@dataclass(frozen=True)
class ErrorDeclared:
    """Truncated run aborted at the flip cutoff; a normal outcome, not a failure."""

    flips: int
    cutoff: int
    time_reached: float


def step(rates: GeneratorRates, rng: np.random.Generator) -> tuple[float, BitConfiguration]:
    """One Gillespie event: exponential holding time and rate-proportional jump."""
    cum = rates.cumulative()
    total = float(cum[-1]) if len(cum) else 0.0
    if total <= 0.0:
        raise AbsorbingStateError(f"state {rates.source} has no outgoing rate")
    u = 1.0 - rng.random()  # uniform on (0, 1]: log(1/u) stays finite
    dtau = -math.log(u) / total
    idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
    return dtau, rates.targets[min(idx, len(rates.targets) - 1)]


def run(chain, x_in: BitConfiguration, t: float, rng: np.random.Generator) -> Trajectory:
    """Simulate for total time t and return the full path (final state law e^{Gt})."""
    if t < 0:
        raise ValueError(f"negative time {t}")
    segments: list[tuple[BitConfiguration, float]] = []
    x = x_in
    tau = 0.0
    while True:
        dtau, nxt = step(chain.rates(x), rng)
        if tau + dtau >= t:
            segments.append((x, t - tau))
            return Trajectory(segments, t)
        segments.append((x, dtau))
        tau += dtau
        x = nxt


def flip_cutoff(H, t: float, epsilon: float) -> int:
    """ceil(4 eps^-1 t maxdeg(H) normbound(H)); maxdeg replaces the loose n^k."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return math.ceil(4.0 / epsilon * t * H.max_row_degree() * H.norm_bound())


def run_truncated(
    chain,
    x_in: BitConfiguration,
    t: float,
    epsilon: float,
    rng: np.random.Generator,
    cutoff: int | None = None,
) -> Trajectory | ErrorDeclared:
    """Gillespie with a flip budget; exceeding it declares an error instead of looping."""
    if cutoff is None:
        cutoff = flip_cutoff(chain.hamiltonian, t, epsilon)
    segments: list[tuple[BitConfiguration, float]] = []
    x = x_in
    tau = 0.0
    flips = 0
    while True:
        dtau, nxt = step(chain.rates(x), rng)
        if tau + dtau >= t:
            segments.append((x, t - tau))
            return Trajectory(segments, t)
        if flips + 1 > cutoff:
            return ErrorDeclared(flips=flips, cutoff=cutoff, time_reached=tau + dtau)
        segments.append((x, dtau))
        tau += dtau
        x = nxt
        flips += 1


def verify_start_state(
    chain,
    x: BitConfiguration,
    epsilon: float,
    t: float,
    rng: np.random.Generator,
    repetitions: int | None = None,
) -> tuple[float, bool]:
    """Estimate the error-declaration rate from x; accept when it is <= eps/4."""
    if repetitions is None:
        repetitions = math.ceil(16.0 / epsilon**2)
    cutoff = flip_cutoff(chain.hamiltonian, t, epsilon)
    errors = 0
    for _ in range(repetitions):
        out = run_truncated(chain, x, t, epsilon, rng, cutoff=cutoff)
        if isinstance(out, ErrorDeclared):
            errors += 1
    estimate = errors / repetitions
    return estimate, estimate <= epsilon / 4.0


def time_average(traj: Trajectory, f: Callable[[BitConfiguration], float], tau0: float) -> float:
    """Exact piecewise integral of f over (tau0, total_time], divided by the span."""
    if tau0 >= traj.total_time:
        raise ValueError(f"tau0={tau0} is past total_time={traj.total_time}")
    ends = traj.cumulative_ends()
    starts = ends - np.array([h for _, h in traj.segments])
    overlap = np.minimum(ends, traj.total_time) - np.maximum(starts, tau0)
    overlap = np.clip(overlap, 0.0, None)
    acc = 0.0
    for (state, _), w in zip(traj.segments, overlap):
        if w > 0.0:
            acc += f(state) * w
    return acc / (traj.total_time - tau0)


@dataclass
class StreamedRun:
    """Aggregates of a long run kept without storing the path itself."""

    series: dict[str, np.ndarray]
    averages: dict[str, float]
    flips: int
    total_time: float
    tau0: float
    h: float
    final_state: BitConfiguration


def run_observables(
    chain,
    x_in: BitConfiguration,
    t: float,
    rng: np.random.Generator,
    observables: Mapping[str, Callable[[BitConfiguration], float]],
    h: float,
    tau0: float = 0.0,
) -> StreamedRun:
    """Streaming Gillespie run: grid series f(xi(tau0 + j h)) and exact time
    averages over (tau0, t], with O(1) memory in the number of transitions.

    Grid points exactly on a transition take the pre-transition state, the
    same convention as Trajectory.state_at and diagnostics.discretize.
    """
    if t <= tau0:
        raise ValueError(f"need t > tau0, got t={t}, tau0={tau0}")
    if h <= 0 or h >= t - tau0:
        raise ValueError(f"invalid sampling interval h={h}")
    m = int((t - tau0) / h + 1e-9)
    series = {name: np.empty(m) for name in observables}
    acc = {name: 0.0 for name in observables}
    x = x_in
    tau = 0.0
    flips = 0
    while True:
        dtau, nxt = step(chain.rates(x), rng)
        end = tau + dtau
        clipped_end = min(end, t)
        vals = {name: f(x) for name, f in observables.items()}
        # grid indices j with tau < tau0 + j h <= clipped_end; the final segment
        # owns every remaining grid point (they all lie in (tau, t])
        lo = max(1, math.floor((tau - tau0) / h) + 1)
        hi = m if end >= t else min(m, math.floor((clipped_end - tau0) / h))
        if hi >= lo:
            for name in observables:
                series[name][lo - 1 : hi] = vals[name]
        w = clipped_end - max(tau, tau0)
        if w > 0:
            for name in observables:
                acc[name] += vals[name] * w
        if end >= t:
            averages = {name: acc[name] / (t - tau0) for name in observables}
            return StreamedRun(series, averages, flips, t, tau0, h, x)
        tau = end
        x = nxt
        flips += 1


def write_trajectory_jsonl(traj: Trajectory, path, seed: int | None = None) -> None:
    """One record per segment {"state": hex, "dt": t}, then a summary record."""
    with open(path, "w") as fh:
        for state, hold in traj.segments:
            fh.write(json.dumps({"state": state.hex(), "dt": hold}) + "\n")
        summary = {
            "total_time": traj.total_time,
            "flips": traj.flips,
            "truncated": traj.truncated,
            "seed": seed,
        }
        fh.write(json.dumps(summary) + "\n")

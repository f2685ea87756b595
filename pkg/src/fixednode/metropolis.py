"""Discrete-time Metropolis-Hastings baselines with proposal graphs read off H or F.

The proposal distribution is state independent: a move is drawn uniformly
from a fixed universe (for the spin ring, all (L/2)^2 occupied-to-empty
hops, probability 4/L^2 each). Proposals that are not edges of the chosen
operator's graph are auto-rejected, which keeps Q symmetric so the
acceptance reduces to min(1, pi(y)/pi(x)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .fixed_node import SignClass, classify
from .hamiltonian import AmplitudeOracle, BitConfiguration, ZeroAmplitudeError


class ProposalMode(enum.Enum):
    FROM_H = "H"
    FROM_F = "F"


@dataclass
class ProposalGraph:
    """A fixed proposal universe plus the edge filter of the chosen operator."""

    mode: ProposalMode
    propose: Callable[[BitConfiguration, np.random.Generator], BitConfiguration]
    allowed: Callable[[BitConfiguration, BitConfiguration], bool]
    universe: Callable[[BitConfiguration], list[tuple[BitConfiguration, float]]]

    def neighbors(self, x: BitConfiguration) -> list[BitConfiguration]:
        return [y for y, _ in self.universe(x) if self.allowed(x, y)]


def hs_proposal_graph(H, oracle: AmplitudeOracle, mode: ProposalMode) -> ProposalGraph:
    """Uniform bit-pair-swap universe for half-filling ring states.

    FROM_H keeps every hop (the exchange entry 2 J_ij never vanishes);
    FROM_F keeps only sign-compatible hops, read from the oracle's signs.
    """

    def propose(x: BitConfiguration, rng: np.random.Generator) -> BitConfiguration:
        occ = x.occupied_sites()
        m = len(occ)
        if m == 0 or m == x.n:
            raise ValueError(f"state {x} has no swap moves")
        unocc = [i for i in range(x.n) if not x.bit(i)]
        i = occ[rng.integers(m)]
        j = unocc[rng.integers(len(unocc))]
        return x.flip(i, j)

    def universe(x: BitConfiguration) -> list[tuple[BitConfiguration, float]]:
        occ = x.occupied_sites()
        unocc = [i for i in range(x.n) if not x.bit(i)]
        q = 1.0 / (len(occ) * len(unocc))
        return [(x.flip(i, j), q) for i in occ for j in unocc]

    if mode is ProposalMode.FROM_H:
        allowed = lambda x, y: True
    else:
        allowed = lambda x, y: classify(H, oracle, x, y) is SignClass.S_MINUS
    return ProposalGraph(mode, propose, allowed, universe)


def pi_ratio_from_oracle(oracle: AmplitudeOracle):
    """pi(y)/pi(x) as the squared amplitude ratio, assembled in the log domain."""

    def pi_ratio(x: BitConfiguration, y: BitConfiguration) -> float:
        ax = oracle.log_amplitude(x)
        if ax.sign == 0:
            raise ZeroAmplitudeError(f"zero amplitude at current state {x}")
        ay = oracle.log_amplitude(y)
        if ay.sign == 0:
            return 0.0
        return math.exp(2.0 * (ay.logmag - ax.logmag))

    return pi_ratio


def mh_step(
    x: BitConfiguration,
    graph: ProposalGraph,
    pi_ratio: Callable[[BitConfiguration, BitConfiguration], float],
    rng: np.random.Generator,
) -> BitConfiguration:
    """One proposal/acceptance round; certain acceptances consume no extra draw."""
    y = graph.propose(x, rng)
    if not graph.allowed(x, y):
        return x
    a = pi_ratio(x, y)
    if a >= 1.0 or rng.random() < a:
        return y
    return x


def mh_run(
    x_in: BitConfiguration,
    steps: int,
    graph: ProposalGraph,
    pi_ratio,
    rng: np.random.Generator,
) -> list[BitConfiguration]:
    """State series of the chain, repeats included; deterministic under a fixed seed."""
    if steps < 1:
        raise ValueError(f"need steps >= 1, got {steps}")
    x = x_in
    out = []
    for _ in range(steps):
        x = mh_step(x, graph, pi_ratio, rng)
        out.append(x)
    return out


def mh_observable_series(
    x_in: BitConfiguration,
    steps: int,
    graph: ProposalGraph,
    pi_ratio,
    rng: np.random.Generator,
    observables: Mapping[str, Callable[[BitConfiguration], float]],
    burn_in: int = 0,
) -> tuple[dict[str, np.ndarray], BitConfiguration, float]:
    """Streaming variant recording f per step after burn_in; returns
    (series dict, final state, acceptance rate)."""
    if steps < 1 or burn_in < 0 or burn_in >= steps:
        raise ValueError(f"bad steps={steps}, burn_in={burn_in}")
    kept = steps - burn_in
    series = {name: np.empty(kept) for name in observables}
    x = x_in
    vals = {name: f(x) for name, f in observables.items()}
    accepted = 0
    for k in range(steps):
        y = mh_step(x, graph, pi_ratio, rng)
        if y is not x:
            accepted += 1
            x = y
            vals = {name: f(x) for name, f in observables.items()}
        if k >= burn_in:
            for name in observables:
                series[name][k - burn_in] = vals[name]
    return series, x, accepted / steps


def dense_transition_matrix(
    graph: ProposalGraph,
    pi: np.ndarray,
    basis: Sequence[BitConfiguration],
) -> np.ndarray:
    """Exact one-step kernel P[y, x] on a sector, for detailed-balance checks."""
    basis = list(basis)
    index = {s: i for i, s in enumerate(basis)}
    dim = len(basis)
    P = np.zeros((dim, dim))
    for j, x in enumerate(basis):
        stay = 1.0
        for y, q in graph.universe(x):
            i = index.get(y)
            if i is None or not graph.allowed(x, y):
                continue
            a = min(1.0, pi[i] / pi[j]) if pi[j] > 0 else 0.0
            P[i, j] += q * a
            stay -= q * a
        P[j, j] += stay
    return P


def is_irreducible_aperiodic(P: np.ndarray) -> tuple[bool, bool]:
    """Reachability scan of the kernel; aperiodicity via a positive self-loop."""
    dim = P.shape[0]
    adj = P > 0
    reach = np.eye(dim, dtype=bool)
    frontier = reach.copy()
    while frontier.any():
        nxt = (adj @ frontier) & ~reach
        reach |= nxt
        frontier = nxt
    irreducible = bool(reach.all())
    aperiodic = bool(np.any(np.diag(P) > 0))
    return irreducible, irreducible and aperiodic


def write_series_csv(path, series: Sequence[BitConfiguration], observables: Mapping[str, Callable]) -> None:
    """step, state(hex), then one column per registered observable."""
    names = list(observables)
    with open(path, "w") as fh:
        fh.write(",".join(["step", "state"] + names) + "\n")
        for k, x in enumerate(series):
            vals = [repr(observables[name](x)) for name in names]
            fh.write(",".join([str(k), x.hex()] + vals) + "\n")

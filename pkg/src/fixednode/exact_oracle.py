"""Dense small-instance linear algebra used to validate the sampling machinery.

Everything here is an independent check path: dense operators are assembled
either from lazy row access or directly from the Pauli term list by Kronecker
products, and the CTMC evolution is evaluated exactly through the symmetric
conjugate of the generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fixed_node import fixed_node_row, generator_rates
from .hamiltonian import BitConfiguration, SparseHamiltonian

SECTOR_CAP = 1 << 20
DENSE_EIG_CAP = 4096

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class DenseSector:
    """A dense operator restricted to an ordered basis, plus aligned amplitudes."""

    basis: tuple[BitConfiguration, ...]
    matrix: np.ndarray
    amplitudes: np.ndarray | None = None

    def __post_init__(self):
        self.index = {x: i for i, x in enumerate(self.basis)}
        if self.amplitudes is not None:
            self.amplitudes = np.asarray(self.amplitudes, dtype=float)
            nrm = np.linalg.norm(self.amplitudes)
            if nrm == 0:
                raise ValueError("amplitude vector is zero")
            self.amplitudes = self.amplitudes / nrm

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pi(self) -> np.ndarray:
        if self.amplitudes is None:
            raise ValueError("sector carries no amplitudes")
        return self.amplitudes**2


def support_basis(oracle, n: int, cap: int = SECTOR_CAP) -> list[BitConfiguration]:
    """All basis states with nonzero amplitude, by full enumeration (small n)."""
    if (1 << n) > cap:
        raise ValueError(f"2^{n} states exceed the sector cap {cap}")
    return [
        x
        for b in range(1 << n)
        if oracle.sign(x := BitConfiguration(b, n)) != 0
    ]


def build_dense(
    row_fn: Callable[[BitConfiguration], list],
    basis: Sequence[BitConfiguration],
    amplitudes: np.ndarray | None = None,
    strict: bool = True,
    cap: int = SECTOR_CAP,
) -> DenseSector:
    """Materialize a row-access operator on a sector basis.

    With ``strict`` an entry leading outside the basis is an error (it would
    mean the sector is not invariant); otherwise such entries are dropped.
    """
    if len(basis) > cap:
        raise ValueError(f"sector size {len(basis)} exceeds cap {cap}")
    basis = tuple(basis)
    index = {x: i for i, x in enumerate(basis)}
    mat = np.zeros((len(basis), len(basis)))
    for j, x in enumerate(basis):
        for y, v in row_fn(x):
            i = index.get(y)
            if i is None:
                if strict and abs(v) > 1e-12:
                    raise ValueError(f"entry ({y}, {x}) = {v} leaves the sector")
                continue
            mat[i, j] += v
    return DenseSector(basis, mat, amplitudes)


def dense_from_terms(H: SparseHamiltonian, basis: Sequence[BitConfiguration] | None = None):
    """Independent dense construction by Kronecker products of 2x2 Paulis.

    Returns a real array for even-Y term lists, complex otherwise. This is
    the oracle against which row materialization is checked; it never goes
    through ``row``.
    """
    n = H.n
    if n > 14:
        raise ValueError(f"kron construction capped at n=14, got {n}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    for t in H.terms:
        labels = ["I"] * n
        for q, p in t.support:
            labels[q] = p
        op = np.array([[t.coefficient]], dtype=complex)
        for lab in labels:
            op = np.kron(op, _PAULI[lab])
        mat += op
    if basis is not None:
        sel = [x.bits for x in basis]
        mat = mat[np.ix_(sel, sel)]
    if np.abs(mat.imag).max() < 1e-14:
        return mat.real.copy()
    return mat


def dense_fixed_node(H, oracle, basis) -> DenseSector:
    amps = np.array([oracle.log_amplitude(x).value() for x in basis])
    return build_dense(lambda x: fixed_node_row(H, oracle, x), basis, amplitudes=amps)


def dense_generator(H, oracle, lambda1: float, basis, rate_floor: float = 0.0) -> DenseSector:
    """Dense generator with columns from generator_rates (diagonal = -total)."""
    basis = tuple(basis)
    index = {x: i for i, x in enumerate(basis)}
    mat = np.zeros((len(basis), len(basis)))
    for j, x in enumerate(basis):
        r = generator_rates(H, oracle, lambda1, x, rate_floor=rate_floor)
        mat[j, j] = -r.total_rate
        for y, v in zip(r.targets, r.rates):
            i = index.get(y)
            if i is None:
                raise ValueError(f"rate target {y} outside the sector")
            mat[i, j] += v
    amps = np.array([oracle.log_amplitude(x).value() for x in basis])
    return DenseSector(basis, mat, amplitudes=amps)


def eig_sym(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigendecomposition of a symmetric matrix, residual-checked."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"not square: {matrix.shape}")
    scale = max(1.0, float(np.abs(matrix).max()))
    if float(np.abs(matrix - matrix.T).max()) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    if matrix.shape[0] > DENSE_EIG_CAP:
        raise ValueError(f"dimension {matrix.shape[0]} exceeds eig cap {DENSE_EIG_CAP}")
    w, v = np.linalg.eigh(matrix)
    resid = float(np.abs(matrix @ v - v * w).max())
    if resid > 1e-9 * scale * max(1, matrix.shape[0]):
        raise RuntimeError(f"eigendecomposition residual {resid} too large")
    return w, v


def spectral_gaps(H_dense: np.ndarray, F_dense: np.ndarray) -> tuple[float, float]:
    """(gamma, gamma_F) on a common sector; degenerate ground states are an error."""
    wh = eig_sym(H_dense)[0]
    wf = eig_sym(F_dense)[0]
    gamma = float(wh[1] - wh[0])
    gamma_f = float(wf[1] - wf[0])
    if gamma <= 1e-10 or gamma_f <= 1e-10:
        raise ValueError(f"degenerate ground state: gamma={gamma}, gamma_F={gamma_f}")
    return gamma, gamma_f


class ExactEvolution:
    """pi_t = D e^{Mt} D^{-1} delta_x via the symmetric conjugate M of G."""

    def __init__(self, G: DenseSector):
        if G.amplitudes is None:
            raise ValueError("generator sector must carry amplitudes")
        if np.any(G.amplitudes == 0):
            raise ValueError("zero amplitude in the similarity diagonal")
        self.sector = G
        d = G.amplitudes
        M = G.matrix / d[:, None] * d[None, :]
        M = (M + M.T) / 2.0
        self.eigenvalues, self.eigenvectors = eig_sym(M)

    def distribution(self, x_in: BitConfiguration | int, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError(f"negative time {t}")
        j = x_in if isinstance(x_in, (int, np.integer)) else self.sector.index[x_in]
        d = self.sector.amplitudes
        v = self.eigenvectors
        coeff = v.T[:, j] / d[j]
        pi_t = d * (v @ (np.exp(self.eigenvalues * t) * coeff))
        pi_t[np.abs(pi_t) < 1e-14] = 0.0
        s = pi_t.sum()
        if abs(s - 1.0) > 1e-9:
            raise RuntimeError(f"evolved distribution sums to {s}")
        return pi_t


def exact_evolution(G: DenseSector, x_in: BitConfiguration | int, t: float) -> np.ndarray:
    return ExactEvolution(G).distribution(x_in, t)


def expected_flip_rate(F_dense: np.ndarray, amplitudes: np.ndarray) -> float:
    """Mean CTMC transitions per unit time at stationarity: -<psi|F_od|psi>."""
    psi = np.asarray(amplitudes, dtype=float)
    psi = psi / np.linalg.norm(psi)
    off = F_dense - np.diag(np.diag(F_dense))
    return float(-psi @ off @ psi)


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """1-norm distance sum |p_i - q_i| (twice the total variation distance)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("negative entries")
    return float(np.abs(p - q).sum())


def wick_check(amplitudes: np.ndarray) -> float:
    """Free-fermion residual of a 4-qubit state supported on even weights.

    Returns -a(0000) a(1111) + a(1100) a(0011) - a(1010) a(0101)
    + a(1001) a(0110); zero iff the state obeys the 4-qubit Wick condition.
    """
    a = np.asarray(amplitudes)
    if a.shape != (16,):
        raise ValueError(f"need 16 amplitudes, got {a.shape}")
    odd = [i for i in range(16) if bin(i).count("1") % 2]
    if np.any(np.abs(a[odd]) > 0):
        raise ValueError("state has support on odd-weight strings")
    return float(
        -a[0b0000] * a[0b1111]
        + a[0b1100] * a[0b0011]
        - a[0b1010] * a[0b0101]
        + a[0b1001] * a[0b0110]
    )

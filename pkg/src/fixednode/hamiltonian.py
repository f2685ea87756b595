"""Sparse Pauli-term Hamiltonians, bit-string configurations, and amplitude oracles.

Operators are kept as Pauli term lists and materialized row by row; dense
matrices are only ever built by the ``exact`` module. Ground-state amplitudes
travel in (sign, log-magnitude) form so that products of thousands of factors
never leave the representable range of a double.
"""

from __future__ import annotations

import abc
import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

# Off-diagonal entries at or below this magnitude are treated as absent
# everywhere (row access, stoquasticity, sign classification).
ENTRY_EPS = 1e-12

PAULI_LABELS = ("X", "Y", "Z")


class ZeroAmplitudeError(ValueError):
    """An amplitude that must be nonzero is exactly zero."""


class NonRealHamiltonianError(ValueError):
    """Operation requires a real-symmetric operator (even Y count per term)."""


class BitConfiguration:
    """An n-bit basis state packed into a Python integer.

    Site 0 is the leftmost character of the string form and the most
    significant bit of ``bits``, so integer order coincides with
    lexicographic order of the bit strings.
    """

    __slots__ = ("bits", "n")

    def __init__(self, bits: int, n: int):
        if n <= 0:
            raise ValueError(f"need at least one site, got n={n}")
        if not 0 <= bits < (1 << n):
            raise ValueError(f"bits {bits:#x} out of range for n={n}")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "n", n)

    def __setattr__(self, *_):
        raise AttributeError("BitConfiguration is immutable")

    @classmethod
    def from_string(cls, s: str) -> "BitConfiguration":
        if not s or any(c not in "01" for c in s):
            raise ValueError(f"not a bit string: {s!r}")
        return cls(int(s, 2), len(s))

    @classmethod
    def from_sites(cls, sites: Iterable[int], n: int) -> "BitConfiguration":
        """Configuration with ones exactly at the given site indices."""
        bits = 0
        for s in sites:
            bits |= 1 << (n - 1 - s)
        return cls(bits, n)

    @classmethod
    def zeros(cls, n: int) -> "BitConfiguration":
        return cls(0, n)

    def bit(self, site: int) -> int:
        return (self.bits >> (self.n - 1 - site)) & 1

    @property
    def weight(self) -> int:
        """Hamming weight, O(n / wordsize)."""
        return self.bits.bit_count()

    def flip(self, *sites: int) -> "BitConfiguration":
        mask = 0
        for s in sites:
            mask |= 1 << (self.n - 1 - s)
        return BitConfiguration(self.bits ^ mask, self.n)

    def occupied_sites(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.bit(i))

    def to01(self) -> np.ndarray:
        """Bits as a uint8 array indexed by site."""
        out = np.empty(self.n, dtype=np.uint8)
        for i in range(self.n):
            out[i] = (self.bits >> (self.n - 1 - i)) & 1
        return out

    def hex(self) -> str:
        return format(self.bits, "0{}x".format((self.n + 3) // 4))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitConfiguration)
            and self.bits == other.bits
            and self.n == other.n
        )

    def __hash__(self) -> int:
        return hash((self.bits, self.n))

    def __lt__(self, other: "BitConfiguration") -> bool:
        return (self.n, self.bits) < (other.n, other.bits)

    def __le__(self, other: "BitConfiguration") -> bool:
        return (self.n, self.bits) <= (other.n, other.bits)

    def __str__(self) -> str:
        return format(self.bits, "0{}b".format(self.n))

    def __repr__(self) -> str:
        return f"BitConfiguration('{self}')"


class SignedLogAmplitude(NamedTuple):
    """Unnormalized amplitude as (sign, log magnitude); sign 0 means exactly zero."""

    sign: int
    logmag: float

    @classmethod
    def from_value(cls, v: float) -> "SignedLogAmplitude":
        if v == 0.0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)))

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)


class AmplitudeOracle(abc.ABC):
    """Ground-state access through unnormalized amplitudes.

    The only contract the sampling machinery relies on is the derived ratio
    map (x, y) -> <y|psi>/<x|psi>.
    """

    @abc.abstractmethod
    def log_amplitude(self, x: BitConfiguration) -> SignedLogAmplitude:
        raise NotImplementedError

    def sign(self, x: BitConfiguration) -> int:
        return self.log_amplitude(x).sign

    def in_support(self, x: BitConfiguration) -> bool:
        return self.sign(x) != 0

    def ratio(self, x: BitConfiguration, y: BitConfiguration) -> float:
        """<y|psi>/<x|psi> computed in the log domain."""
        ax = self.log_amplitude(x)
        if ax.sign == 0:
            raise ZeroAmplitudeError(f"zero amplitude at ratio base state {x}")
        ay = self.log_amplitude(y)
        if ay.sign == 0:
            return 0.0
        return ax.sign * ay.sign * math.exp(ay.logmag - ax.logmag)


class TableOracle(AmplitudeOracle):
    """Amplitudes read off a dense table over all 2^n basis states."""

    def __init__(self, table: np.ndarray, n: int):
        table = np.asarray(table, dtype=float)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have 2^{n} entries, got {table.shape}")
        self.table = table
        self.n = n

    def log_amplitude(self, x: BitConfiguration) -> SignedLogAmplitude:
        return SignedLogAmplitude.from_value(float(self.table[x.bits]))


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * (tensor product of single-site Paulis on ``support``)."""

    coefficient: float
    support: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not math.isfinite(self.coefficient) or self.coefficient == 0.0:
            raise ValueError(f"coefficient must be finite and nonzero: {self.coefficient}")
        if not self.support:
            raise ValueError("empty support (identity terms are not allowed)")
        sites = [q for q, _ in self.support]
        if sites != sorted(set(sites)):
            raise ValueError(f"support sites must be strictly increasing: {sites}")
        if any(s < 0 for s in sites):
            raise ValueError(f"negative site index in {sites}")
        for _, label in self.support:
            if label not in PAULI_LABELS:
                raise ValueError(f"unknown Pauli label {label!r}")
        object.__setattr__(self, "support", tuple((int(q), str(p)) for q, p in self.support))

    @property
    def y_count(self) -> int:
        return sum(1 for _, p in self.support if p == "Y")

    @property
    def weight(self) -> int:
        return len(self.support)


def _term_flip_mask(term: PauliTerm, n: int) -> int:
    mask = 0
    for q, p in term.support:
        if p in ("X", "Y"):
            mask |= 1 << (n - 1 - q)
    return mask


def _term_element(term: PauliTerm, x: BitConfiguration) -> float:
    """<y|term|x> where y = x flipped on the term's X/Y sites (even Y count)."""
    val = term.coefficient
    n_y = 0
    for q, p in term.support:
        if p == "X":
            continue
        b = x.bit(q)
        if p == "Z":
            val = val if b == 0 else -val
        else:  # Y contributes i * (1 - 2b); the i factors pair up for even counts
            n_y += 1
            val = val if b == 0 else -val
    if n_y % 2:
        raise NonRealHamiltonianError("odd Y count has imaginary matrix elements")
    if n_y % 4 == 2:
        val = -val
    return val


class SparseHamiltonian:
    """Real symmetric operator given as a Pauli term list with on-demand rows.

    ``is_real`` records whether every term has an even number of Y factors;
    complex term lists may be stored (for the real-embedding reduction) but
    cannot be row-materialized directly.
    """

    def __init__(self, n: int, terms: Sequence[PauliTerm]):
        if n <= 0:
            raise ValueError(f"need n >= 1, got {n}")
        terms = tuple(terms)
        for t in terms:
            if t.support[-1][0] >= n:
                raise ValueError(f"term touches site {t.support[-1][0]} but n={n}")
        self.n = n
        self.terms = terms
        self.locality = max((t.weight for t in terms), default=0)
        self.is_real = all(t.y_count % 2 == 0 for t in terms)
        self._groups: dict[int, list[PauliTerm]] = {}
        for t in terms:
            self._groups.setdefault(_term_flip_mask(t, n), []).append(t)

    def _require_real(self):
        if not self.is_real:
            raise NonRealHamiltonianError(
                "operator has odd-Y terms; route it through real_embedding"
            )

    def row(self, x: BitConfiguration) -> list[tuple[BitConfiguration, float]]:
        """All nonzero entries <y|H|x> of column x, diagonal first (always emitted)."""
        self._require_real()
        diag = 0.0
        off: dict[int, float] = {}
        for mask, terms in self._groups.items():
            v = 0.0
            for t in terms:
                v += _term_element(t, x)
            if mask == 0:
                diag += v
            elif abs(v) > ENTRY_EPS:
                off[x.bits ^ mask] = off.get(x.bits ^ mask, 0.0) + v
        out = [(x, diag)]
        for bits in sorted(off):
            if abs(off[bits]) > ENTRY_EPS:
                out.append((BitConfiguration(bits, self.n), off[bits]))
        return out

    def entry(self, x: BitConfiguration, y: BitConfiguration) -> float:
        """<y|H|x>, exact sum over the contributing terms."""
        self._require_real()
        mask = x.bits ^ y.bits
        v = 0.0
        for t in self._groups.get(mask, ()):
            v += _term_element(t, x)
        return v

    def norm_bound(self) -> float:
        """Triangle-inequality bound sum_a |coeff_a| on the operator norm."""
        return float(sum(abs(t.coefficient) for t in self.terms))

    def max_row_degree(self) -> int:
        """Upper bound on off-diagonal entries per row: distinct nonzero flip masks."""
        return sum(1 for m in self._groups if m != 0)

    def is_stoquastic(
        self,
        sector: Iterable[BitConfiguration] | None = None,
        cap: int = 1 << 20,
    ) -> "StoquasticityResult":
        """Scan off-diagonal entries; stoquastic iff all are <= ENTRY_EPS.

        Without a sector the full 2^n basis is scanned; if it exceeds ``cap``
        the scan covers the first ``cap`` states and reports undecided unless
        a positive witness is found earlier.
        """
        self._require_real()
        if sector is not None:
            states: Iterable[BitConfiguration] = sector
            capped = False
        else:
            total = 1 << self.n
            capped = total > cap
            states = (BitConfiguration(b, self.n) for b in range(min(total, cap)))
        checked = 0
        for x in states:
            checked += 1
            if checked > cap:
                capped = True
                break
            for y, v in self.row(x):
                if y != x and v > ENTRY_EPS:
                    return StoquasticityResult(False, (x, y, v), checked)
        if capped:
            return StoquasticityResult(None, None, checked)
        return StoquasticityResult(True, None, checked)


@dataclass(frozen=True)
class StoquasticityResult:
    """stoquastic is None when the scan hit the state-count cap undecided."""

    stoquastic: bool | None
    witness: tuple[BitConfiguration, BitConfiguration, float] | None
    states_checked: int


def load_term_list(path, n: int | None = None) -> SparseHamiltonian:
    """Load a JSON array of {"coeff": float, "paulis": [[site, label], ...]}."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError("term-list file must be a JSON array")
    terms = []
    max_site = -1
    for rec in raw:
        support = tuple((int(q), str(p)) for q, p in rec["paulis"])
        terms.append(PauliTerm(float(rec["coeff"]), support))
        max_site = max(max_site, support[-1][0])
    if n is None:
        n = max_site + 1
    return SparseHamiltonian(n, terms)


def save_term_list(H: SparseHamiltonian, path) -> None:
    recs = [
        {"coeff": t.coefficient, "paulis": [[q, p] for q, p in t.support]}
        for t in H.terms
    ]
    with open(path, "w") as fh:
        json.dump(recs, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Real embedding of complex Hermitian operators (one ancilla qubit).
# ---------------------------------------------------------------------------


class ComplexTableOracle:
    """Complex amplitudes from a dense table; input side of real_embedding."""

    def __init__(self, table: np.ndarray, n: int):
        table = np.asarray(table, dtype=complex)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have 2^{n} entries, got {table.shape}")
        self.table = table
        self.n = n

    def amplitude(self, x: BitConfiguration) -> complex:
        return complex(self.table[x.bits])


def _rewrite_terms_real(H: SparseHamiltonian) -> SparseHamiltonian:
    """Realify the term list on n+1 qubits.

    Writing H = A + i(B - B^T), the operator
    A (x) I + (B - B^T) (x) [[0,-1],[1,0]] equals, term by term: even-Y terms
    unchanged (ancilla idle), odd-Y terms with the coefficient negated and a Y
    appended on the ancilla. Every rewritten term has an even Y count.
    """
    n = H.n
    out = []
    for t in H.terms:
        if t.y_count % 2 == 0:
            out.append(t)
        else:
            out.append(PauliTerm(-t.coefficient, t.support + ((n, "Y"),)))
    return SparseHamiltonian(n + 1, out)


class EmbeddedOperator:
    """Row-access real symmetric operator on n+1 qubits from a complex H.

    Rows combine the realified term list with the dephasing projector
    sum_x |x><x| (x) |v_x><v_x|, v_x = -sin(theta_x)|0> + cos(theta_x)|1>,
    where theta_x is the phase of <x|psi> relative to the reference state
    0^n. The projector blocks are materialized lazily, one oracle call per
    row, never as a precomputed table.
    """

    def __init__(self, H_complex: SparseHamiltonian, oracle):
        self.base = _rewrite_terms_real(H_complex)
        self.n = H_complex.n + 1
        self.is_real = True
        self._oracle = oracle
        self._ref = BitConfiguration.zeros(H_complex.n)
        a0 = complex(oracle.amplitude(self._ref))
        if abs(a0) == 0.0:
            raise ZeroAmplitudeError("reference state 0^n has zero amplitude")
        self._phase0 = a0 / abs(a0)
        self._theta: dict[int, float] = {}

    def system_part(self, x: BitConfiguration) -> BitConfiguration:
        return BitConfiguration(x.bits >> 1, self.n - 1)

    def ancilla_bit(self, x: BitConfiguration) -> int:
        return x.bits & 1

    def phased_amplitude(self, xsys: BitConfiguration) -> complex:
        """<x|psi> with the global phase fixed so the reference amplitude is positive real."""
        a = complex(self._oracle.amplitude(xsys))
        if abs(a) == 0.0:
            raise ZeroAmplitudeError(f"zero amplitude at {xsys} during theta extraction")
        return a / self._phase0

    def theta(self, xsys: BitConfiguration) -> float:
        th = self._theta.get(xsys.bits)
        if th is None:
            th = cmath.phase(self.phased_amplitude(xsys))
            self._theta[xsys.bits] = th
        return th

    def row(self, x: BitConfiguration) -> list[tuple[BitConfiguration, float]]:
        entries = {y.bits: v for y, v in self.base.row(x)}
        th = self.theta(self.system_part(x))
        s, c = math.sin(th), math.cos(th)
        a = self.ancilla_bit(x)
        diag_add = s * s if a == 0 else c * c
        cross = -s * c
        entries[x.bits] = entries.get(x.bits, 0.0) + diag_add
        partner = x.bits ^ 1
        if abs(cross) > ENTRY_EPS:
            entries[partner] = entries.get(partner, 0.0) + cross
        out = [(x, entries.pop(x.bits))]
        for bits in sorted(entries):
            if abs(entries[bits]) > ENTRY_EPS:
                out.append((BitConfiguration(bits, self.n), entries[bits]))
        return out

    def entry(self, x: BitConfiguration, y: BitConfiguration) -> float:
        v = self.base.entry(x, y)
        if x.bits >> 1 == y.bits >> 1:
            th = self.theta(self.system_part(x))
            s, c = math.sin(th), math.cos(th)
            if x.bits == y.bits:
                v += s * s if self.ancilla_bit(x) == 0 else c * c
            else:
                v += -s * c
        return v

    def norm_bound(self) -> float:
        # projector sum has operator norm exactly 1 (orthogonal rank-1 blocks)
        return self.base.norm_bound() + 1.0

    def max_row_degree(self) -> int:
        return self.base.max_row_degree() + 1


class EmbeddedGroundOracle(AmplitudeOracle):
    """Amplitude oracle of the embedded ground state Re(psi)|0> + Im(psi)|1>."""

    def __init__(self, operator: EmbeddedOperator):
        self._op = operator

    def log_amplitude(self, x: BitConfiguration) -> SignedLogAmplitude:
        a = self._op.phased_amplitude(self._op.system_part(x))
        v = a.real if self._op.ancilla_bit(x) == 0 else a.imag
        return SignedLogAmplitude.from_value(v)


def real_embedding(
    H_complex: SparseHamiltonian, oracle
) -> tuple[EmbeddedOperator, EmbeddedGroundOracle]:
    """Reduce a complex Hermitian term list to a real operator on n+1 qubits.

    The returned operator has ground state Re(psi)|0> + Im(psi)|1> at the
    original ground energy and spectral gap at least min(1, gap(H)); the
    second return value is the amplitude oracle of that embedded state.
    ``oracle`` must expose amplitude(x) -> complex for the ground state of
    ``H_complex``, nonzero everywhere.
    """
    op = EmbeddedOperator(H_complex, oracle)
    return op, EmbeddedGroundOracle(op)

"""Majorana operators in the Jordan-Wigner representation.

Every Majorana monomial is a Pauli string, stored in symplectic form
``(x, z, e)`` meaning ``i**e * X^x Z^z`` (all X factors to the left of all Z
factors).  Qubit ``k`` sits at bit ``q - 1 - k`` of a basis index so that the
dense matrices agree with ``np.kron`` ordering, qubit 0 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import BasisOverflowError, DegeneracyError, DomainError

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PHASES = np.array([1, 1j, -1, -1j])

MAX_STRING_MODES = 12


def _popcount(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


@dataclass(frozen=True)
class Symplectic:
    x: int
    z: int
    e: int = 0

    def __mul__(self, other: "Symplectic") -> "Symplectic":
        swap = bin(self.z & other.x).count("1")
        return Symplectic(self.x ^ other.x, self.z ^ other.z, (self.e + other.e + 2 * swap) % 4)


@dataclass
class MajoranaAlgebra:
    """``n`` Majorana operators on ``n // 2`` qubits, normalised to square 1."""

    n: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise DomainError(f"Majorana count must be even and >= 2, got {self.n}")

    @property
    def n_qubits(self) -> int:
        return self.n // 2

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def _bit(self, qubit: int) -> int:
        return 1 << (self.n_qubits - 1 - qubit)

    def symplectic(self, m: int) -> Symplectic:
        k = m // 2
        string = 0
        for j in range(k):
            string |= self._bit(j)
        if m % 2 == 0:
            return Symplectic(self._bit(k), string, 0)
        # Y = i X Z on the site
        return Symplectic(self._bit(k), string | self._bit(k), 1)

    def monomial(self, indices) -> Symplectic:
        out = Symplectic(0, 0, 0)
        for m in indices:
            out = out * self.symplectic(m)
        return out

    def dense(self, s: Symplectic) -> np.ndarray:
        d = self.dim
        cols = np.arange(d)
        signs = np.where(_popcount(s.z & cols) % 2, -1.0, 1.0)
        out = np.zeros((d, d), dtype=complex)
        out[cols ^ s.x, cols] = _PHASES[s.e] * signs
        return out

    @cached_property
    def matrices(self) -> list[np.ndarray]:
        """Dense matrices built from Kronecker products (independent of :meth:`dense`)."""
        q = self.n_qubits
        mats = []
        for m in range(self.n):
            k = m // 2
            factors = [_Z] * k + [_X if m % 2 == 0 else _Y] + [_I2] * (q - k - 1)
            out = factors[0]
            for f in factors[1:]:
                out = np.kron(out, f)
            mats.append(out)
        return mats

    @cached_property
    def parity(self) -> np.ndarray:
        d = self.dim
        return np.diag(np.where(_popcount(np.arange(d)) % 2, -1.0, 1.0)).astype(complex)

    def product(self, indices) -> np.ndarray:
        return self.dense(self.monomial(indices))

    def scatter_table(self, monomials, hermitian_phase) -> tuple[np.ndarray, np.ndarray]:
        """Flat indices and values for assembling ``sum_k w_k O_k`` quickly.

        ``hermitian_phase[k]`` multiplies monomial ``k`` (``1j`` for bilinears).
        """
        d = self.dim
        cols = np.arange(d)
        idx = np.empty((len(monomials), d), dtype=np.int64)
        vals = np.empty((len(monomials), d), dtype=complex)
        for k, (mono, ph) in enumerate(zip(monomials, hermitian_phase)):
            s = self.monomial(mono)
            signs = np.where(_popcount(s.z & cols) % 2, -1.0, 1.0)
            idx[k] = (cols ^ s.x) * d + cols
            vals[k] = ph * _PHASES[s.e] * signs
        return idx, vals

    # -- operator-string basis -------------------------------------------------

    @cached_property
    def _string_table(self):
        if self.n > MAX_STRING_MODES:
            raise BasisOverflowError(
                f"string basis of {self.n} Majoranas exceeds the cap of {MAX_STRING_MODES}"
            )
        d = self.dim
        n_str = 2**self.n
        singles = [self.symplectic(m) for m in range(self.n)]
        xs = np.empty(n_str, dtype=np.int64)
        zs = np.empty(n_str, dtype=np.int64)
        es = np.empty(n_str, dtype=np.int64)
        weights = np.empty(n_str, dtype=np.int64)
        for mask in range(n_str):
            s = Symplectic(0, 0, 0)
            k = 0
            for m in range(self.n):
                if mask >> m & 1:
                    s = s * singles[m]
                    k += 1
            # i^{k(k-1)/2} makes the ordered product Hermitian
            xs[mask], zs[mask], es[mask] = s.x, s.z, (s.e + k * (k - 1) // 2) % 4
            weights[mask] = k
        cols = np.arange(d)
        rows = cols[None, :] ^ xs[:, None]
        signs = np.where(_popcount(zs[:, None] & cols[None, :]) % 2, -1.0, 1.0)
        coef = _PHASES[es][:, None] * signs
        return rows, coef, weights

    def string_masks(self) -> np.ndarray:
        return np.arange(2**self.n)

    def expand(self, op: np.ndarray) -> np.ndarray:
        """Coefficients ``c_S = tr(S op) / d`` over all Hermitian strings.

        Strings are indexed by bit masks over Majorana labels; bit ``m`` set
        means the string contains Majorana ``m``.
        """
        rows, coef, _ = self._string_table
        d = self.dim
        cols = np.arange(d)
        # tr(S op) = sum_m S[m ^ x, m] op[m, m ^ x]
        gathered = op[cols[None, :], rows]
        return (coef * gathered).sum(axis=1) / d

    def string_size(self, n_counted: int) -> np.ndarray:
        """Number of Majoranas with label ``< n_counted`` in each string."""
        masks = self.string_masks()
        return _popcount(masks & ((1 << n_counted) - 1))


# -- two-party states ------------------------------------------------------------
#
# A two-party state is a d x d array psi[i, j] over |i>_L |j>_R.  Left Majoranas
# act as gamma_m (x) 1 and right ones as P (x) gamma_m with P the left parity,
# so (A (x) B) psi = A @ psi @ B.T.


def build_epr(alg_l: MajoranaAlgebra, alg_r: MajoranaAlgebra, check: bool = True) -> np.ndarray:
    """State annihilated by every ``chi_{m,L} + i chi_{m,R}``.

    Obtained by applying the rank-one projector
    ``prod_m (1 - i chi_{m,L} chi_{m,R}) / 2`` to a reference state.
    """
    if alg_l.n != alg_r.n:
        raise DomainError("both parties need the same number of Majoranas")
    P = alg_l.parity
    gl, gr = alg_l.matrices, alg_r.matrices

    def project(psi):
        for m in range(alg_l.n):
            psi = 0.5 * (psi - 1j * (gl[m] @ P) @ psi @ gr[m].T)
        return psi

    d = alg_l.dim
    rng = np.random.default_rng(12345)
    psi = project(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    norm = np.linalg.norm(psi)
    if norm < 1e-8:
        raise DegeneracyError("annihilator null space is empty")
    psi = psi / norm
    flat = psi.ravel()
    lead = flat[np.argmax(np.abs(flat))]
    psi = psi * (abs(lead) / lead)
    if check:
        rng = np.random.default_rng(0)
        other = project(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        other /= np.linalg.norm(other)
        if abs(abs(np.vdot(psi, other)) - 1.0) > 1e-8:
            raise DegeneracyError("annihilator null space is not one-dimensional")
    return psi


def annihilation_residual(psi: np.ndarray, alg_l: MajoranaAlgebra, alg_r: MajoranaAlgebra) -> float:
    """``max_m || (chi_{m,L} + i chi_{m,R}) |psi> ||``."""
    P = alg_l.parity
    worst = 0.0
    for m in range(alg_l.n):
        out = alg_l.matrices[m] @ psi + 1j * P @ psi @ alg_r.matrices[m].T
        worst = max(worst, float(np.linalg.norm(out)))
    return worst

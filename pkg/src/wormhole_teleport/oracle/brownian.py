"""Brownian SYK couplings and per-slice Hamiltonians for one party.

Couplings are white noise; on a slice of length ``dt`` they are held at a
Gaussian value of variance ``sigma^2 / dt`` where ``sigma^2`` is the
per-unit-time strength:

* ``J_{jkla}``: ``2 J / (M N^2)`` on ``chi_j chi_k chi_l psi_a`` (j<k<l),
* ``V_{ja}``:  ``V / M`` on ``i chi_j psi_a``,

with ``J = 1/4`` and ``V = gamma J``.  The right party uses the same
couplings with the sign of ``V`` flipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from ..model import J_UNIT
from .majorana import MajoranaAlgebra


@dataclass(frozen=True)
class TermLayout:
    """Monomials of the party Hamiltonian; system labels first, then environment."""

    n_sys: int
    m_env: int

    @cached_property
    def quartic(self) -> list[tuple[int, int, int, int]]:
        env = range(self.n_sys, self.n_sys + self.m_env)
        return [(j, k, l, a) for (j, k, l) in combinations(range(self.n_sys), 3) for a in env]

    @cached_property
    def bilinear(self) -> list[tuple[int, int]]:
        env = range(self.n_sys, self.n_sys + self.m_env)
        return [(j, a) for j in range(self.n_sys) for a in env]

    def variances(self, gamma: float) -> tuple[float, float]:
        """Per-unit-time strengths of the quartic and bilinear couplings."""
        if self.m_env == 0:
            return 0.0, 0.0
        J = J_UNIT
        V = gamma * J
        return 2.0 * J / (self.m_env * self.n_sys**2), V / self.m_env


def draw_couplings(layout: TermLayout, gamma: float, dt: float, n_slices: int, rng: np.random.Generator):
    """Piecewise-constant coupling values, shape ``(n_slices, n_terms)`` each."""
    var4, var2 = layout.variances(gamma)
    j4 = rng.normal(0.0, np.sqrt(var4 / dt), size=(n_slices, len(layout.quartic)))
    v2 = rng.normal(0.0, np.sqrt(var2 / dt), size=(n_slices, len(layout.bilinear)))
    return j4, v2


class PartyHamiltonian:
    """Assembles ``h_L`` and ``h_R`` from coupling vectors."""

    def __init__(self, algebra: MajoranaAlgebra, layout: TermLayout):
        self.algebra = algebra
        self.layout = layout
        monos = list(layout.quartic) + list(layout.bilinear)
        phases = [1.0] * len(layout.quartic) + [1j] * len(layout.bilinear)
        self.n4 = len(layout.quartic)
        d = algebra.dim
        if monos:
            self._idx, self._vals = algebra.scatter_table(monos, phases)
        else:
            self._idx = np.zeros((0, d), dtype=np.int64)
            self._vals = np.zeros((0, d), dtype=complex)

    def _assemble(self, weights: np.ndarray) -> np.ndarray:
        d = self.algebra.dim
        if len(weights) == 0:
            return np.zeros((d, d), dtype=complex)
        w = weights[:, None] * self._vals
        flat_idx = self._idx.ravel()
        re = np.bincount(flat_idx, weights=w.real.ravel(), minlength=d * d)
        im = np.bincount(flat_idx, weights=w.imag.ravel(), minlength=d * d)
        return (re + 1j * im).reshape(d, d)

    def left(self, j4: np.ndarray, v2: np.ndarray) -> np.ndarray:
        return self._assemble(np.concatenate([j4, v2]))

    def right(self, j4: np.ndarray, v2: np.ndarray) -> np.ndarray:
        return self._assemble(np.concatenate([j4, -v2]))


def slice_unitary(h: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i h tau)`` for Hermitian ``h`` via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * tau * w)) @ v.conj().T

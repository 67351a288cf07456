"""Truncated product basis |n1, n2, m_a, m_b> and the elementary operators on it.

Each atomic chain is treated as a single collective spin of fixed length
j = N_chain/2 (the dynamics never leaves the symmetric sector, see the
model module), and each cavity as a Fock ladder truncated at n_ph photons.
Basis states are ordered lexicographically in (n1, n2, m_a, m_b), and the
magnetic quantum numbers are stored internally as the integer 2m so the
index arithmetic is exact for odd atom counts.

All operators are returned as scipy CSR matrices with complex128 entries.
Ladder and creation operators are raw (non-Hermitian) matrices; Hermitian
combinations such as S^x are assembled from them in the model module.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import CutoffError, ValidationError


class BasisState(NamedTuple):
    """One product basis state; m_a, m_b are half-integers stored as floats."""

    n1: int
    n2: int
    m_a: float
    m_b: float


class BasisSet:
    """Enumeration of the truncated basis for a given parameter set.

    The index map is pure arithmetic: with i_a = m_a + j_a and
    i_b = m_b + j_b counted in integer steps,

        index = ((n1 * (n_ph+1) + n2) * (n_a+1) + i_a) * (n_b+1) + i_b

    which is a bijection onto [0, dimension).
    """

    def __init__(self, params):
        n_a, n_b, n_ph = params.n_a, params.n_b, params.n_ph
        if n_a < 1 or n_b < 1:
            raise ValidationError(f"atom counts must be >= 1, got n_a={n_a}, n_b={n_b}")
        if n_ph < max(n_a, n_b):
            raise CutoffError(
                f"photon cutoff n_ph={n_ph} below initial photon number "
                f"max(n_a, n_b)={max(n_a, n_b)}"
            )
        self.params = params
        self.n_a = int(n_a)
        self.n_b = int(n_b)
        self.n_ph = int(n_ph)
        self.dimension = (n_ph + 1) ** 2 * (n_a + 1) * (n_b + 1)

        # strides of the lexicographic index in (n1, n2, i_a, i_b)
        self._s_n2 = (n_a + 1) * (n_b + 1)
        self._s_n1 = (n_ph + 1) * self._s_n2
        self._s_ma = n_b + 1

        idx = np.arange(self.dimension)
        self.n1 = idx // self._s_n1
        self.n2 = (idx // self._s_n2) % (n_ph + 1)
        i_a = (idx // self._s_ma) % (n_a + 1)
        i_b = idx % (n_b + 1)
        self.two_m_a = 2 * i_a - n_a
        self.two_m_b = 2 * i_b - n_b

    @property
    def j_a(self) -> float:
        return self.n_a / 2.0

    @property
    def j_b(self) -> float:
        return self.n_b / 2.0

    @property
    def m_a(self) -> np.ndarray:
        return self.two_m_a / 2.0

    @property
    def m_b(self) -> np.ndarray:
        return self.two_m_b / 2.0

    def __len__(self) -> int:
        return self.dimension

    def index_of(self, n1: int, n2: int, m_a: float, m_b: float) -> int:
        two_ma = round(2 * m_a)
        two_mb = round(2 * m_b)
        if not (0 <= n1 <= self.n_ph and 0 <= n2 <= self.n_ph):
            raise ValidationError(f"photon numbers ({n1}, {n2}) outside [0, {self.n_ph}]")
        if abs(two_ma) > self.n_a or (two_ma + self.n_a) % 2:
            raise ValidationError(f"m_a={m_a} not a valid projection for {self.n_a} atoms")
        if abs(two_mb) > self.n_b or (two_mb + self.n_b) % 2:
            raise ValidationError(f"m_b={m_b} not a valid projection for {self.n_b} atoms")
        i_a = (two_ma + self.n_a) // 2
        i_b = (two_mb + self.n_b) // 2
        return ((n1 * (self.n_ph + 1) + n2) * (self.n_a + 1) + i_a) * (self.n_b + 1) + i_b

    def state_of(self, index: int) -> BasisState:
        if not 0 <= index < self.dimension:
            raise ValidationError(f"index {index} outside [0, {self.dimension})")
        return BasisState(
            int(self.n1[index]),
            int(self.n2[index]),
            self.two_m_a[index] / 2.0,
            self.two_m_b[index] / 2.0,
        )

    def states(self) -> Iterator[BasisState]:
        """Iterate all basis states in index (lexicographic) order."""
        for i in range(self.dimension):
            yield self.state_of(i)


def build_basis(params) -> BasisSet:
    """Enumerate the truncated basis for `params` (needs n_a, n_b, n_ph)."""
    return BasisSet(params)


def _coo(basis: BasisSet, rows, cols, data) -> sp.csr_matrix:
    m = sp.coo_matrix(
        (np.asarray(data, dtype=np.complex128), (rows, cols)),
        shape=(basis.dimension, basis.dimension),
    )
    return m.tocsr()


def creation_op(basis: BasisSet, cavity: str) -> sp.csr_matrix:
    """Photon creation operator for cavity 'a' or 'b'.

    <n+1|a^dag|n> = sqrt(n+1); columns at the cutoff n = n_ph are zero
    (hard truncation).
    """
    n, stride = _cavity_axis(basis, cavity)
    cols = np.nonzero(n < basis.n_ph)[0]
    rows = cols + stride
    data = np.sqrt(n[cols] + 1.0)
    return _coo(basis, rows, cols, data)


def annihilation_op(basis: BasisSet, cavity: str) -> sp.csr_matrix:
    """Photon annihilation operator: <n-1|a|n> = sqrt(n)."""
    n, stride = _cavity_axis(basis, cavity)
    cols = np.nonzero(n > 0)[0]
    rows = cols - stride
    data = np.sqrt(n[cols].astype(float))
    return _coo(basis, rows, cols, data)


def collective_ladder_op(basis: BasisSet, chain: str, direction: str) -> sp.csr_matrix:
    """Collective raising/lowering operator S^+ or S^- for chain 'a' or 'b'.

    Matrix elements sqrt(j(j+1) - m(m +- 1)) with j fixed at N_chain/2;
    applications past m = +-j vanish.
    """
    two_m, n_chain, stride = _chain_axis(basis, chain)
    j = n_chain / 2.0
    jj1 = j * (j + 1.0)
    if direction == "+":
        cols = np.nonzero(two_m < n_chain)[0]
        m = two_m[cols] / 2.0
        rows = cols + stride
        data = np.sqrt(jj1 - m * (m + 1.0))
    elif direction == "-":
        cols = np.nonzero(two_m > -n_chain)[0]
        m = two_m[cols] / 2.0
        rows = cols - stride
        data = np.sqrt(jj1 - m * (m - 1.0))
    else:
        raise ValidationError(f"direction must be '+' or '-', got {direction!r}")
    return _coo(basis, rows, cols, data)


def collective_z_op(basis: BasisSet, chain: str) -> sp.csr_matrix:
    """Diagonal S^z operator: eigenvalue m per basis state."""
    two_m, _, _ = _chain_axis(basis, chain)
    return sp.diags(two_m / 2.0, dtype=np.complex128, format="csr")


def collective_x_op(basis: BasisSet, chain: str) -> sp.csr_matrix:
    """S^x = (S^+ + S^-)/2, Hermitian by construction."""
    sx = 0.5 * (
        collective_ladder_op(basis, chain, "+") + collective_ladder_op(basis, chain, "-")
    )
    return sx.tocsr()


def _cavity_axis(basis: BasisSet, cavity: str):
    if cavity == "a":
        return basis.n1, basis._s_n1
    if cavity == "b":
        return basis.n2, basis._s_n2
    raise ValidationError(f"cavity must be 'a' or 'b', got {cavity!r}")


def _chain_axis(basis: BasisSet, chain: str):
    if chain == "a":
        return basis.two_m_a, basis.n_a, basis._s_ma
    if chain == "b":
        return basis.two_m_b, basis.n_b, 1
    raise ValidationError(f"chain must be 'a' or 'b', got {chain!r}")


def hermiticity_defect(op: sp.spmatrix) -> float:
    """max |M - M^dag| entrywise; 0.0 for exactly Hermitian operators."""
    d = op - op.conjugate().transpose()
    return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())

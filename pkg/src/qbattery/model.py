"""Physical parameters and assembly of the charging Hamiltonian.

The total Hamiltonian during charging is

    H = H_spin + H_field + theta * H_int

where H_spin holds the two-level atoms (the battery cells) including the
intra-chain atom-atom coupling g, H_field the two cavity modes, and H_int
the spin-cavity couplings g1, g2 (counter-rotating terms kept, no
rotating-wave approximation) plus the inter-chain collective exchange.
theta is the charging switch; only the constant-on window is modelled.

Units: hbar = 1, energies in units of omega_q, times in 1/omega_q.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import hilbert
from .errors import CutoffError, ValidationError
from .hilbert import BasisSet


@dataclass(frozen=True)
class ModelParams:
    """All physical constants of the dual-cavity battery.

    n_a, n_b      atoms per chain
    omega_q       spin transition frequency
    omega_a/b     cavity frequencies (resonant defaults)
    g             intra-chain atom-atom coupling
    g1, g2        spin-cavity couplings
    exchange      inter-chain collective exchange constant
    n_ph          photon cutoff per cavity (hard truncation)
    """

    n_a: int
    n_b: int
    omega_q: float = 1.0
    omega_a: float = 1.0
    omega_b: float = 1.0
    g: float = 0.5
    g1: float = 0.5
    g2: float = 0.5
    exchange: float = 0.5
    n_ph: int = 30

    def __post_init__(self):
        if self.n_a < 1 or self.n_b < 1:
            raise ValidationError(
                f"atom counts must be >= 1, got n_a={self.n_a}, n_b={self.n_b}"
            )
        for name in ("omega_q", "omega_a", "omega_b"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.n_ph < max(self.n_a, self.n_b):
            raise CutoffError(
                f"cutoff below initial photon number: n_ph={self.n_ph} < "
                f"max(n_a, n_b)={max(self.n_a, self.n_b)}"
            )

    @property
    def n_total(self) -> int:
        return self.n_a + self.n_b

    @property
    def j_a(self) -> float:
        return self.n_a / 2.0

    @property
    def j_b(self) -> float:
        return self.n_b / 2.0

    def swapped(self) -> "ModelParams":
        """Relabel the two cavities: (n_a, g1, omega_a) <-> (n_b, g2, omega_b)."""
        return replace(
            self,
            n_a=self.n_b,
            n_b=self.n_a,
            g1=self.g2,
            g2=self.g1,
            omega_a=self.omega_b,
            omega_b=self.omega_a,
        )


@dataclass(frozen=True)
class ChargingProtocol:
    """Constant charging switch over a finite window."""

    theta: int = 1
    duration: float = 50.0

    def __post_init__(self):
        if self.theta not in (0, 1):
            raise ValidationError(f"theta must be 0 or 1, got {self.theta}")
        if self.duration <= 0:
            raise ValidationError(f"duration must be > 0, got {self.duration}")


def build_hq(basis: BasisSet) -> sp.csr_matrix:
    """Atomic-sector Hamiltonian (diagonal in this basis).

    Per state: omega_q (m_a + m_b) plus the intra-chain interaction,
    which in the fixed-j sector reduces to the diagonal
    (g/N) (j(j+1) - m^2 - N/2) for each chain.
    """
    p = basis.params
    diag = p.omega_q * (basis.m_a + basis.m_b)
    return sp.diags(diag, dtype=np.complex128, format="csr") + build_hq_interaction(basis)


def build_hq_interaction(basis: BasisSet) -> sp.csr_matrix:
    """The g-dependent part of the atomic Hamiltonian alone.

    Vanishes identically on the all-ground and fully inverted states
    (m = -+j makes j(j+1) - m^2 - N/2 = 0 exactly), so it contributes
    nothing to the battery capacity.
    """
    p = basis.params
    j_a, j_b = basis.j_a, basis.j_b
    m_a, m_b = basis.m_a, basis.m_b
    diag = (p.g / p.n_a) * (j_a * (j_a + 1.0) - m_a * m_a - p.n_a / 2.0) + (
        p.g / p.n_b
    ) * (j_b * (j_b + 1.0) - m_b * m_b - p.n_b / 2.0)
    return sp.diags(diag, dtype=np.complex128, format="csr")


def build_he(basis: BasisSet) -> sp.csr_matrix:
    """Cavity-field Hamiltonian: omega_a n1 + omega_b n2 (diagonal)."""
    p = basis.params
    diag = p.omega_a * basis.n1 + p.omega_b * basis.n2
    return sp.diags(diag.astype(float), dtype=np.complex128, format="csr")


def build_hi(basis: BasisSet) -> sp.csr_matrix:
    """Charging interaction: spin-cavity couplings plus inter-chain exchange.

    g1 S_a^x (a1^dag + a1) + g2 S_b^x (a2^dag + a2)
      + exchange * (S_a^+ S_b^- + S_b^+ S_a^-)

    Counter-rotating terms are kept, so total excitation number is not
    conserved and the photon cutoff matters.
    """
    p = basis.params
    dim = basis.dimension
    h = sp.csr_matrix((dim, dim), dtype=np.complex128)
    if p.g1 != 0.0:
        x1 = hilbert.creation_op(basis, "a") + hilbert.annihilation_op(basis, "a")
        h = h + p.g1 * (hilbert.collective_x_op(basis, "a") @ x1)
    if p.g2 != 0.0:
        x2 = hilbert.creation_op(basis, "b") + hilbert.annihilation_op(basis, "b")
        h = h + p.g2 * (hilbert.collective_x_op(basis, "b") @ x2)
    if p.exchange != 0.0:
        sap = hilbert.collective_ladder_op(basis, "a", "+")
        sam = hilbert.collective_ladder_op(basis, "a", "-")
        sbp = hilbert.collective_ladder_op(basis, "b", "+")
        sbm = hilbert.collective_ladder_op(basis, "b", "-")
        h = h + p.exchange * (sap @ sbm + sbp @ sam)
    return h.tocsr()


def build_total(basis: BasisSet, protocol: ChargingProtocol | None = None) -> sp.csr_matrix:
    """Full Hamiltonian H_spin + H_field + theta * H_int, exactly Hermitian."""
    if protocol is None:
        protocol = ChargingProtocol()
    h = build_hq(basis) + build_he(basis)
    if protocol.theta:
        h = h + build_hi(basis)
    h = h.tocsr()
    h.sum_duplicates()
    return h


def initial_state(basis: BasisSet) -> np.ndarray:
    """Charging start state: n1 = N_a, n2 = N_b photons, both chains all-ground."""
    psi = np.zeros(basis.dimension, dtype=np.complex128)
    psi[basis.index_of(basis.n_a, basis.n_b, -basis.j_a, -basis.j_b)] = 1.0
    return psi


def fully_inverted_state(basis: BasisSet) -> np.ndarray:
    """Empty cavities, every atom excited; saturates the capacity bound."""
    psi = np.zeros(basis.dimension, dtype=np.complex128)
    psi[basis.index_of(0, 0, basis.j_a, basis.j_b)] = 1.0
    return psi

"""Gaussian-state linear algebra for two bosonic modes.

Covariance matrices are real, symmetric and expressed in shot-noise units
(vacuum quadrature variance = 1) with quadratures ordered
(x_A, p_A, x_B, p_B).  The module provides the symplectic spectrum, the
Heisenberg physicality test, conditioning on a homodyne measurement of
Bob's x quadrature, and the bosonic entropy function, all as pure
functions safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateMeasurement, DomainError, NonPhysicalMatrix

#: Single-mode symplectic form.
OMEGA_SINGLE = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA_SINGLE.setflags(write=False)

#: Two-mode symplectic form, block diagonal in the mode ordering above.
OMEGA = np.kron(np.eye(2), OMEGA_SINGLE)
OMEGA.setflags(write=False)

#: Tolerance on symplectic eigenvalues / Heisenberg eigenvalues.  States on
#: the physicality boundary must pass the test despite roundoff.
SYMPLECTIC_TOL = 1e-9

#: Relative symmetry tolerance accepted by the covariance constructors.
SYMMETRY_RTOL = 1e-12

#: Variances below this threshold are treated as exactly zero when
#: pseudo-inverting the measured quadrature block.
PINV_THRESHOLD = 1e-12

#: Relative discriminant floor below which the two symplectic eigenvalues
#: are reported as equal (see symplectic_eigenvalues).
_DEGENERACY_FLOOR = 1e-11

LOG2_E = math.log2(math.e)


def _det2(m: np.ndarray) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(frozen=True)
class TwoModeCovariance:
    """4x4 covariance matrix of a two-mode Gaussian state in SNU.

    The constructor symmetrises tiny roundoff and rejects matrices that
    are not symmetric within ``SYMMETRY_RTOL``.  The stored array is
    read-only; covariance values are immutable once created.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise DomainError(f"covariance matrix must be 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("covariance matrix entries must be finite")
        if not np.allclose(m, m.T, rtol=SYMMETRY_RTOL, atol=SYMMETRY_RTOL):
            raise DomainError("covariance matrix must be symmetric within 1e-12")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def alice_block(self) -> np.ndarray:
        """2x2 covariance of mode A."""
        return self.matrix[:2, :2]

    @property
    def bob_block(self) -> np.ndarray:
        """2x2 covariance of mode B."""
        return self.matrix[2:, 2:]

    @property
    def cross_block(self) -> np.ndarray:
        """2x2 A-B correlation block."""
        return self.matrix[:2, 2:]


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalue pair, sorted descending.

    Physical states have both eigenvalues >= 1 up to ``SYMPLECTIC_TOL``;
    unphysical inputs yield smaller values rather than an error so that
    callers can diagnose them.
    """

    nu1: float
    nu2: float

    def __post_init__(self) -> None:
        if self.nu2 > self.nu1:
            raise DomainError("symplectic eigenvalues must be sorted descending")

    def __iter__(self) -> Iterator[float]:
        return iter((self.nu1, self.nu2))


@dataclass(frozen=True)
class ConditionalCovariance:
    """2x2 covariance of mode A after a homodyne measurement on mode B."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise DomainError(f"conditional covariance must be 2x2, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=SYMMETRY_RTOL, atol=SYMMETRY_RTOL):
            raise DomainError("conditional covariance must be symmetric")
        if m[0, 0] <= 0.0 or m[1, 1] <= 0.0 or _det2(m) <= 0.0:
            raise NonPhysicalMatrix("conditional covariance must be positive definite")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def lambda_cond(self) -> float:
        """Symplectic eigenvalue of the one-mode conditional state."""
        return math.sqrt(_det2(self.matrix))


def symplectic_eigenvalues(gamma: TwoModeCovariance) -> SymplecticSpectrum:
    """Symplectic spectrum from the two-mode invariants.

    Solves z^2 - Delta z + det(gamma) = 0, where Delta is the sum of the
    determinants of the single-mode blocks plus twice the determinant of
    the correlation block, and returns the square roots of the solutions
    sorted descending.  Small negative discriminants (degenerate spectra
    hit by roundoff) are clamped to zero; negative determinants or
    invariants beyond tolerance raise :class:`NonPhysicalMatrix`.
    """
    m = gamma.matrix
    delta = _det2(gamma.alice_block) + _det2(gamma.bob_block) + 2.0 * _det2(gamma.cross_block)
    det_g = float(np.linalg.det(m))
    if det_g < -SYMPLECTIC_TOL:
        raise NonPhysicalMatrix(f"covariance determinant is negative ({det_g})")
    if delta < -SYMPLECTIC_TOL:
        raise NonPhysicalMatrix(f"second symplectic invariant is negative ({delta})")
    disc = delta * delta - 4.0 * det_g
    # Roundoff in the discriminant scales with the invariants themselves; a
    # discriminant below that scale means a numerically degenerate spectrum
    # (pure states in particular), where sqrt(disc) would amplify roundoff
    # to sqrt(machine epsilon).
    scale = max(1.0, delta * delta, abs(4.0 * det_g))
    if disc < -SYMPLECTIC_TOL * scale:
        raise NonPhysicalMatrix(
            f"invariant equation has complex roots (discriminant {disc})"
        )
    if disc < _DEGENERACY_FLOOR * scale:
        disc = 0.0
    z_plus = 0.5 * (delta + math.sqrt(disc))
    # z_minus = det/z_plus avoids the cancellation in 0.5*(delta - sqrt(disc)).
    z_minus = det_g / z_plus if z_plus > 0.0 else 0.0
    nu_a = math.sqrt(max(z_plus, 0.0))
    nu_b = math.sqrt(max(z_minus, 0.0))
    if nu_b > nu_a:
        nu_a, nu_b = nu_b, nu_a
    return SymplecticSpectrum(nu_a, nu_b)


def symplectic_eigenvalues_generic(gamma: TwoModeCovariance) -> SymplecticSpectrum:
    """Symplectic spectrum as |eigenvalues| of i*Omega*gamma.

    Generic route used to cross-validate :func:`symplectic_eigenvalues`;
    the two methods agree within 1e-8 on physical inputs.
    """
    mods = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ gamma.matrix)))
    return SymplecticSpectrum(float(mods[3]), float(mods[1]))


def is_physical(gamma: TwoModeCovariance) -> bool:
    """Heisenberg physicality test: gamma + i*Omega >= 0.

    True iff the smallest eigenvalue of the Hermitian matrix
    gamma + i*Omega is >= -SYMPLECTIC_TOL, which is equivalent to both
    symplectic eigenvalues being >= 1 - SYMPLECTIC_TOL.
    """
    herm = gamma.matrix.astype(complex) + 1j * OMEGA
    return bool(np.linalg.eigvalsh(herm)[0] >= -SYMPLECTIC_TOL)


def _x_projected_pseudoinverse(bob: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse of diag(v, 0) where v is Bob's x variance."""
    v = float(bob[0, 0])
    pinv = np.zeros((2, 2))
    if v > PINV_THRESHOLD:
        pinv[0, 0] = 1.0 / v
    return pinv


def condition_on_x_homodyne(gamma: TwoModeCovariance) -> ConditionalCovariance:
    """Covariance of mode A conditioned on an x homodyne of mode B.

    Returns gamma_A - sigma_AB (X gamma_B X)^+ sigma_AB^T with
    X = diag(1, 0).  The projected block diag(v, 0) is pseudo-inverted to
    diag(1/v, 0) for v above ``PINV_THRESHOLD``; a vanishing measured
    variance is flagged as :class:`DegenerateMeasurement` rather than
    silently inverted.
    """
    bob = gamma.bob_block
    if float(bob[0, 0]) < PINV_THRESHOLD:
        raise DegenerateMeasurement(
            f"Bob x variance {bob[0, 0]} is below the pseudoinverse threshold {PINV_THRESHOLD}"
        )
    cross = gamma.cross_block
    cond = gamma.alice_block - cross @ _x_projected_pseudoinverse(bob) @ cross.T
    return ConditionalCovariance(cond)


def bosonic_entropy(x: float) -> float:
    """Entropy (x+1)log2(x+1) - x log2 x of a thermal mode, in bits.

    Defined for x >= 0 with the continuous limit G(0) = 0; inputs within
    -1e-12 of zero are clamped, anything lower raises DomainError.
    """
    x = float(x)
    if x < -1e-12:
        raise DomainError(f"bosonic entropy argument must be >= 0, got {x}")
    if x <= 0.0:
        return 0.0
    if x <= 1.0:
        return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)
    # x log2(1 + 1/x) + log2(x + 1) avoids the large-x cancellation of the
    # difference form above.
    return (x * math.log1p(1.0 / x) + math.log1p(x)) / math.log(2.0)

"""Protocol models: covariance constructors and physicality constraints.

Covers the single-quadrature-modulated (unidimensional, UD) coherent-state
protocol in its pessimistic, optimistic and p-estimated flavours, plus the
symmetric two-quadrature coherent-state baseline (GG02).  All constructors
are pure and return immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, EmptyRegion
from .symplectic import TwoModeCovariance


class Variant(str, Enum):
    """Protocol / evaluation-rule selector.

    UD_PESSIMISTIC minimises the rate over every physical correlation,
    UD_OPTIMISTIC_CP_MAX evaluates at the physicality boundary,
    UD_P_ESTIMATED assumes the p-quadrature channel was estimated, and
    GG02 is the symmetric-modulation baseline.
    """

    UD_PESSIMISTIC = "ud-pessimistic"
    UD_OPTIMISTIC_CP_MAX = "ud-optimistic"
    UD_P_ESTIMATED = "ud-estimated"
    GG02 = "gg02"


@dataclass(frozen=True)
class ProtocolConfig:
    """Source-side configuration: modulation variance and variant."""

    modulation_variance: float
    variant: Variant = Variant.UD_PESSIMISTIC

    def __post_init__(self) -> None:
        if not (self.modulation_variance > 0.0) or not math.isfinite(self.modulation_variance):
            raise DomainError(
                f"modulation_variance must be > 0, got {self.modulation_variance}"
            )
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def epr_variance(self) -> float:
        """Variance V = sqrt(1 + V_M) of the equivalent two-mode squeezed source."""
        return math.sqrt(1.0 + self.modulation_variance)


@dataclass(frozen=True)
class ChannelParams:
    """Per-quadrature transmittances and excess noises (noise at channel input)."""

    eta_x: float
    eps_x: float
    eta_p: float = 1.0
    eps_p: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_x", "eta_p"):
            eta = getattr(self, name)
            if not (0.0 < eta <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {eta}")
        for name in ("eps_x", "eps_p"):
            eps = getattr(self, name)
            if not (eps >= 0.0) or not math.isfinite(eps):
                raise DomainError(f"{name} must be >= 0, got {eps}")

    @classmethod
    def symmetric(cls, eta: float, eps: float) -> "ChannelParams":
        """Phase-insensitive channel with equal loss and noise in x and p."""
        return cls(eta_x=eta, eps_x=eps, eta_p=eta, eps_p=eps)

    @classmethod
    def symmetric_from_loss_db(cls, loss_db: float, eps: float) -> "ChannelParams":
        return cls.symmetric(transmittance_from_loss_db(loss_db), eps)


def transmittance_from_loss_db(loss_db: float) -> float:
    """Transmittance for a channel loss given in dB (loss_db = -10 log10 eta)."""
    if loss_db < 0.0:
        raise DomainError(f"loss_db must be >= 0, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def loss_db_from_transmittance(eta: float) -> float:
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    return -10.0 * math.log10(eta)


@dataclass(frozen=True)
class PQuadObservation:
    """Measured p-quadrature output variance and (optionally) correlation.

    ``c_p`` is None while the correlation is unknown, which is the default
    situation for the UD protocol; callers resolve it through the
    physicality parabola or through channel estimation before any key-rate
    evaluation.
    """

    v_p_b: float
    c_p: float | None = None

    def __post_init__(self) -> None:
        if not (self.v_p_b > 0.0) or not math.isfinite(self.v_p_b):
            raise DomainError(f"v_p_b must be a positive variance, got {self.v_p_b}")


@dataclass(frozen=True)
class PhysicalityParabola:
    """Heisenberg bound on the unknown correlation in the (V_p^B, C_p) plane.

    Physical points satisfy (c_p - c0)^2 <= curvature * (v_p_b - v0); the
    vertex (v0, c0) is the unique physical point at the smallest allowed
    output variance.
    """

    v0: float
    c0: float
    curvature: float

    def half_width(self, v_p_b: float) -> float:
        """Half-length of the physical C_p interval at the given variance."""
        gap = v_p_b - self.v0
        if gap < -1e-12:
            raise EmptyRegion(
                f"v_p_b={v_p_b} lies below the parabola vertex v0={self.v0}; "
                "no physical correlation exists"
            )
        return math.sqrt(max(self.curvature * gap, 0.0))

    def c_p_range(self, v_p_b: float) -> tuple[float, float]:
        """Closed interval [c0 - w, c0 + w] of physically allowed correlations."""
        w = self.half_width(v_p_b)
        return (self.c0 - w, self.c0 + w)

    def c_p_max(self, v_p_b: float) -> float:
        """Largest physically allowed correlation (upper edge of the interval)."""
        return self.c0 + self.half_width(v_p_b)

    def contains(self, v_p_b: float, c_p: float, tol: float = 0.0) -> bool:
        """Membership test with an explicit tolerance on the quadratic margin."""
        return (c_p - self.c0) ** 2 - self.curvature * (v_p_b - self.v0) <= tol


def build_epr_input(config: ProtocolConfig) -> TwoModeCovariance:
    """Two-mode state equivalent to x-only Gaussian displacement of coherent states.

    A two-mode squeezed vacuum of variance V = sqrt(1 + V_M) with mode B
    squeezed by -log sqrt(V); an x homodyne on mode A then prepares
    coherent states displaced in x with variance V_M.  Pure by
    construction (both symplectic eigenvalues equal 1).
    """
    v = config.epr_variance
    cx = math.sqrt(v * (v * v - 1.0))
    cp = -math.sqrt((v * v - 1.0) / v)
    return TwoModeCovariance(np.array([
        [v, 0.0, cx, 0.0],
        [0.0, v, 0.0, cp],
        [cx, 0.0, v * v, 0.0],
        [0.0, cp, 0.0, 1.0],
    ]))


def ud_output_entries(config: ProtocolConfig, channel: ChannelParams) -> tuple[float, float, float]:
    """Scalar entries (a, c_x, b_x) of the UD output matrix fixed by the x channel.

    a is Alice's diagonal sqrt(1 + V_M), c_x the x correlation
    sqrt(eta_x V_M) (1 + V_M)^(1/4) and b_x Bob's x variance
    1 + eta_x (V_M + eps_x).
    """
    vm = config.modulation_variance
    a = math.sqrt(1.0 + vm)
    c_x = math.sqrt(channel.eta_x * vm) * (1.0 + vm) ** 0.25
    b_x = 1.0 + channel.eta_x * (vm + channel.eps_x)
    return a, c_x, b_x


def ud_channel_output(
    config: ProtocolConfig, channel: ChannelParams, obs: PQuadObservation
) -> TwoModeCovariance:
    """Shared two-mode state after the channel, for a concrete correlation C_p.

    The x block is fixed by the estimated channel; the p block carries the
    measured output variance and the supplied correlation value.
    """
    if obs.c_p is None:
        raise DomainError(
            "c_p is unknown; resolve it via the physicality parabola or channel "
            "estimation before building the output state"
        )
    a, c_x, b_x = ud_output_entries(config, channel)
    return TwoModeCovariance(np.array([
        [a, 0.0, c_x, 0.0],
        [0.0, a, 0.0, obs.c_p],
        [c_x, 0.0, b_x, 0.0],
        [0.0, obs.c_p, 0.0, obs.v_p_b],
    ]))


def physicality_parabola(config: ProtocolConfig, channel: ChannelParams) -> PhysicalityParabola:
    """Physicality constraint on (V_p^B, C_p) induced by the estimated x channel.

    Vertex v0 = 1/(1 + eta_x eps_x), c0 = -v0 sqrt(eta_x V_M)/(1+V_M)^(1/4),
    curvature V_M (1+V_M)^(-1/2) (1 - eta_x v0).  Saturating the bound is
    equivalent to the output state saturating the uncertainty relation.
    """
    vm = config.modulation_variance
    v0 = 1.0 / (1.0 + channel.eta_x * channel.eps_x)
    c0 = -v0 * math.sqrt(channel.eta_x * vm) / (1.0 + vm) ** 0.25
    curvature = vm / math.sqrt(1.0 + vm) * (1.0 - channel.eta_x * v0)
    return PhysicalityParabola(v0=v0, c0=c0, curvature=curvature)


def estimated_c_p(config: ProtocolConfig, channel: ChannelParams) -> float:
    """Correlation inferred when the p channel transmittance is estimated.

    Scales the identity-channel correlation by sqrt(eta_p); together with
    the measured variance 1 + eta_p eps_p this point lies inside the
    physicality parabola for symmetric channels, strictly so once either
    quadrature carries excess noise.
    """
    vm = config.modulation_variance
    return -math.sqrt(channel.eta_p * vm) / (1.0 + vm) ** 0.25


def gg02_output(config: ProtocolConfig, channel: ChannelParams) -> TwoModeCovariance:
    """Two-mode state of the symmetric coherent-state baseline after the channel.

    Entanglement-based picture of two-quadrature Gaussian modulation with
    variance V_M per quadrature: source variance W = V_M + 1 per mode,
    correlations +-sqrt(eta (W^2 - 1)) and output variances
    1 + eta_q (V_M + eps_q).  Its x-homodyne conditioning and Holevo bound
    reproduce the baseline collective-attack rate.
    """
    vm = config.modulation_variance
    w = vm + 1.0
    corr = w * w - 1.0
    cx = math.sqrt(channel.eta_x * corr)
    cp = math.sqrt(channel.eta_p * corr)
    bx = 1.0 + channel.eta_x * (vm + channel.eps_x)
    bp = 1.0 + channel.eta_p * (vm + channel.eps_p)
    return TwoModeCovariance(np.array([
        [w, 0.0, cx, 0.0],
        [0.0, w, 0.0, -cp],
        [cx, 0.0, bx, 0.0],
        [0.0, -cp, 0.0, bp],
    ]))

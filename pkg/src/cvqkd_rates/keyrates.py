"""Key-rate engine: mutual information, Holevo bounds and worst-case search.

All rates are in bits per channel use.  Negative key rates are reported
as-is so that callers can locate security boundaries by sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPhysicalMatrix
from .protocols import (
    ChannelParams,
    PQuadObservation,
    ProtocolConfig,
    Variant,
    estimated_c_p,
    gg02_output,
    physicality_parabola,
    ud_channel_output,
    ud_output_entries,
)
from .symplectic import (
    LOG2_E,
    SYMPLECTIC_TOL,
    TwoModeCovariance,
    bosonic_entropy,
    condition_on_x_homodyne,
    symplectic_eigenvalues,
)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class KeyRateResult:
    """Lower bound on the collective-attack key rate and its ingredients.

    ``key_rate`` always equals ``i_ab - chi_be``; ``c_p_evaluated`` records
    the p correlation at which the bound was taken and ``worst_case``
    whether that value came from a pessimistic search.
    """

    i_ab: float
    chi_be: float
    key_rate: float
    c_p_evaluated: float
    worst_case: bool


@dataclass(frozen=True)
class SearchSettings:
    """Knobs of the pessimistic-correlation search.

    The scan grid must be odd so the parabola vertex (interval midpoint)
    is always sampled; refinement then narrows the bracket around the grid
    minimum to ``refine_tol`` in C_p.
    """

    grid_points: int = 2001
    refine_tol: float = 1e-10
    v_m_large: float = 1e6

    def __post_init__(self) -> None:
        if self.grid_points < 101:
            raise DomainError(f"grid_points must be >= 101, got {self.grid_points}")
        if self.grid_points % 2 == 0:
            raise DomainError(f"grid_points must be odd, got {self.grid_points}")
        if not (self.refine_tol > 0.0):
            raise DomainError(f"refine_tol must be > 0, got {self.refine_tol}")
        if not (self.v_m_large > 0.0):
            raise DomainError(f"v_m_large must be > 0, got {self.v_m_large}")


def mutual_information(config: ProtocolConfig, channel: ChannelParams) -> float:
    """Shannon information of the x-quadrature data between the trusted parties.

    (1/2) log2(1 + eta_x V_M / (1 + eta_x eps_x)); identical to
    (1/2) log2(V_A / V_A|B) read off the shared-state matrix entries.
    """
    vm = config.modulation_variance
    return 0.5 * math.log2(1.0 + channel.eta_x * vm / (1.0 + channel.eta_x * channel.eps_x))


def holevo_bound(gamma: TwoModeCovariance) -> float:
    """Holevo bound on an eavesdropper's information about Bob's x data.

    Assumes the eavesdropper purifies the shared state, so
    chi = G((nu1-1)/2) + G((nu2-1)/2) - G((lambda_cond-1)/2) with nu from
    the two-mode spectrum and lambda_cond from the state conditioned on
    Bob's x homodyne.  Eigenvalues within ``SYMPLECTIC_TOL`` below 1 are
    clamped; anything lower means the input was unphysical.
    """
    spectrum = symplectic_eigenvalues(gamma)
    lam_cond = condition_on_x_homodyne(gamma).lambda_cond
    for name, nu in (("nu2", spectrum.nu2), ("lambda_cond", lam_cond)):
        if nu < 1.0 - SYMPLECTIC_TOL:
            raise NonPhysicalMatrix(
                f"symplectic eigenvalue {name}={nu} is below 1; state is unphysical"
            )
    return (
        bosonic_entropy(0.5 * (max(spectrum.nu1, 1.0) - 1.0))
        + bosonic_entropy(0.5 * (max(spectrum.nu2, 1.0) - 1.0))
        - bosonic_entropy(0.5 * (max(lam_cond, 1.0) - 1.0))
    )


def key_rate_at(
    config: ProtocolConfig,
    channel: ChannelParams,
    obs: PQuadObservation,
    beta: float = 1.0,
) -> KeyRateResult:
    """Key-rate lower bound at a concrete (V_p^B, C_p) point.

    ``beta`` multiplies the mutual information (reconciliation efficiency);
    it defaults to 1 and the reported ``i_ab`` is the multiplied value so
    that ``key_rate == i_ab - chi_be`` holds exactly.
    """
    if obs.c_p is None:
        raise DomainError("key_rate_at needs a concrete c_p value")
    gamma = ud_channel_output(config, channel, obs)
    i_ab = beta * mutual_information(config, channel)
    chi = holevo_bound(gamma)
    return KeyRateResult(
        i_ab=i_ab,
        chi_be=chi,
        key_rate=i_ab - chi,
        c_p_evaluated=float(obs.c_p),
        worst_case=False,
    )


def _g_array(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    small = (x > 0.0) & (x <= 1.0)
    xs = x[small]
    out[small] = (xs + 1.0) * np.log2(xs + 1.0) - xs * np.log2(xs)
    large = x > 1.0
    xl = x[large]
    out[large] = (xl * np.log1p(1.0 / xl) + np.log1p(xl)) / math.log(2.0)
    return out


def key_rate_curve(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b: float,
    c_p_values: np.ndarray,
    beta: float = 1.0,
) -> np.ndarray:
    """Vectorised key rate over an array of correlation values.

    Uses the closed-form invariants of the shared-state matrix (the block
    determinants reduce algebraically), so it is both faster and better
    conditioned than assembling matrices point by point; agreement with
    :func:`key_rate_at` is within 1e-10.  All points must be physical.
    """
    cps = np.asarray(c_p_values, dtype=float)
    a, c_x, b_x = ud_output_entries(config, channel)
    s = 1.0 + channel.eta_x * channel.eps_x
    det_x = a * s  # a*b_x - c_x^2 without the cancellation
    det_p = a * v_p_b - cps * cps
    det_g = det_x * det_p
    delta = a * a + b_x * v_p_b + 2.0 * c_x * cps
    disc = np.maximum(delta * delta - 4.0 * det_g, 0.0)
    z_plus = 0.5 * (delta + np.sqrt(disc))
    z_minus = np.where(z_plus > 0.0, det_g / np.where(z_plus > 0.0, z_plus, 1.0), 0.0)
    nu_hi = np.sqrt(np.maximum(np.maximum(z_plus, z_minus), 0.0))
    nu_lo = np.sqrt(np.maximum(np.minimum(z_plus, z_minus), 0.0))
    if nu_lo.size and float(nu_lo.min()) < 1.0 - SYMPLECTIC_TOL:
        raise NonPhysicalMatrix(
            f"correlation grid leaves the physical region (min nu = {float(nu_lo.min())})"
        )
    lam_cond = a * math.sqrt(s / b_x)
    chi = (
        _g_array(0.5 * (np.maximum(nu_hi, 1.0) - 1.0))
        + _g_array(0.5 * (np.maximum(nu_lo, 1.0) - 1.0))
        - bosonic_entropy(0.5 * (max(lam_cond, 1.0) - 1.0))
    )
    return beta * mutual_information(config, channel) - chi


def _golden_section_min(f, lo: float, hi: float, xtol: float) -> float:
    """Deterministic golden-section minimiser on [lo, hi]."""
    a, b = float(lo), float(hi)
    if b - a <= xtol:
        return 0.5 * (a + b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:  # ties move to the lower-C_p side
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def worst_case_key_rate(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b: float,
    settings: SearchSettings | None = None,
    beta: float = 1.0,
) -> KeyRateResult:
    """Pessimistic key rate: minimum over every physical correlation.

    Scans the full physical interval on a dense grid (the rate can be
    multi-modal, so a pure line search is not safe), then refines locally
    by golden section.  Deterministic: fixed grid, argmin ties resolved
    toward the lowest C_p.
    """
    settings = settings if settings is not None else SearchSettings()
    parabola = physicality_parabola(config, channel)
    c_lo, c_hi = parabola.c_p_range(v_p_b)
    if c_hi - c_lo <= settings.refine_tol:
        point = key_rate_at(config, channel, PQuadObservation(v_p_b, parabola.c0), beta)
        return KeyRateResult(
            i_ab=point.i_ab,
            chi_be=point.chi_be,
            key_rate=point.key_rate,
            c_p_evaluated=point.c_p_evaluated,
            worst_case=True,
        )
    grid = np.linspace(c_lo, c_hi, settings.grid_points)
    rates = key_rate_curve(config, channel, v_p_b, grid, beta)
    idx = int(np.argmin(rates))

    def rate_at(c: float) -> float:
        return float(key_rate_curve(config, channel, v_p_b, np.array([c]), beta)[0])

    bracket_lo = float(grid[max(idx - 1, 0)])
    bracket_hi = float(grid[min(idx + 1, settings.grid_points - 1)])
    refined = _golden_section_min(rate_at, bracket_lo, bracket_hi, settings.refine_tol)
    candidates = [(float(grid[idx]), float(rates[idx])), (refined, rate_at(refined))]
    candidates.sort(key=lambda item: (item[1], item[0]))
    c_star = candidates[0][0]
    point = key_rate_at(config, channel, PQuadObservation(v_p_b, c_star), beta)
    return KeyRateResult(
        i_ab=point.i_ab,
        chi_be=point.chi_be,
        key_rate=point.key_rate,
        c_p_evaluated=c_star,
        worst_case=True,
    )


def gg02_key_rate(
    config: ProtocolConfig, channel: ChannelParams, beta: float = 1.0
) -> KeyRateResult:
    """Collective-attack rate of the symmetric baseline, same pipeline.

    Output state -> x-homodyne conditioning -> Holevo bound -> difference
    with the mutual information.  ``c_p_evaluated`` reports the p
    correlation entry of the baseline state (known, not searched).
    """
    gamma = gg02_output(config, channel)
    i_ab = beta * mutual_information(config, channel)
    chi = holevo_bound(gamma)
    return KeyRateResult(
        i_ab=i_ab,
        chi_be=chi,
        key_rate=i_ab - chi,
        c_p_evaluated=float(gamma.matrix[1, 3]),
        worst_case=False,
    )


def protocol_key_rate(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b: float | None = None,
    settings: SearchSettings | None = None,
    beta: float = 1.0,
) -> KeyRateResult:
    """Dispatch on ``config.variant``.

    When ``v_p_b`` is omitted it defaults to 1 + eta_p eps_p, the output
    variance of a phase-insensitive channel with the configured p side.
    """
    if v_p_b is None:
        v_p_b = 1.0 + channel.eta_p * channel.eps_p
    variant = config.variant
    if variant is Variant.GG02:
        return gg02_key_rate(config, channel, beta)
    if variant is Variant.UD_PESSIMISTIC:
        return worst_case_key_rate(config, channel, v_p_b, settings, beta)
    if variant is Variant.UD_OPTIMISTIC_CP_MAX:
        c_p = physicality_parabola(config, channel).c_p_max(v_p_b)
        return key_rate_at(config, channel, PQuadObservation(v_p_b, c_p), beta)
    if variant is Variant.UD_P_ESTIMATED:
        c_p = estimated_c_p(config, channel)
        return key_rate_at(config, channel, PQuadObservation(v_p_b, c_p), beta)
    raise DomainError(f"unknown variant {variant!r}")


def _physicality_gap(channel: ChannelParams, v_p_b: float) -> float:
    """Common discriminant eta_x (1 + eta_x eps_x - eta_x)(v_p_b (1 + eta_x eps_x) - 1)."""
    s = 1.0 + channel.eta_x * channel.eps_x
    return channel.eta_x * (s - channel.eta_x) * (v_p_b * s - 1.0)


def asymptotic_key_rate_strong_modulation(channel: ChannelParams, v_p_b: float) -> float:
    """Closed form of the boundary-correlation rate in the strong-modulation limit.

    An upper bound on the pessimistic rate; tight when the boundary value
    is indeed the worst correlation (low channel noise).
    """
    eta, eps = channel.eta_x, channel.eps_x
    d = max(_physicality_gap(channel, v_p_b), 0.0)
    denom = 1.0 - 2.0 * eta + eta * v_p_b + eta * eps + 2.0 * math.sqrt(d)
    if denom <= 0.0:
        raise DomainError(
            f"strong-modulation form diverges (denominator {denom}); "
            "the rate is unbounded at these parameters"
        )
    return (
        0.5 * math.log2(eta / denom)
        - (LOG2_E - 1.0)
        + bosonic_entropy(0.5 * (math.sqrt(1.0 / eta + eps) - 1.0))
    )


def asymptotic_key_rate_strong_loss(channel: ChannelParams, v_p_b: float) -> float:
    """Strong-modulation rate further expanded for eta_x << 1 and V_p^B near 1."""
    eta = channel.eta_x
    d = max(_physicality_gap(channel, v_p_b), 0.0)
    return ((1.0 / 3.0 + 0.5 * (1.0 - v_p_b)) * eta - math.sqrt(d)) * LOG2_E


def ud_noiseless_exact(eta: float) -> float:
    """Strong-modulation rate of the UD protocol on a pure-loss channel.

    (1/(2 sqrt(eta))) log2((1 + sqrt(eta))/(1 - sqrt(eta))) - log2 e,
    valid for 0 < eta < 1; the expression is singular at eta = 1.
    """
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta must lie strictly inside (0, 1), got {eta}")
    root = math.sqrt(eta)
    return (0.5 / root) * math.log2((1.0 + root) / (1.0 - root)) - LOG2_E

"""Figure-level solvers: security regions, loss sweeps and noise thresholds."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._pool import map_ordered
from .errors import DomainError, EmptyRegion, NoPositiveRate
from .keyrates import (
    SearchSettings,
    key_rate_curve,
    protocol_key_rate,
    worst_case_key_rate,
)
from .protocols import (
    ChannelParams,
    ProtocolConfig,
    Variant,
    physicality_parabola,
    transmittance_from_loss_db,
)

#: Absolute tolerance on the tolerable-noise root (in SNU).
NOISE_EPS_TOL = 1e-5
#: The key rate at the returned noise threshold is this close to zero (bits).
NOISE_RATE_TOL = 1e-6
#: Upper cap of the noise bracketing search (SNU).
NOISE_EPS_CAP = 10.0
#: Tolerance on the secure/physical crossing variance (SNU).
CROSSING_TOL = 1e-6


@dataclass(frozen=True)
class RegionRecord:
    """One output-variance slice: physical interval, secure subsets, worst case."""

    v_p_b: float
    c_lo: float
    c_hi: float
    secure_intervals: tuple[tuple[float, float], ...]
    worst_case_c_p: float
    worst_case_key_rate: float


@dataclass(frozen=True)
class RegionMap:
    """Security-within-physicality map over a range of output variances.

    ``max_secure_v_p_b`` is the variance where the secure and physical
    regions cross (None when the scanned range never crosses).
    """

    records: tuple[RegionRecord, ...]
    max_secure_v_p_b: float | None

    @property
    def v_p_b_axis(self) -> np.ndarray:
        return np.array([record.v_p_b for record in self.records])


@dataclass(frozen=True)
class SweepCurve:
    """Sampled curve over a strictly increasing abscissa."""

    abscissa: np.ndarray
    ordinate: np.ndarray
    label: str

    def __post_init__(self) -> None:
        x = np.array(self.abscissa, dtype=float)
        y = np.array(self.ordinate, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DomainError("abscissa and ordinate must be 1-d arrays of equal length")
        if x.size >= 2 and not np.all(np.diff(x) > 0.0):
            raise DomainError("abscissa must be strictly increasing")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "ordinate", y)


def _bisect_root(f, lo: float, hi: float, xtol: float = 1e-10) -> float:
    """Root of a sign change of f on [lo, hi] by plain bisection."""
    f_lo = f(lo)
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_lo > 0.0) == (f_mid > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _secure_intervals(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b: float,
    c_lo: float,
    c_hi: float,
    resolution: int,
) -> tuple[tuple[float, float], ...]:
    """Sub-intervals of [c_lo, c_hi] on which the key rate is positive."""

    def rate(c: float) -> float:
        return float(key_rate_curve(config, channel, v_p_b, np.array([c]))[0])

    if c_hi - c_lo < 1e-14:
        return ((c_lo, c_hi),) if rate(0.5 * (c_lo + c_hi)) > 0.0 else ()
    grid = np.linspace(c_lo, c_hi, max(resolution, 2))
    rates = key_rate_curve(config, channel, v_p_b, grid)
    positive = rates > 0.0
    intervals: list[tuple[float, float]] = []
    start: float | None = float(grid[0]) if positive[0] else None
    for i in range(len(grid) - 1):
        if positive[i] == positive[i + 1]:
            continue
        crossing = _bisect_root(rate, float(grid[i]), float(grid[i + 1]))
        if positive[i]:
            intervals.append((start, crossing))
            start = None
        else:
            start = crossing
    if start is not None:
        intervals.append((start, float(grid[-1])))
    return tuple(intervals)


def max_secure_v_p_b(
    config: ProtocolConfig,
    channel: ChannelParams,
    settings: SearchSettings | None = None,
    v_p_b_cap: float | None = None,
) -> float | None:
    """Variance where worst-case security is first lost, to ``CROSSING_TOL``.

    The pessimistic rate is non-increasing in the output variance, so the
    crossing is located by doubling then bisection.  Returns None when the
    rate is already non-positive at the vertex or stays positive up to the
    cap (default: vertex + 10 SNU).
    """
    parabola = physicality_parabola(config, channel)
    v0 = parabola.v0
    cap = v_p_b_cap if v_p_b_cap is not None else v0 + 10.0

    def worst(v: float) -> float:
        return worst_case_key_rate(config, channel, v, settings).key_rate

    if worst(v0) <= 0.0:
        return None
    lo = v0
    step = 1e-4
    hi: float | None = None
    while True:
        candidate = v0 + step
        if candidate >= cap:
            if worst(cap) > 0.0:
                return None
            hi = cap
            break
        if worst(candidate) > 0.0:
            lo = candidate
            step *= 2.0
        else:
            hi = candidate
            break
    while hi - lo > CROSSING_TOL:
        mid = 0.5 * (lo + hi)
        if worst(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_region(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b_range: tuple[float, float],
    resolution: int,
    settings: SearchSettings | None = None,
) -> RegionMap:
    """Map physical and secure correlation sets over a variance range.

    The lower edge is clamped to the parabola vertex; a range entirely
    below the vertex raises :class:`EmptyRegion`.  Each slice records the
    physical interval, the K > 0 sub-intervals and the worst case.
    """
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    lo_req, hi_req = float(v_p_b_range[0]), float(v_p_b_range[1])
    if hi_req < lo_req:
        raise DomainError("v_p_b_range must satisfy min <= max")
    parabola = physicality_parabola(config, channel)
    if hi_req < parabola.v0 - 1e-12:
        raise EmptyRegion(
            f"requested range ends at {hi_req}, below the vertex v0={parabola.v0}"
        )
    lo = max(lo_req, parabola.v0)
    axis = np.linspace(lo, hi_req, resolution)

    def slice_at(v: float) -> RegionRecord:
        c_lo, c_hi = parabola.c_p_range(v)
        worst = worst_case_key_rate(config, channel, v, settings)
        secure = _secure_intervals(config, channel, v, c_lo, c_hi, resolution)
        return RegionRecord(
            v_p_b=float(v),
            c_lo=c_lo,
            c_hi=c_hi,
            secure_intervals=secure,
            worst_case_c_p=worst.c_p_evaluated,
            worst_case_key_rate=worst.key_rate,
        )

    records = tuple(map_ordered(slice_at, axis))
    crossing = max_secure_v_p_b(config, channel, settings, v_p_b_cap=hi_req)
    return RegionMap(records=records, max_secure_v_p_b=crossing)


def key_rate_vs_cp(
    config: ProtocolConfig,
    channel: ChannelParams,
    v_p_b: float,
    resolution: int = 2001,
) -> SweepCurve:
    """Key rate sampled across the full physical correlation interval."""
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    parabola = physicality_parabola(config, channel)
    c_lo, c_hi = parabola.c_p_range(v_p_b)
    if c_hi - c_lo < 1e-14:
        grid = np.array([parabola.c0])
    else:
        grid = np.linspace(c_lo, c_hi, resolution)
    rates = key_rate_curve(config, channel, v_p_b, grid)
    return SweepCurve(grid, rates, label=f"v_p_b={v_p_b:.12g}")


def _loss_axis(loss_db_range: tuple[float, float, float]) -> np.ndarray:
    lo, hi, step = (float(v) for v in loss_db_range)
    if step <= 0.0:
        raise DomainError(f"loss_db step must be > 0, got {step}")
    if hi < lo:
        raise DomainError("loss_db range must satisfy min <= max")
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def key_rate_vs_loss(
    config: ProtocolConfig,
    eps: float,
    loss_db_range: tuple[float, float, float] = (0.0, 30.0, 0.5),
    variants: list[Variant] | None = None,
    settings: SearchSettings | None = None,
    beta: float = 1.0,
) -> list[SweepCurve]:
    """Key rate against channel loss for a symmetric channel, one curve per variant.

    Symmetric assumption: eta_x = eta_p = 10^(-dB/10), eps_x = eps_p = eps
    and the measured p variance is 1 + eta eps.
    """
    chosen = list(variants) if variants else [
        Variant.GG02,
        Variant.UD_P_ESTIMATED,
        Variant.UD_PESSIMISTIC,
    ]
    axis = _loss_axis(loss_db_range)

    def rates_at(loss_db: float) -> tuple[float, ...]:
        channel = ChannelParams.symmetric(transmittance_from_loss_db(loss_db), eps)
        return tuple(
            protocol_key_rate(
                replace(config, variant=variant), channel, settings=settings, beta=beta
            ).key_rate
            for variant in chosen
        )

    rows = map_ordered(rates_at, axis)
    columns = zip(*rows) if rows else [[] for _ in chosen]
    return [
        SweepCurve(axis, np.array(column), label=variant.value)
        for variant, column in zip(chosen, columns)
    ]


def max_tolerable_noise(
    config: ProtocolConfig,
    loss_db: float,
    variant: Variant | None = None,
    settings: SearchSettings | None = None,
    beta: float = 1.0,
) -> float:
    """Largest symmetric excess noise with a positive key rate at this loss.

    Bisects the (monotone) rate-versus-noise curve until the bracket is
    narrower than ``NOISE_EPS_TOL`` and the rate at the returned noise is
    within ``NOISE_RATE_TOL`` of zero.  Raises :class:`NoPositiveRate`
    when even the noiseless channel gives no positive rate; returns the
    bracket edge if the rate is still positive beyond ``NOISE_EPS_CAP``.
    """
    chosen = variant if variant is not None else config.variant
    cfg = replace(config, variant=chosen)
    eta = transmittance_from_loss_db(loss_db)

    def rate(eps: float) -> float:
        channel = ChannelParams.symmetric(eta, eps)
        return protocol_key_rate(cfg, channel, settings=settings, beta=beta).key_rate

    rate_noiseless = rate(0.0)
    if rate_noiseless <= 0.0:
        raise NoPositiveRate(
            f"{chosen.value} key rate is {rate_noiseless} for a noiseless channel "
            f"at {loss_db} dB; no tolerable excess noise exists"
        )
    eps_hi = 0.01
    while rate(eps_hi) > 0.0:
        if eps_hi > NOISE_EPS_CAP:
            return eps_hi
        eps_hi *= 2.0
    eps_lo = 0.0
    mid = 0.5 * eps_hi
    for _ in range(200):
        mid = 0.5 * (eps_lo + eps_hi)
        k_mid = rate(mid)
        if abs(k_mid) < NOISE_RATE_TOL and (eps_hi - eps_lo) < NOISE_EPS_TOL:
            return mid
        if k_mid > 0.0:
            eps_lo = mid
        else:
            eps_hi = mid
    return mid

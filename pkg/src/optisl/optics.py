"""Free-space optical link budget with pointing jitter.

Far-field Gaussian beam model: the spot radius grows linearly with range,
so aligned received power falls with the inverse square of distance. The
radial pointing error is Rayleigh distributed (two independent zero-mean
Gaussian axis errors, each of standard deviation sigma_theta), which gives
the SNR outage probability a closed form and makes the largest range that
still meets an outage target solvable analytically. Link classes with
different jitter levels therefore reduce to plain per-class distance
limits, computed offline and consumed by graph construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class LinkClass(Enum):
    INTRA_PLANE = "intra"
    INTER_PLANE = "inter"


class InfeasibleLinkError(Exception):
    """No positive feasible range exists for the given parameters."""


@dataclass(frozen=True)
class OpticalParams:
    """Terminal and channel parameters of the inter-satellite laser link.

    ``system_loss_linear`` is a linear power divisor (10 dB -> 10.0),
    applied to the receiver chain. ``wavelength_m`` is carried for
    completeness; the far-field spot model w = theta_div * l does not use
    it. ``divergence_max_rad`` caps the transmit divergence available to
    the threshold optimizer.
    """

    wavelength_m: float = 1550e-9
    tx_power_w: float = 1.0
    eff_tx: float = 0.5
    eff_rx: float = 0.5
    aperture_radius_m: float = 0.05
    system_loss_linear: float = 10.0
    noise_bandwidth_w: float = 1e-12
    snr_threshold_linear: float = 10.0
    divergence_max_rad: float = 1e-3
    jitter_intra_rad: float = 100e-6
    jitter_inter_rad: float = 200e-6
    outage_threshold: float = 1e-3

    def __post_init__(self) -> None:
        positive = (
            "wavelength_m",
            "tx_power_w",
            "eff_tx",
            "eff_rx",
            "aperture_radius_m",
            "noise_bandwidth_w",
            "snr_threshold_linear",
            "divergence_max_rad",
            "jitter_intra_rad",
            "jitter_inter_rad",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.system_loss_linear < 1.0:
            raise ValueError("system_loss_linear must be >= 1 (linear loss factor)")
        if not 0.0 < self.outage_threshold < 1.0:
            raise ValueError("outage_threshold must lie in (0, 1)")
        if self.jitter_inter_rad <= self.jitter_intra_rad:
            raise ValueError(
                "jitter_inter_rad must exceed jitter_intra_rad "
                "(inter-plane links carry the larger pointing jitter)"
            )

    @property
    def power_constant(self) -> float:
        """P_t * eff_tx * eff_rx * a_r^2 / (L_sys * N0B): aligned SNR times (theta*l)^2."""
        return (
            self.tx_power_w
            * self.eff_tx
            * self.eff_rx
            * self.aperture_radius_m**2
            / (self.system_loss_linear * self.noise_bandwidth_w)
        )

    def jitter_of(self, link_class: LinkClass) -> float:
        if link_class is LinkClass.INTRA_PLANE:
            return self.jitter_intra_rad
        return self.jitter_inter_rad


@dataclass(frozen=True)
class FeasibilityThresholds:
    """Per-class maximum link ranges and the divergence used to attain them."""

    l_max_intra_m: float
    l_max_inter_m: float
    divergence_intra_rad: float
    divergence_inter_rad: float

    def __post_init__(self) -> None:
        if self.l_max_intra_m <= 0 or self.l_max_inter_m <= 0:
            raise ValueError("feasible ranges must be > 0")
        if self.divergence_intra_rad <= 0 or self.divergence_inter_rad <= 0:
            raise ValueError("divergence values must be > 0")

    def threshold_for(self, link_class: LinkClass) -> float:
        if link_class is LinkClass.INTRA_PLANE:
            return self.l_max_intra_m
        return self.l_max_inter_m


def beam_radius(theta_div: float, l: float) -> float:
    """Far-field spot radius theta_div * l."""
    if theta_div <= 0:
        raise ValueError("theta_div must be > 0")
    if l <= 0:
        raise ValueError("l must be > 0")
    return theta_div * l


def received_power_aligned(p: OpticalParams, theta_div: float, l: float) -> float:
    """Received power with zero pointing error at range l."""
    w = beam_radius(theta_div, l)
    return (
        p.tx_power_w
        * p.eff_tx
        * p.eff_rx
        * (p.aperture_radius_m / w) ** 2
        / p.system_loss_linear
    )


def pointing_loss(theta: float, theta_div: float, l: float) -> float:
    """Fractional power kept under an angular misalignment theta.

    exp(-2 (l*theta / w(l))^2); with w = theta_div * l this collapses to
    exp(-2 theta^2 / theta_div^2), independent of l.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    w = beam_radius(theta_div, l)
    return math.exp(-2.0 * (l * theta / w) ** 2)


def snr(p: OpticalParams, theta_div: float, l: float, theta: float) -> float:
    """Instantaneous SNR at range l under pointing error theta."""
    return (
        received_power_aligned(p, theta_div, l)
        * pointing_loss(theta, theta_div, l)
        / p.noise_bandwidth_w
    )


def outage_probability(
    p: OpticalParams, sigma_theta: float, theta_div: float, l: float
) -> float:
    """Probability that instantaneous SNR falls below the threshold.

    With Rayleigh-distributed radial pointing error of parameter
    sigma_theta, the closed form is K^(-m) where K is the aligned SNR
    margin over the threshold and m = theta_div^2 / (4 sigma_theta^2);
    1.0 when even perfect pointing misses the threshold (K <= 1).
    """
    if sigma_theta <= 0:
        raise ValueError("sigma_theta must be > 0")
    if l <= 0:
        raise ValueError("l must be > 0")
    k_margin = p.power_constant / (p.snr_threshold_linear * (theta_div * l) ** 2)
    if k_margin <= 1.0:
        return 1.0
    m = theta_div**2 / (4.0 * sigma_theta**2)
    return k_margin**-m


def _range_at_divergence(
    p: OpticalParams, sigma_theta: float, theta_div: float
) -> float:
    """Largest range keeping outage <= the configured target, given theta_div."""
    aligned = math.sqrt(p.power_constant / p.snr_threshold_linear) / theta_div
    return aligned * p.outage_threshold ** (2.0 * sigma_theta**2 / theta_div**2)


def max_feasible_range(
    p: OpticalParams,
    sigma_theta: float,
    mode: str = "optimized",
    fixed_divergence: float | None = None,
) -> tuple[float, float]:
    """Maximum feasible link range for one jitter level.

    mode "fixed" evaluates the closed form at ``fixed_divergence``
    (default: the divergence cap). mode "optimized" maximizes the range
    over divergence in (0, divergence_max_rad]: the range function is
    unimodal with its unconstrained peak at
    sigma_theta * sqrt(-4 ln outage_threshold), so clamping that peak to
    the cap gives the constrained optimum. Returns (l_max, theta_div).
    """
    if sigma_theta <= 0:
        raise ValueError("sigma_theta must be > 0")
    if mode == "fixed":
        theta = fixed_divergence if fixed_divergence is not None else p.divergence_max_rad
        if not 0.0 < theta <= p.divergence_max_rad:
            raise ValueError("fixed divergence must lie in (0, divergence_max_rad]")
    elif mode == "optimized":
        theta = sigma_theta * math.sqrt(-4.0 * math.log(p.outage_threshold))
        theta = min(theta, p.divergence_max_rad)
    else:
        raise ValueError(f"unknown mode {mode!r} (expected 'fixed' or 'optimized')")
    l_max = _range_at_divergence(p, sigma_theta, theta)
    if not math.isfinite(l_max) or l_max <= 0:
        raise InfeasibleLinkError(
            f"no feasible range at sigma_theta={sigma_theta}, theta_div={theta}"
        )
    return l_max, theta


def max_feasible_range_bisect(
    p: OpticalParams, sigma_theta: float, theta_div: float, tol_m: float = 1.0
) -> float:
    """Bisection on the monotone outage-vs-distance curve, to tol_m meters.

    Fallback/oracle for the closed form; useful if the outage model ever
    loses its analytic inverse.
    """
    aligned = math.sqrt(p.power_constant / p.snr_threshold_linear) / theta_div
    lo, hi = tol_m, aligned  # outage(hi) = 1 > target, outage(lo) ~ 0
    if outage_probability(p, sigma_theta, theta_div, lo) > p.outage_threshold:
        raise InfeasibleLinkError("outage exceeds target even at negligible range")
    while hi - lo > tol_m:
        mid = 0.5 * (lo + hi)
        if outage_probability(p, sigma_theta, theta_div, mid) <= p.outage_threshold:
            lo = mid
        else:
            hi = mid
    return lo


def compute_thresholds(
    p: OpticalParams,
    mode: str = "optimized",
    fixed_divergence: float | None = None,
) -> FeasibilityThresholds:
    """Per-class feasible ranges for the configured intra/inter jitter."""
    l_intra, th_intra = max_feasible_range(p, p.jitter_intra_rad, mode, fixed_divergence)
    l_inter, th_inter = max_feasible_range(p, p.jitter_inter_rad, mode, fixed_divergence)
    return FeasibilityThresholds(
        l_max_intra_m=l_intra,
        l_max_inter_m=l_inter,
        divergence_intra_rad=th_intra,
        divergence_inter_rad=th_inter,
    )


def outage_curve(
    p: OpticalParams, sigma_theta: float, theta_div: float, distances_m: np.ndarray
) -> np.ndarray:
    """Outage probability evaluated over an array of distances."""
    return np.array(
        [outage_probability(p, sigma_theta, theta_div, float(l)) for l in distances_m]
    )

"""Bloch analysis of the infinite periodic array near a Bragg resonance.

The quasimomentum of the Bloch states follows from the single-period
transfer matrix through cosh(theta) = (M11 + M22)/2 cos(phi)
+ i (M11 - M22)/2 sin(phi), where phi is the phase mismatch accumulated
over one period.  Band gaps are the detuning windows where theta keeps a
positive real part even after the scattering-loss parts of the atomic
response are dropped; their closed-form edges, the threshold atom number,
the in-gap reflectivity, and the group delay of the reflected light are
computed here.

Gap edges are also located numerically: the lossless second-order form of
theta^2 is real, so its sign change brackets each edge and plain bisection
finishes the job (the exact lossless theta has a tiny residual real part
everywhere, which would defeat a naive Re(theta) = 0 search).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.constants import pi

from . import numerics, scattering
from .emission import DecayRates
from .fiber import ModeSolution
from .numerics import DomainError

_GROUP_DELAY_STEP = 2.0 * pi * 1e6  # rad/s


@dataclass(frozen=True)
class GapReport:
    """Band-gap summary for one quasilinear channel."""

    xi: str
    delta_lat: float          # lattice-resonance detuning, rad/s
    omega_c_offset: float     # gap-center detuning (delta_lat / 2), rad/s
    delta_max: float          # outer half-width, rad/s
    delta_min: float | None   # inner half-width (x channel only), rad/s
    delta_gap: float          # width of each gap, rad/s
    n_gap: float              # threshold atom number
    delta_mid: float          # mid-gap detuning, rad/s
    r_gap: complex            # characteristic in-gap reflection coefficient
    delta_flat: float | None  # central-plateau half-width (x channel), rad/s
    tau_delay: float          # group delay at mid-gap, s
    intervals: tuple          # gap intervals ((lo, hi), ...) in detuning


def mismatch_phase(mode: ModeSolution, period: float, delta: float,
                   delta_lat: float) -> float:
    """Phase mismatch phi = (delta - delta_lat) * Lambda / v_group."""
    return (delta - delta_lat) * period / mode.v_group


def _branch(theta: complex) -> complex:
    if theta.real < 0.0 or (theta.real == 0.0 and theta.imag < 0.0):
        theta = -theta
    return theta


def bloch_theta(rates: DecayRates, mode: ModeSolution, period: float,
                xi: str, delta: float, delta_lat: float = 0.0,
                lossless: bool = False) -> complex:
    """Exact Bloch parameter theta(delta) near the Bragg resonance.

    Only meaningful for small mismatch phases; values |phi| > 0.1 raise,
    since the linearized dispersion behind phi would be stretched too far.
    """
    phi = mismatch_phase(mode, period, delta, delta_lat)
    if abs(phi) > 0.1:
        raise DomainError(f"mismatch phase {phi:.3f} outside the "
                          "near-resonance regime")
    ch = scattering.polarization_channel(rates, delta, xi, lossless)
    arg = (0.5 * (ch.m11 + ch.m22) * np.cos(phi)
           + 0.5j * (ch.m11 - ch.m22) * np.sin(phi))
    return _branch(cmath.acosh(arg))


def bloch_theta_second_order(rates: DecayRates, mode: ModeSolution,
                             period: float, xi: str, delta: float,
                             delta_lat: float = 0.0,
                             lossless: bool = False) -> complex:
    """Second-order expansion sqrt(M11 + M22 - 2 + i (M11 - M22) phi - phi^2)."""
    phi = mismatch_phase(mode, period, delta, delta_lat)
    ch = scattering.polarization_channel(rates, delta, xi, lossless)
    return _branch(cmath.sqrt(ch.m11 + ch.m22 - 2.0
                              + 1j * (ch.m11 - ch.m22) * phi - phi ** 2))


def bloch_theta_quadratic(rates: DecayRates, mode: ModeSolution,
                          period: float, xi: str, delta: float,
                          delta_lat: float = 0.0,
                          lossless: bool = False) -> complex:
    """Channel-specific quadratic forms of the Bloch parameter."""
    phi = mismatch_phase(mode, period, delta, delta_lat)
    s_r, s_phi, s_z = scattering.channel_s_values(rates, delta, lossless)
    if xi == "x":
        arg = 4.0 * s_r * s_z - 2j * (s_r + s_z) * phi - phi ** 2
    elif xi == "y":
        arg = -2j * s_phi * phi - phi ** 2
    else:
        raise DomainError(f"unknown channel {xi!r}")
    return _branch(cmath.sqrt(arg))


def validity_ratio(rates: DecayRates, mode: ModeSolution, period: float,
                   xi: str, delta_lat: float = 0.0) -> float:
    """Ratio sqrt(u0 |e|^2 v_g / Lambda) / max(gamma, |delta_lat|)."""
    strength = rates.u0_ephi2 if xi == "y" else rates.u0_er2
    scale = np.sqrt(strength * mode.v_group / period)
    return float(scale / max(rates.gamma_total, abs(delta_lat), 1e-300))


def gap_edges(rates: DecayRates, mode: ModeSolution, period: float, xi: str,
              delta_lat: float = 0.0):
    """Closed-form gap half-widths and detuning intervals for one channel.

    Returns (delta_max, delta_min_or_None, delta_gap, intervals); the
    intervals are detuning windows relative to the atomic resonance.
    """
    import warnings
    if validity_ratio(rates, mode, period, xi, delta_lat) < 10.0:
        warnings.warn("band-gap closed forms used outside their validity "
                      "range", stacklevel=2)
    center = 0.5 * delta_lat
    vg_over_lam = mode.v_group / period
    if xi == "x":
        delta_max = np.sqrt(0.25 * delta_lat ** 2
                            + rates.u0_er2 * vg_over_lam)
        delta_min = np.sqrt(0.25 * delta_lat ** 2
                            + rates.u0_ez2 * vg_over_lam)
        intervals = ((center - delta_max, center - delta_min),
                     (center + delta_min, center + delta_max))
        return float(delta_max), float(delta_min), \
            float(delta_max - delta_min), intervals
    if xi == "y":
        delta_max = np.sqrt(0.25 * delta_lat ** 2
                            + rates.u0_ephi2 * vg_over_lam)
        # the window between the atomic and lattice resonances is excluded
        lo, hi = sorted((0.0, delta_lat))
        intervals = ((center - delta_max, lo), (hi, center + delta_max))
        delta_gap = delta_max - 0.5 * abs(delta_lat)
        return float(delta_max), None, float(delta_gap), intervals
    raise DomainError(f"unknown channel {xi!r}")


def gap_edges_numeric(rates: DecayRates, mode: ModeSolution, period: float,
                      xi: str, delta_lat: float = 0.0):
    """Gap edges from bisection on the lossless second-order theta^2.

    With the loss parts zeroed, theta^2 of the second-order form is real;
    each sign change in delta brackets one band edge.
    """
    def theta_sq(delta):
        phi = mismatch_phase(mode, period, delta, delta_lat)
        s_r, s_phi, s_z = scattering.channel_s_values(rates, delta,
                                                      lossless=True)
        if xi == "x":
            val = 4.0 * s_r * s_z - 2j * (s_r + s_z) * phi - phi ** 2
        else:
            val = -2j * s_phi * phi - phi ** 2
        return val.real

    delta_max, _delta_min, _width, _ = gap_edges(rates, mode, period, xi,
                                                 delta_lat)
    span = 3.0 * delta_max + abs(delta_lat)
    grid = np.linspace(-span, span, 4001)
    values = np.array([theta_sq(d) for d in grid])
    edges = []
    for i in np.nonzero(np.diff(np.sign(values)) != 0)[0]:
        edges.append(numerics.find_root(theta_sq, grid[i], grid[i + 1]))
    intervals = []
    for lo, hi in zip(edges[::2], edges[1::2]):
        if theta_sq(0.5 * (lo + hi)) > 0.0:
            intervals.append((lo, hi))
    # odd pairings: rebuild from any positive plateau between roots
    if not intervals:
        for lo, hi in zip(edges[:-1], edges[1:]):
            if theta_sq(0.5 * (lo + hi)) > 0.0:
                intervals.append((lo, hi))
    return tuple(intervals)


def gap_threshold(rates: DecayRates, mode: ModeSolution, period: float,
                  xi: str):
    """(N_gap, delta_mid, theta_gap) closed forms for one channel."""
    u0 = rates.u0
    vg_over_lam = mode.v_group / period
    if xi == "x":
        abs_er = np.sqrt(rates.u0_er2 / u0)
        abs_ez = np.sqrt(rates.u0_ez2 / u0)
        theta_gap = np.sqrt(u0 * period / mode.v_group) * (abs_er - abs_ez)
        n_gap = 1.0 / theta_gap
        delta_mid = np.sqrt(u0 * abs_er * abs_ez * vg_over_lam)
    elif xi == "y":
        theta_gap = np.sqrt(3.0 * rates.u0_ephi2 * period
                            / (4.0 * mode.v_group))
        n_gap = 1.0 / theta_gap
        delta_mid = 0.5 * np.sqrt(rates.u0_ephi2 * vg_over_lam)
    else:
        raise DomainError(f"unknown channel {xi!r}")
    return float(n_gap), float(delta_mid), float(theta_gap)


def gap_reflectivity(rates: DecayRates, mode: ModeSolution, period: float,
                     xi: str, sign: int = +1) -> complex:
    """Characteristic in-gap reflection coefficient R_gap.

    `sign` selects the mid-gap detuning +delta_mid or -delta_mid; the two
    branches are complex conjugates with equal magnitude.
    """
    if sign not in (+1, -1):
        raise DomainError("sign must be +1 or -1")
    gamma = rates.gamma_total
    vg_over_lam = mode.v_group / period
    if xi == "x":
        sq_er = np.sqrt(np.sqrt(rates.u0_er2 / rates.u0))
        sq_ez = np.sqrt(np.sqrt(rates.u0_ez2 / rates.u0))
        abs_er = np.sqrt(rates.u0_er2 / rates.u0)
        abs_ez = np.sqrt(rates.u0_ez2 / rates.u0)
        lead = -(sq_er + 1j * sign * sq_ez) / (sq_er - 1j * sign * sq_ez)
        damping = 1.0 - gamma / (2.0 * np.sqrt(rates.u0 * vg_over_lam)
                                 * (abs_er - abs_ez))
        return complex(lead * damping)
    if xi == "y":
        lead = -(1.0 + 1j * sign * np.sqrt(3.0)) / 2.0
        damping = 1.0 - gamma / np.sqrt(3.0 * rates.u0_ephi2 * vg_over_lam)
        return complex(lead * damping)
    raise DomainError(f"unknown channel {xi!r}")


def infinite_array_reflection(rates: DecayRates, mode: ModeSolution,
                              period: float, xi: str, delta: float,
                              delta_lat: float = 0.0) -> complex:
    """Infinite-array reflection R_inf = R / (1 - T exp(i phi - theta))."""
    phi = mismatch_phase(mode, period, delta, delta_lat)
    ch = scattering.polarization_channel(rates, delta, xi)
    theta = bloch_theta(rates, mode, period, xi, delta, delta_lat)
    denom = 1.0 - ch.trans * cmath.exp(1j * phi - theta)
    return complex(ch.refl / denom)


def group_delay(rates: DecayRates, mode: ModeSolution, period: float,
                xi: str, delta: float, delta_lat: float = 0.0,
                step: float = _GROUP_DELAY_STEP) -> float:
    """Group delay d(arg R_inf)/d(omega) by central difference."""
    r_hi = infinite_array_reflection(rates, mode, period, xi, delta + step,
                                     delta_lat)
    r_lo = infinite_array_reflection(rates, mode, period, xi, delta - step,
                                     delta_lat)
    # phase difference via the ratio, immune to 2 pi wrapping
    return float(cmath.phase(r_hi / r_lo) / (2.0 * step))


def gap_average_delay(rates: DecayRates, mode: ModeSolution, period: float,
                      xi: str, interval, delta_lat: float = 0.0,
                      samples: int = 201) -> float:
    """Average group delay over one gap: phase change / gap width.

    This is the slope the unwrapped reflection phase accumulates across
    the gap interior, which is how the in-gap delay is usually quoted;
    the pointwise derivative (group_delay) varies across the gap.
    """
    lo, hi = interval
    margin = 0.02 * (hi - lo)
    deltas = np.linspace(lo + margin, hi - margin, samples)
    phases = np.unwrap([cmath.phase(infinite_array_reflection(
        rates, mode, period, xi, d, delta_lat)) for d in deltas])
    return float((phases[-1] - phases[0]) / (deltas[-1] - deltas[0]))


def delta_flat_estimate(rates: DecayRates, n_atoms: int) -> float:
    """Central-plateau half-width sqrt(gamma_s * gamma * N) / 2 (x channel)."""
    return float(0.5 * np.sqrt(rates.gamma_s * rates.gamma_total * n_atoms))


def measure_delta_flat(rates: DecayRates, mode: ModeSolution, period: float,
                       n_atoms: int, departure: float = 0.01,
                       step: float = 2.0 * pi * 1e6) -> float:
    """Measured plateau half-width of the x channel.

    First |delta| where the finite-array reflectivity departs from the
    infinite-array limit |R_inf(delta)|^2 by the given relative amount;
    inside the plateau the finite and infinite arrays agree.
    """
    def departs(delta):
        beta_l = mode.beta + delta / mode.v_group
        ch = scattering.polarization_channel(rates, delta, "x")
        from .lattice import array_response
        resp = array_response(ch.matrix, beta_l, period, n_atoms, "x")
        plateau = abs(infinite_array_reflection(rates, mode, period, "x",
                                                delta)) ** 2
        return abs(resp.reflectivity - plateau) > departure * plateau

    delta = step
    while not departs(delta):
        delta += step
        if delta > 1e12:
            raise RuntimeError("no plateau departure found")
    lo, hi = delta - step, delta
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if departs(mid):
            hi = mid
        else:
            lo = mid
    return float(0.5 * (lo + hi))


def gap_report(rates: DecayRates, mode: ModeSolution, period: float, xi: str,
               delta_lat: float = 0.0,
               n_atoms_flat: int = 150000) -> GapReport:
    """Full band-gap summary for one channel."""
    delta_max, delta_min, delta_gap, intervals = gap_edges(
        rates, mode, period, xi, delta_lat)
    n_gap, delta_mid, _theta_gap = gap_threshold(rates, mode, period, xi)
    r_gap = gap_reflectivity(rates, mode, period, xi)
    tau = gap_average_delay(rates, mode, period, xi, intervals[-1],
                            delta_lat)
    delta_flat = delta_flat_estimate(rates, n_atoms_flat) if xi == "x" \
        else None
    return GapReport(xi=xi, delta_lat=delta_lat,
                     omega_c_offset=0.5 * delta_lat, delta_max=delta_max,
                     delta_min=delta_min, delta_gap=delta_gap, n_gap=n_gap,
                     delta_mid=delta_mid, r_gap=r_gap, delta_flat=delta_flat,
                     tau_delay=tau, intervals=intervals)

"""Multi-atom propagation through a periodic array along the fiber.

Field amplitudes on the two sides of the array are related by the total
transfer matrix W = (M F)^(N-1) M, with M the single-atom transfer matrix
and F the free propagator over one period.  Two evaluation paths are
provided and cross-checked:

* a repeated-squaring matrix product with explicit rescaling (the entries
  of W genuinely overflow for large N, so a separate log-scale factor is
  carried and never silently dropped);
* the closed form through the eigenvalue parameter theta of the
  single-period matrix.  All sinh ratios are evaluated through
  exp(-2 theta) power forms so that atom numbers up to 10^6 and beyond
  stay representable at any Re(theta).

Reflection/transmission coefficients, the Airy-type recurrence, the exact
Bragg-resonance forms (including the degenerate theta -> 0 branch), the
general 4-mode input-output solution, and the homogenized-medium limit
live here as well.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .numerics import DomainError

_DEGENERATE_SINH = 1e-14


class SingularInputOutputError(ArithmeticError):
    """The two-sided input-output system is singular."""


@dataclass(frozen=True)
class ArrayScenario:
    """Periodic-array geometry: N atoms, period Lambda, transverse position."""

    n_atoms: int
    period: float
    r0: float
    phi0: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("atom number must be >= 1")
        if not self.period > 0.0:
            raise ValueError("array period must be positive")
        if self.phi0 != 0.0:
            raise ValueError("only the phi0 = 0 geometry is supported")


@dataclass(frozen=True)
class ScaledMatrix:
    """2x2 complex matrix times exp(log_scale), kept separately."""

    matrix: np.ndarray
    log_scale: float

    def entry(self, i: int, j: int) -> complex:
        return self.matrix[i, j] * np.exp(self.log_scale)


@dataclass(frozen=True)
class ArrayResponse:
    """Reflection/transmission data of one array configuration."""

    r_n: complex | None
    t_n: complex | None
    reflectivity: float
    transmittivity: float
    p_tot: float
    theta: complex | None
    powers: dict = field(default_factory=dict)


def free_propagator(beta_l: float, period: float, size: int = 2) -> np.ndarray:
    """Propagator over one atom-free period: diag phases exp(+/- i beta L)."""
    if period < 0.0:
        raise DomainError("period must be nonnegative")
    phase = np.exp(1j * beta_l * period)
    if size == 2:
        return np.diag([phase, 1.0 / phase]).astype(complex)
    if size == 4:
        return np.diag([phase, phase, 1.0 / phase, 1.0 / phase])
    raise DomainError("propagator size must be 2 or 4")


def bragg_period(beta: float, order: int) -> float:
    """Array period satisfying beta * Lambda = order * pi."""
    if order < 1:
        raise DomainError("Bragg order must be a positive integer")
    return order * np.pi / beta


def _rescale(matrix: np.ndarray, log_scale: float):
    peak = np.max(np.abs(matrix))
    if peak == 0.0 or 1e-50 < peak < 1e50:
        return matrix, log_scale
    return matrix / peak, log_scale + float(np.log(peak))


def total_transfer_product(m: np.ndarray, f: np.ndarray,
                           n_atoms: int) -> ScaledMatrix:
    """W = (M F)^(N-1) M by repeated squaring with overflow rescaling."""
    if n_atoms < 1:
        raise DomainError("atom number must be >= 1")
    t = np.asarray(m, dtype=complex) @ np.asarray(f, dtype=complex)
    power = n_atoms - 1
    result = np.eye(t.shape[0], dtype=complex)
    log_scale = 0.0
    base, base_scale = t.copy(), 0.0
    while power:
        if power & 1:
            result, log_scale = _rescale(result @ base,
                                         log_scale + base_scale)
        power >>= 1
        if power:
            base, base_scale = _rescale(base @ base, 2.0 * base_scale)
    result, log_scale = _rescale(result @ np.asarray(m, dtype=complex),
                                 log_scale)
    return ScaledMatrix(matrix=result, log_scale=log_scale)


def inhomogeneous_transfer(matrices, spacings, beta_l: float) -> ScaledMatrix:
    """General product M_N F_{N-1} ... F_1 M_1 for per-atom positions.

    `matrices` holds N single-atom transfer matrices ordered along the
    axis; `spacings` the N-1 gaps between consecutive atoms.
    """
    matrices = list(matrices)
    spacings = list(spacings)
    if len(spacings) != len(matrices) - 1:
        raise DomainError("need exactly N-1 spacings for N atoms")
    size = np.asarray(matrices[0]).shape[0]
    result = np.asarray(matrices[0], dtype=complex)
    log_scale = 0.0
    for m, gap in zip(matrices[1:], spacings):
        result = np.asarray(m, dtype=complex) \
            @ free_propagator(beta_l, gap, size) @ result
        result, log_scale = _rescale(result, log_scale)
    return ScaledMatrix(matrix=result, log_scale=log_scale)


def _cexpm1(z: complex) -> complex:
    """exp(z) - 1 without cancellation for small |z|."""
    if abs(z) < 1e-4:
        return z * (1.0 + z / 2.0 * (1.0 + z / 3.0
                                     * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    return cmath.exp(z) - 1.0


def _sinh_ratio_parts(theta_red: complex, k: int):
    """sinh(k theta)/sinh(theta) = exp((k-1) theta) * u_k; returns u_k.

    theta_red is the reduced theta (|Im| <= pi/2); the exp prefactor is
    applied by the caller so a common scale can be factored out.
    """
    if theta_red == 0.0:
        return complex(k)
    num = _cexpm1(-2.0 * k * theta_red)
    den = _cexpm1(-2.0 * theta_red)
    if den == 0.0:
        return complex(k)
    return num / den


def transfer_theta(m: np.ndarray, beta_l: float, period: float) -> complex:
    """Eigenvalue parameter theta of the single-period matrix T = M F.

    Branch convention: Re(theta) > 0, or Re(theta) = 0 with Im(theta) >= 0.
    """
    phase = cmath.exp(1j * beta_l * period)
    d = 0.5 * (m[0, 0] * phase + m[1, 1] / phase)
    theta = cmath.acosh(d)
    if theta.real < 0.0 or (theta.real == 0.0 and theta.imag < 0.0):
        theta = -theta
    return theta


def total_transfer_closed(m: np.ndarray, beta_l: float, period: float,
                          n_atoms: int):
    """Closed-form W via sinh ratios; returns (ScaledMatrix, theta).

    Stable for atom numbers up to 10^6 and beyond: sinh(N theta) is never
    formed directly, the common growth factor exp((N-2) Re theta) is kept
    as a log scale.
    """
    if n_atoms < 1:
        raise DomainError("atom number must be >= 1")
    m = np.asarray(m, dtype=complex)
    theta = transfer_theta(m, beta_l, period)
    n_pi = round(theta.imag / np.pi)
    theta_red = theta - 1j * np.pi * n_pi
    u_n = _sinh_ratio_parts(theta_red, n_atoms)
    u_n1 = _sinh_ratio_parts(theta_red, n_atoms - 1)
    # sinh(K theta)/sinh(theta) = (-1)^((K-1) n_pi) e^((K-1) theta_red) u_K;
    # factor out e^((N-2) theta_red) and the overall parity of the N term,
    # keeping the real (growing) part of the common factor as a log scale.
    parity_n = (-1.0) ** (((n_atoms - 1) * n_pi) % 2)
    parity_n1 = (-1.0) ** (((n_atoms - 2) * n_pi) % 2)
    common = parity_n * cmath.exp(1j * (n_atoms - 2) * theta_red.imag)
    rel_n1 = parity_n1 / parity_n  # +/- 1
    phase = cmath.exp(1j * beta_l * period)
    exp_theta = cmath.exp(theta_red)
    w11 = m[0, 0] * exp_theta * u_n - rel_n1 / phase * u_n1
    w22 = m[1, 1] * exp_theta * u_n - rel_n1 * phase * u_n1
    w21 = m[1, 0] * exp_theta * u_n
    w12 = m[0, 1] * exp_theta * u_n
    matrix = common * np.array([[w11, w12], [w21, w22]])
    log_scale = (n_atoms - 2) * theta_red.real
    matrix_scaled, log_scale = _rescale(matrix, log_scale)
    return ScaledMatrix(matrix=matrix_scaled, log_scale=log_scale), theta


def reflection_transmission(w: ScaledMatrix):
    """R_N = -W21/W22 and T_N = 1/W22 from a scaled transfer matrix."""
    w21 = w.matrix[1, 0]
    w22 = w.matrix[1, 1]
    if abs(w22) < 1e-300:
        w22 = 1e-300
    r_n = -w21 / w22
    # 1/W22 with the true scale restored; underflows cleanly to 0.
    log_t = -w.log_scale
    if log_t < -700.0:
        t_n = 0.0j
    else:
        t_n = np.exp(log_t) / w22
    return complex(r_n), complex(t_n)


def recurrence_step(r_n: complex, t_n: complex, refl: complex, trans: complex,
                    beta_l: float, period: float):
    """Airy-type recurrence adding one atom to the array."""
    phase = np.exp(1j * beta_l * period)
    denom = 1.0 - r_n * refl * phase ** 2
    r_next = r_n + t_n ** 2 * refl * phase ** 2 / denom
    t_next = t_n * trans * phase / denom
    return complex(r_next), complex(t_next)


def array_response(m: np.ndarray, beta_l: float, period: float, n_atoms: int,
                   xi: str = "x", method: str = "closed") -> ArrayResponse:
    """Reflection/transmission of an N-atom array for one quasilinear channel."""
    if method == "closed":
        w, theta = total_transfer_closed(m, beta_l, period, n_atoms)
    elif method == "product":
        f = free_propagator(beta_l, period, 2)
        w = total_transfer_product(m, f, n_atoms)
        theta = transfer_theta(np.asarray(m, dtype=complex), beta_l, period)
    else:
        raise DomainError(f"unknown method {method!r}")
    r_n, t_n = reflection_transmission(w)
    reflectivity = abs(r_n) ** 2
    transmittivity = abs(t_n) ** 2
    powers = {(+1, xi): transmittivity, (-1, xi): reflectivity}
    return ArrayResponse(r_n=r_n, t_n=t_n, reflectivity=reflectivity,
                         transmittivity=transmittivity,
                         p_tot=reflectivity + transmittivity,
                         theta=theta, powers=powers)


def circular_response(m_x: np.ndarray, m_y: np.ndarray, beta_l: float,
                      period: float, n_atoms: int, l_in: int = +1,
                      method: str = "closed") -> ArrayResponse:
    """Response to quasicircular input, combined from the decoupled channels.

    A unit-amplitude quasicircular input l maps onto the x/y channels as
    (1, -i l)/sqrt(2); output circular amplitudes follow from the inverse
    map A_{f,l'} = (A_x + i l' A_y)/sqrt(2).
    """
    if l_in not in (+1, -1):
        raise DomainError("circular input label must be +1 or -1")
    resp_x = array_response(m_x, beta_l, period, n_atoms, "x", method)
    resp_y = array_response(m_y, beta_l, period, n_atoms, "y", method)
    a_x_in, a_y_in = 1.0 / np.sqrt(2.0), -1j * l_in / np.sqrt(2.0)
    t_x, t_y = resp_x.t_n * a_x_in, resp_y.t_n * a_y_in
    r_x, r_y = resp_x.r_n * a_x_in, resp_y.r_n * a_y_in
    powers = {}
    for l_out in (+1, -1):
        powers[(+1, "+" if l_out > 0 else "-")] = \
            abs((t_x + 1j * l_out * t_y) / np.sqrt(2.0)) ** 2
        powers[(-1, "+" if l_out > 0 else "-")] = \
            abs((r_x + 1j * l_out * r_y) / np.sqrt(2.0)) ** 2
    p_tot = float(sum(powers.values()))
    return ArrayResponse(r_n=None, t_n=None,
                         reflectivity=abs(r_x) ** 2 + abs(r_y) ** 2,
                         transmittivity=abs(t_x) ** 2 + abs(t_y) ** 2,
                         p_tot=p_tot, theta=None, powers=powers)


def bragg_response(channel, n_atoms: int, n_order: int,
                   theta_red: complex | None = None) -> ArrayResponse:
    """Exact-Bragg response via the reduced-theta forms.

    `channel` is a PolarizationChannel; beta_l * Lambda = n_order * pi is
    assumed by construction.  The y channel (and any case with
    |sinh theta| below the degeneracy threshold) dispatches to the
    analytic continuation R_N = N R / (1 - (N-1) R).
    """
    if n_atoms < 1:
        raise DomainError("atom number must be >= 1")
    refl, trans = channel.refl, channel.trans
    if theta_red is None:
        d = 0.5 * (channel.m11 + channel.m22)
        theta_red = cmath.acosh(d)
        if theta_red.real < 0.0 or (theta_red.real == 0.0
                                    and theta_red.imag < 0.0):
            theta_red = -theta_red
    sign = (-1.0) ** (((n_atoms + 1) * n_order) % 2)
    if abs(cmath.sinh(theta_red)) < _DEGENERATE_SINH:
        r_n = n_atoms * refl / (1.0 - (n_atoms - 1) * refl)
        t_n = sign * trans / (1.0 - (n_atoms - 1) * refl)
    else:
        u_n = _sinh_ratio_parts(theta_red, n_atoms)
        u_n1 = _sinh_ratio_parts(theta_red, n_atoms - 1)
        # common factor e^{(N-1) theta} cancels between numerator and
        # denominator of R_N; T_N keeps e^{-(N-1) theta} explicitly.
        exp_m = cmath.exp(-theta_red)
        denom = u_n - trans * exp_m * u_n1
        r_n = refl * u_n / denom
        damp = -(n_atoms - 1) * theta_red
        t_n = 0.0j if damp.real < -700.0 else \
            sign * trans * cmath.exp(damp) / denom
    reflectivity, transmittivity = abs(r_n) ** 2, abs(t_n) ** 2
    theta = theta_red + 1j * np.pi * n_order
    return ArrayResponse(r_n=complex(r_n), t_n=complex(t_n),
                         reflectivity=reflectivity,
                         transmittivity=transmittivity,
                         p_tot=reflectivity + transmittivity, theta=theta,
                         powers={(+1, channel.xi): transmittivity,
                                 (-1, channel.xi): reflectivity})


def bragg_r_infinity(channel) -> complex:
    """Large-N limit of the Bragg reflection coefficient, R/(1 - T e^-theta)."""
    d = 0.5 * (channel.m11 + channel.m22)
    theta_red = cmath.acosh(d)
    if theta_red.real < 0.0 or (theta_red.real == 0.0 and theta_red.imag < 0.0):
        theta_red = -theta_red
    if theta_red.real == 0.0:
        raise DomainError("no damped branch: theta is purely imaginary")
    return complex(channel.refl / (1.0 - channel.trans
                                   * cmath.exp(-theta_red)))


def bragg_r_infinity_profile(u0_er2: float, u0_ez2: float) -> float:
    """Profile-only x-channel limit -(|e_r| - |e_z|)/(|e_r| + |e_z|)."""
    abs_er = np.sqrt(u0_er2)
    abs_ez = np.sqrt(u0_ez2)
    return float(-(abs_er - abs_ez) / (abs_er + abs_ez))


def input_output_4mode(w: np.ndarray, x_in):
    """Outgoing amplitudes (X1..X4) for bidirectional illumination.

    `x_in` holds (X1_in, X2_in) incident from the left in the forward
    modes and (X3_in, X4_in) incident from the right in the backward
    modes; W is the 4x4 total transfer matrix.
    """
    w = np.asarray(w, dtype=complex)
    x1_in, x2_in, x3_in, x4_in = (complex(v) for v in x_in)
    q = w[2, 2] * w[3, 3] - w[2, 3] * w[3, 2]
    if abs(q) < 1e-300:
        raise SingularInputOutputError("W33 W44 - W34 W43 vanished")
    g3 = w[2, 0] * x1_in + w[2, 1] * x2_in - x3_in
    g4 = w[3, 0] * x1_in + w[3, 1] * x2_in - x4_in
    x3 = (w[2, 3] * g4 - w[3, 3] * g3) / q
    x4 = (w[3, 2] * g3 - w[2, 2] * g4) / q
    x1 = w[0, 0] * x1_in + w[0, 1] * x2_in + w[0, 2] * x3 + w[0, 3] * x4
    x2 = w[1, 0] * x1_in + w[1, 1] * x2_in + w[1, 2] * x3 + w[1, 3] * x4
    return x1, x2, x3, x4


def homogenized_transfer(s: np.ndarray, beta_l: float, period: float,
                         length: float) -> np.ndarray:
    """Continuous-medium limit W = exp((i B - S/Lambda) L).

    Valid far off the Bragg resonance, where the discreteness of the array
    can be ignored.  Works for the 2x2 single-channel and the 4x4 form.
    """
    s = np.asarray(s, dtype=complex)
    size = s.shape[0]
    if size == 2:
        b = np.diag([beta_l, -beta_l]).astype(complex)
    elif size == 4:
        b = np.diag([beta_l, beta_l, -beta_l, -beta_l]).astype(complex)
    else:
        raise DomainError("homogenized transfer needs a 2x2 or 4x4 matrix")
    return expm((1j * b - s / period) * length)

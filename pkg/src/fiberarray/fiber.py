"""HE11 guided mode of a vacuum-clad step-index nanofiber.

Solves the exact two-layer hybrid-mode eigenvalue problem for the
fundamental mode and evaluates the normalized vector profile functions in
the quasicircular and quasilinear polarization bases, together with the
group and phase velocities.  Conventions:

* the reference profile is the forward, counterclockwise quasicircular
  mode; its radial component is purely imaginary and its azimuthal and
  longitudinal components purely real, with a real positive normalization
  constant;
* profiles are normalized so that the weighted transverse integral
  int n_ref^2 |e|^2 dA equals one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

from . import numerics
from .numerics import DEFAULT_TOL, DomainError, ToleranceConfig

# First zero of J0: single-mode limit of the V number.
SINGLE_MODE_V = 2.404825557695773


class ModeCutoffError(ValueError):
    """No guided HE11 solution between the cladding and core light lines."""


def sellmeier_silica(wavelength: float) -> float:
    """Fused-silica refractive index (three-term Sellmeier), wavelength in m."""
    lam_um_sq = (wavelength * 1e6) ** 2
    terms = (
        (0.6961663, 0.0684043),
        (0.4079426, 0.1162414),
        (0.8974794, 9.896161),
    )
    n_sq = 1.0 + sum(b * lam_um_sq / (lam_um_sq - c * c) for b, c in terms)
    return float(np.sqrt(n_sq))


@dataclass(frozen=True)
class FiberSpec:
    """Step-index cylinder of radius `radius` and core index n1 in a medium n2."""

    radius: float
    n1: float
    n2: float = 1.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("fiber radius must be positive")
        if not (self.n1 > self.n2 >= 1.0):
            raise ValueError("indices must satisfy n1 > n2 >= 1")

    @classmethod
    def silica(cls, radius: float, wavelength: float,
               n2: float = 1.0) -> "FiberSpec":
        return cls(radius=radius, n1=sellmeier_silica(wavelength), n2=n2)

    def v_number(self, omega: float) -> float:
        k = omega / C_LIGHT
        return k * self.radius * np.sqrt(self.n1 ** 2 - self.n2 ** 2)


@dataclass(frozen=True)
class ModeSolution:
    """Solved HE11 mode at one frequency."""

    omega: float     # rad/s
    beta: float      # propagation constant, 1/m
    h: float         # interior transverse wavenumber, 1/m
    q: float         # exterior decay constant, 1/m
    s_param: float   # dimensionless hybrid-mode parameter
    norm_C: float    # profile normalization constant, 1/m
    v_group: float   # m/s
    v_phase: float   # m/s


@dataclass(frozen=True)
class GuidedProfile:
    """Cylindrical components of the reference guided-mode profile at radius r."""

    e_r: complex
    e_phi: complex
    e_z: complex
    r: float


def _eigenvalue_sides(fiber: FiberSpec, omega: float, beta):
    """Left and right sides of the HE11 eigenvalue equation (vectorized)."""
    k = omega / C_LIGHT
    n1, n2, a = fiber.n1, fiber.n2, fiber.radius
    beta = np.asarray(beta, dtype=float)
    h = np.sqrt(n1 ** 2 * k ** 2 - beta ** 2)
    q = np.sqrt(beta ** 2 - n2 ** 2 * k ** 2)
    ha, qa = h * a, q * a
    j0 = numerics.bessel_j(0, ha)
    j1 = numerics.bessel_j(1, ha)
    k1 = numerics.bessel_k(1, qa)
    k1p = numerics.bessel_k_prime(1, qa)
    kk = k1p / (qa * k1)
    lhs = j0 / (ha * j1)
    rhs = (-(n1 ** 2 + n2 ** 2) / (2.0 * n1 ** 2) * kk
           + 1.0 / ha ** 2
           - np.sqrt(((n1 ** 2 - n2 ** 2) / (2.0 * n1 ** 2) * kk) ** 2
                     + beta ** 2 / (n1 ** 2 * k ** 2)
                     * (1.0 / qa ** 2 + 1.0 / ha ** 2) ** 2))
    return lhs, rhs


def eigenvalue_residual(fiber: FiberSpec, omega: float, beta: float) -> float:
    """Relative residual of the eigenvalue equation at a candidate beta."""
    lhs, rhs = _eigenvalue_sides(fiber, omega, beta)
    scale = max(abs(float(lhs)), abs(float(rhs)), 1e-300)
    return abs(float(lhs) - float(rhs)) / scale


def _solve_beta(fiber: FiberSpec, omega: float, tol: ToleranceConfig) -> float:
    """HE11 propagation constant: largest root of the eigenvalue equation."""
    k = omega / C_LIGHT
    lo = fiber.n2 * k * (1.0 + 1e-9)
    hi = fiber.n1 * k * (1.0 - 1e-9)
    if hi <= lo:
        raise ModeCutoffError("mode cutoff: no index contrast window")
    grid = np.linspace(lo, hi, 2000)
    lhs, rhs = _eigenvalue_sides(fiber, omega, grid)
    g = lhs - rhs
    sign_change = np.nonzero(np.diff(np.sign(g)) != 0)[0]
    if sign_change.size == 0:
        raise ModeCutoffError("mode cutoff: eigenvalue equation has no root")
    i = int(sign_change[-1])  # HE11 is the root with the largest beta

    def fun(beta):
        l, r = _eigenvalue_sides(fiber, omega, beta)
        return float(l - r)

    return numerics.find_root(fun, grid[i], grid[i + 1], tol)


def _s_parameter(fiber: FiberSpec, beta: float, h: float, q: float) -> float:
    a = fiber.radius
    ha, qa = h * a, q * a
    num = 1.0 / ha ** 2 + 1.0 / qa ** 2
    den = (numerics.bessel_j_prime(1, ha) / (ha * numerics.bessel_j(1, ha))
           + numerics.bessel_k_prime(1, qa) / (qa * numerics.bessel_k(1, qa)))
    return float(num / den)


def _profile_unnormalized(fiber: FiberSpec, beta: float, h: float, q: float,
                           s: float, r):
    """Reference profile components with the normalization constant set to 1."""
    a = fiber.radius
    r = np.asarray(r, dtype=float)
    inside = r < a
    e_r = np.empty(r.shape, dtype=complex)
    e_phi = np.empty(r.shape, dtype=complex)
    e_z = np.empty(r.shape, dtype=complex)
    ratio = numerics.bessel_k(1, q * a) / numerics.bessel_j(1, h * a)
    if np.any(inside):
        hr = h * r[inside]
        e_r[inside] = (1j * (q / h) * ratio
                       * ((1.0 - s) * numerics.bessel_j(0, hr)
                          - (1.0 + s) * numerics.bessel_j(2, hr)))
        e_phi[inside] = (-(q / h) * ratio
                         * ((1.0 - s) * numerics.bessel_j(0, hr)
                            + (1.0 + s) * numerics.bessel_j(2, hr)))
        e_z[inside] = (2.0 * q / beta) * ratio * numerics.bessel_j(1, hr)
    outside = ~inside
    if np.any(outside):
        qr = q * r[outside]
        e_r[outside] = 1j * ((1.0 - s) * numerics.bessel_k(0, qr)
                             + (1.0 + s) * numerics.bessel_k(2, qr))
        e_phi[outside] = -((1.0 - s) * numerics.bessel_k(0, qr)
                           - (1.0 + s) * numerics.bessel_k(2, qr))
        e_z[outside] = (2.0 * q / beta) * numerics.bessel_k(1, qr)
    return e_r, e_phi, e_z


def _norm_constant(fiber: FiberSpec, beta: float, h: float, q: float,
                   s: float, tol: ToleranceConfig) -> float:
    """Normalization constant from int n_ref^2 |e|^2 dA = 1."""
    a = fiber.radius

    def intensity(r):
        e_r, e_phi, e_z = _profile_unnormalized(fiber, beta, h, q, s,
                                                np.asarray([r]))
        return float(abs(e_r[0]) ** 2 + abs(e_phi[0]) ** 2
                     + abs(e_z[0]) ** 2) * r

    # Exterior tail: the integrand decays like exp(-2 q (r - a)).
    r_max = a + 25.0 / q
    interior = numerics.integrate(intensity, 0.0, a, tol)
    exterior = numerics.integrate(intensity, a, r_max, tol)
    total = 2.0 * np.pi * (fiber.n1 ** 2 * interior
                           + fiber.n2 ** 2 * exterior)
    return float(1.0 / np.sqrt(total))


def solve_mode(fiber: FiberSpec, omega: float,
               tol: ToleranceConfig = DEFAULT_TOL) -> ModeSolution:
    """Solve the HE11 mode at angular frequency omega.

    Warns (but proceeds) if the fiber is not single-mode at this
    frequency; raises ModeCutoffError when no guided root exists.
    """
    if fiber.v_number(omega) >= SINGLE_MODE_V:
        warnings.warn("fiber is not single-mode at this frequency "
                      f"(V = {fiber.v_number(omega):.3f})", stacklevel=2)
    k = omega / C_LIGHT
    beta = _solve_beta(fiber, omega, tol)
    h = float(np.sqrt(fiber.n1 ** 2 * k ** 2 - beta ** 2))
    q = float(np.sqrt(beta ** 2 - fiber.n2 ** 2 * k ** 2))
    s = _s_parameter(fiber, beta, h, q)
    norm_c = _norm_constant(fiber, beta, h, q, s, tol)
    # Group velocity from a central difference of beta(omega).
    d_omega = 1e-6 * omega
    beta_hi = _solve_beta(fiber, omega + d_omega, tol)
    beta_lo = _solve_beta(fiber, omega - d_omega, tol)
    v_group = float(2.0 * d_omega / (beta_hi - beta_lo))
    return ModeSolution(omega=omega, beta=beta, h=h, q=q, s_param=s,
                        norm_C=norm_c, v_group=v_group,
                        v_phase=float(omega / beta))


def profile_reference(mode: ModeSolution, fiber: FiberSpec,
                      r: float) -> GuidedProfile:
    """Normalized reference-mode profile at radius r (exterior branch at r = a)."""
    if r < 0.0:
        raise DomainError("radius must be nonnegative")
    e_r, e_phi, e_z = _profile_unnormalized(fiber, mode.beta, mode.h, mode.q,
                                            mode.s_param, np.asarray([r]))
    c = mode.norm_C
    return GuidedProfile(e_r=complex(c * e_r[0]), e_phi=complex(c * e_phi[0]),
                         e_z=complex(c * e_z[0]), r=float(r))


def profile_polarized(mode: ModeSolution, fiber: FiberSpec, r: float,
                      phi: float, f: int, p):
    """Cylindrical profile components of the mode (f, p) at (r, phi).

    f = +1/-1 is the propagation direction; p is +1/-1 for quasicircular
    polarization or "x"/"y" for quasilinear polarization.  The propagation
    phase factors exp(i f beta z) and exp(i l phi) are not included.
    """
    if f not in (+1, -1):
        raise DomainError("direction f must be +1 or -1")
    ref = profile_reference(mode, fiber, r)
    if p in (+1, -1):
        return (ref.e_r, p * ref.e_phi, f * ref.e_z)
    if p == "x":
        return (np.sqrt(2.0) * ref.e_r * np.cos(phi),
                np.sqrt(2.0) * 1j * ref.e_phi * np.sin(phi),
                np.sqrt(2.0) * f * ref.e_z * np.cos(phi))
    if p == "y":
        return (np.sqrt(2.0) * ref.e_r * np.sin(phi),
                -np.sqrt(2.0) * 1j * ref.e_phi * np.cos(phi),
                np.sqrt(2.0) * f * ref.e_z * np.sin(phi))
    raise DomainError(f"unknown polarization {p!r}")


def spherical_magnitudes(profile: GuidedProfile):
    """Magnitudes (|e_0|, |e_+1|, |e_-1|) of the spherical profile components."""
    abs_r, abs_phi = abs(profile.e_r), abs(profile.e_phi)
    return (abs(profile.e_z),
            (abs_r - abs_phi) / np.sqrt(2.0),
            (abs_r + abs_phi) / np.sqrt(2.0))

"""Radiation modes of the nanofiber and spontaneous emission into them.

The unguided continuum is labeled by (omega, beta, m, l) with |beta| below
the cladding light line, azimuthal order m, and two polarizations l = +/-.
Exterior fields combine Hankel functions of both kinds; the interior field
matches through the standard boundary conditions.  Emission rates follow
from the resonant couplings summed over m and l and integrated over beta.

Numerical note: the two exterior matching coefficients are complex
conjugates of each other (the matching expressions contain conjugated
Hankel functions, which must not be "simplified" away).  Near the light
line both Hankel functions diverge like q^-m and their sum cancels; the
cancellation is performed analytically here by expanding the exterior
field in the (J_m, Y_m) basis, whose two coefficients carry the small and
the large scale separately.  The mode orthogonality test arbitrates the
sign conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar, mu_0, pi

from . import numerics
from .atoms import HyperfineTransition, dipole_table
from .fiber import FiberSpec
from .numerics import DEFAULT_TOL, DomainError, ToleranceConfig

M_MAX = 30
_BETA_PANELS_START = 8
_BETA_PANELS_MAX = 64
_GL_ORDER = 64
_RATE_CONVERGENCE = 1e-4


@dataclass(frozen=True)
class RadiationMode:
    """One normalized radiation mode (omega, beta, m, l)."""

    omega: float
    beta: float
    m: int
    l: int  # polarization label, +1 or -1
    A: complex
    B: complex
    eta: float
    C_1: complex
    C_2: complex
    D_1: complex
    D_2: complex


class _ModeBasis:
    """Normalized radiation-mode coefficients, vectorized over beta.

    Exterior fields are expanded as  coef_j * J_m(q r) + coef_y * Y_m(q r);
    the J/Y coefficients are exact linear combinations of the Hankel-basis
    coefficients C_1, C_2 (electric) and D_1, D_2 (magnetic).
    """

    __slots__ = ("omega", "m", "h", "q", "a_in", "b_in",
                 "ez_j", "ez_y", "hd_j", "hd_y", "eta", "kappa_c", "kappa_d",
                 "g_re", "g_im", "h_re", "h_im")

    def __init__(self, fiber: FiberSpec, omega: float, beta, m: int, l: int):
        n1, n2, a = fiber.n1, fiber.n2, fiber.radius
        k = omega / C_LIGHT
        beta = np.asarray(beta, dtype=float)
        h = np.sqrt(k ** 2 * n1 ** 2 - beta ** 2)
        q = np.sqrt(k ** 2 * n2 ** 2 - beta ** 2)
        ha, qa = h * a, q * a

        jm_a = numerics.bessel_j(m, ha)
        jmp_a = numerics.bessel_j_prime(m, ha)
        jq = numerics.bessel_j(m, qa)
        jqp = numerics.bessel_j_prime(m, qa)
        yq = numerics.bessel_y(m, qa)
        yqp = numerics.bessel_y_prime(m, qa)

        # V_1, M_1, L_1 built on H^(1)* = J - iY; the second-kind set is
        # the complex conjugate, so real and imaginary parts suffice.
        v_c = m * k * beta / (a * h ** 2 * q ** 2) * (n2 ** 2 - n1 ** 2) * jm_a
        v_re, v_im = v_c * jq, -v_c * yq
        m_re = jmp_a * jq / h - jm_a * jqp / q
        m_im = -(jmp_a * yq / h - jm_a * yqp / q)
        l_re = n1 ** 2 * jmp_a * jq / h - n2 ** 2 * jm_a * jqp / q
        l_im = -(n1 ** 2 * jmp_a * yq / h - n2 ** 2 * jm_a * yqp / q)

        eta = epsilon_0 * C_LIGHT * np.sqrt(
            (n2 ** 2 * (v_re ** 2 + v_im ** 2) + l_re ** 2 + l_im ** 2)
            / (v_re ** 2 + v_im ** 2 + n2 ** 2 * (m_re ** 2 + m_im ** 2)))

        # G = L_1 - l eta mu0 c V_1 (electric), H = eps0 c V_1 - l eta M_1
        # (magnetic); their real parts stay small near the light line while
        # the imaginary parts carry the diverging Y_m scale.
        g_re = l_re - l * eta * mu_0 * C_LIGHT * v_re
        g_im = l_im - l * eta * mu_0 * C_LIGHT * v_im
        h_re = epsilon_0 * C_LIGHT * v_re - l * eta * m_re
        h_im = epsilon_0 * C_LIGHT * v_im - l * eta * m_im

        kappa_c = pi * q ** 2 * a / (4.0 * n2 ** 2)  # |C_1| = kappa_c |G|
        kappa_d = pi * q ** 2 * a / 4.0              # |D_1| = kappa_d |H|
        norm = (8.0 * pi * omega / q ** 2) * (
            n2 ** 2 * kappa_c ** 2 * (g_re ** 2 + g_im ** 2)
            + (mu_0 / epsilon_0) * kappa_d ** 2 * (h_re ** 2 + h_im ** 2))
        scale = 1.0 / np.sqrt(norm)

        self.omega = omega
        self.m = m
        self.h, self.q = h, q
        self.eta = eta
        self.a_in = scale + 0.0j            # interior electric coefficient
        self.b_in = 1j * l * eta * scale    # interior magnetic coefficient
        self.kappa_c, self.kappa_d = kappa_c, kappa_d
        self.g_re, self.g_im = g_re, g_im
        self.h_re, self.h_im = h_re, h_im
        # e_z exterior:  C_1 H^(1) + C_2 H^(2) = ez_j J + ez_y Y
        self.ez_j = 2.0 * kappa_c * g_im * scale + 0.0j
        self.ez_y = 2.0 * kappa_c * g_re * scale + 0.0j
        # magnetic combination:  D_1 H^(1) + D_2 H^(2) = hd_j J + hd_y Y
        self.hd_j = -2.0j * kappa_d * h_im * scale
        self.hd_y = -2.0j * kappa_d * h_re * scale

    def hankel_coefficients(self):
        """C_1, C_2, D_1, D_2 recovered from the (J, Y) expansion."""
        scale = self.a_in.real
        g = self.g_re + 1j * self.g_im
        h = self.h_re + 1j * self.h_im
        c1 = -1j * self.kappa_c * g * scale
        c2 = 1j * self.kappa_c * np.conj(g) * scale
        d1 = -self.kappa_d * h * scale
        d2 = self.kappa_d * np.conj(h) * scale
        return c1, c2, d1, d2


def _fields_at(fiber: FiberSpec, omega: float, beta, m: int, l: int,
               r: float):
    """Normalized cylindrical field components at radius r (vector in beta)."""
    beta = np.asarray(beta, dtype=float)
    b = _ModeBasis(fiber, omega, beta, m, l)
    if r < fiber.radius:
        hr = b.h * r
        jm = numerics.bessel_j(m, hr)
        jmp = numerics.bessel_j_prime(m, hr)
        e_r = (1j / b.h ** 2) * (beta * b.h * b.a_in * jmp
                                 + 1j * m * omega * mu_0 / r * b.b_in * jm)
        e_phi = (1j / b.h ** 2) * (1j * m * beta / r * b.a_in * jm
                                   - b.h * omega * mu_0 * b.b_in * jmp)
        e_z = b.a_in * jm
        return e_r, e_phi, e_z
    qr = b.q * r
    jm = numerics.bessel_j(m, qr)
    jmp = numerics.bessel_j_prime(m, qr)
    ym = numerics.bessel_y(m, qr)
    ymp = numerics.bessel_y_prime(m, qr)
    ez_comb = b.ez_j * jm + b.ez_y * ym
    ez_comb_p = b.ez_j * jmp + b.ez_y * ymp
    hd_comb = b.hd_j * jm + b.hd_y * ym
    hd_comb_p = b.hd_j * jmp + b.hd_y * ymp
    e_r = (1j / b.q ** 2) * (beta * b.q * ez_comb_p
                             + 1j * m * omega * mu_0 / r * hd_comb)
    e_phi = (1j / b.q ** 2) * (1j * m * beta / r * ez_comb
                               - b.q * omega * mu_0 * hd_comb_p)
    e_z = ez_comb
    return e_r, e_phi, e_z


def make_radiation_mode(fiber: FiberSpec, omega: float, beta: float, m: int,
                        l: int) -> RadiationMode:
    """Construct one radiation mode, normalized to unit mode constant."""
    if l not in (+1, -1):
        raise DomainError("polarization label l must be +1 or -1")
    k = omega / C_LIGHT
    if not abs(beta) < k * fiber.n2:
        raise DomainError("radiation modes require |beta| < k n2")
    b = _ModeBasis(fiber, omega, np.asarray([beta]), m, l)
    c1, c2, d1, d2 = b.hankel_coefficients()
    return RadiationMode(omega=omega, beta=float(beta), m=m, l=l,
                         A=complex(b.a_in[0]), B=complex(b.b_in[0]),
                         eta=float(b.eta[0]), C_1=complex(c1[0]),
                         C_2=complex(c2[0]), D_1=complex(d1[0]),
                         D_2=complex(d2[0]))


def radiation_profile(mode: RadiationMode, fiber: FiberSpec, r: float):
    """Cylindrical components (e_r, e_phi, e_z) of a radiation mode at r.

    The running phase exp(i (beta z + m phi)) is not included.
    """
    if r < 0.0:
        raise DomainError("radius must be nonnegative")
    if r == 0.0 and mode.m != 0:
        raise DomainError("the axis point is singular for m != 0")
    e_r, e_phi, e_z = _fields_at(fiber, mode.omega,
                                 np.asarray([mode.beta]), mode.m, mode.l, r)
    return complex(e_r[0]), complex(e_phi[0]), complex(e_z[0])


def _spherical_correlation(fiber: FiberSpec, omega: float, r: float,
                           m_tol: float, panels: int) -> np.ndarray:
    """Beta-integrated, (m, l)-summed correlations of spherical components.

    Returns the 3x3 Hermitian matrix E[s, s'] = 2 pi sum_{m,l} int dbeta
    e_s e_s'^*, with s, s' in (-1, 0, +1) evaluated at (r, phi = 0).
    """
    k = omega / C_LIGHT
    edge = k * fiber.n2
    nodes = []
    weights = []
    bounds = np.linspace(-edge, edge, panels + 1)
    for i in range(panels):
        x, w = numerics.gauss_legendre_nodes(bounds[i], bounds[i + 1],
                                             _GL_ORDER)
        nodes.append(x)
        weights.append(w)
    beta = np.concatenate(nodes)
    w = np.concatenate(weights)

    total = np.zeros((3, 3), dtype=complex)
    running = 0.0
    small_shells = 0
    for m_abs in range(0, M_MAX + 1):
        shell = np.zeros((3, 3), dtype=complex)
        for m in ({0} if m_abs == 0 else {m_abs, -m_abs}):
            for l in (+1, -1):
                e_r, e_phi, e_z = _fields_at(fiber, omega, beta, m, l, r)
                # spherical basis at phi = 0
                e_sph = np.array([(e_r - 1j * e_phi) / np.sqrt(2.0),
                                  e_z,
                                  -(e_r + 1j * e_phi) / np.sqrt(2.0)])
                shell += 2.0 * pi * np.einsum("ik,jk,k->ij", e_sph,
                                              e_sph.conj(), w)
        total += shell
        running = abs(np.trace(total).real)
        if m_abs >= 1 and abs(np.trace(shell).real) < m_tol * running:
            small_shells += 1
            if small_shells >= 2:
                break
        else:
            small_shells = 0
    return total


@lru_cache(maxsize=64)
def _correlation_converged(fiber: FiberSpec, omega: float, r: float,
                           m_tol: float) -> np.ndarray:
    panels = _BETA_PANELS_START
    previous = None
    result = None
    while panels <= _BETA_PANELS_MAX:
        result = _spherical_correlation(fiber, omega, r, m_tol, panels)
        trace = float(np.trace(result).real)
        if previous is not None and abs(trace - previous) <= \
                _RATE_CONVERGENCE * abs(previous):
            break
        previous = trace
        panels *= 2
    result.setflags(write=False)
    return result


def gamma_rad(fiber: FiberSpec, transition: HyperfineTransition, r: float,
              phi: float = 0.0,
              tol: ToleranceConfig = DEFAULT_TOL):
    """Radiative decay coefficients at radius r (atom at or outside the surface).

    Returns (matrix, scalar): the Hermitian matrix gamma_rad[e, e'] over
    excited sublevels, in rad/s, and its sublevel-averaged scalar
    trace / (2F'+1).  Results are cached per (fiber, transition, r).
    """
    if r < fiber.radius:
        raise DomainError("the atom must sit at or outside the fiber surface")
    corr = _correlation_converged(fiber, transition.omega0, float(r),
                                  tol.m_truncation_tol)
    d = dipole_table(transition)
    n_e, n_g = d.shape
    fp = transition.F_prime
    f = transition.F
    pref = transition.omega0 / (4.0 * pi * epsilon_0 * hbar)
    matrix = np.zeros((n_e, n_e), dtype=complex)
    # gamma_{ee'} = pref * sum_g (-1)^{q+q'} d_eg d_e'g E[-q, -q']
    for ie in range(n_e):
        me = ie - fp
        for ie2 in range(n_e):
            me2 = ie2 - fp
            if abs(me - me2) > 2:
                continue
            acc = 0.0j
            for ig in range(n_g):
                mg = ig - f
                q1, q2 = me - mg, me2 - mg
                if abs(q1) > 1 or abs(q2) > 1:
                    continue
                sign = (-1.0) ** (q1 + q2)
                acc += (sign * d[ie, ig] * d[ie2, ig]
                        * corr[1 - q1, 1 - q2])
            matrix[ie, ie2] = pref * acc
    scalar = float(np.trace(matrix).real) / n_e
    return matrix, scalar

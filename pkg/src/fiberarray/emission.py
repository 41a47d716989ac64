"""Atom-field coupling coefficients and decay-rate scalars.

Couplings are the z-independent amplitudes between one guided mode (f, p)
and one sublevel pair (e, g), scaled so that |coupling|^2 is a rate in
rad/s.  All couplings are evaluated at the atomic frequency; the
dependence on the probe detuning is carried by the scattering amplitudes
downstream, never by these tables.  Phase factors exp(i f beta z) likewise
live in the array propagator only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.constants import epsilon_0, hbar

from . import radiation
from .atoms import HyperfineTransition, dipole_table, reduced_dipole_F
from .fiber import FiberSpec, GuidedProfile, ModeSolution, profile_reference
from .fiber import spherical_magnitudes
from .numerics import DEFAULT_TOL, DomainError, ToleranceConfig

POLARIZATIONS_CIRCULAR = ("+", "-")
POLARIZATIONS_LINEAR = ("x", "y")


@dataclass(frozen=True)
class DecayRates:
    """Sublevel-averaged decay rates and directional scalars at one position."""

    gamma_gyd: float    # emission rate into guided modes, rad/s
    gamma_rad: float    # emission rate into the radiation continuum, rad/s
    gamma_total: float  # gamma_gyd + gamma_rad
    gamma_1d_y: float   # decay into y-polarized guided modes, rad/s
    gamma_s: float      # directional scalar u0 |e_r e_z|, rad/s
    u0: float           # coupling scale of the closed-form amplitudes
    u0_er2: float       # u0 |e_r|^2, rad/s
    u0_ephi2: float     # u0 |e_phi|^2, rad/s
    u0_ez2: float       # u0 |e_z|^2, rad/s
    r: float            # radial atom position, m


def coupling_scale(transition: HyperfineTransition,
                   mode: ModeSolution) -> float:
    """Common amplitude prefactor sqrt(omega0 / (2 eps0 hbar v_g))."""
    return float(np.sqrt(transition.omega0
                         / (2.0 * epsilon_0 * hbar * mode.v_group)))


def u0_scale(transition: HyperfineTransition, mode: ModeSolution) -> float:
    """Scalar u0 = 2 omega0 D_FF'^2 / (3 (2F+1) eps0 hbar v_g)."""
    d_sq = reduced_dipole_F(transition) ** 2
    return float(2.0 * transition.omega0 * d_sq
                 / (3.0 * transition.n_ground * epsilon_0 * hbar
                    * mode.v_group))


def _circular_coupling(transition: HyperfineTransition, prefactor: float,
                       mags, phi: float, f: int, l: int) -> np.ndarray:
    """Quasicircular coupling table over (e, g); mags = (|e_0|, |e_+1|, |e_-1|)."""
    d = dipole_table(transition)
    fp, fg = transition.F_prime, transition.F
    table = np.zeros(d.shape, dtype=complex)
    mag_by_index = {0: mags[0], 1: mags[1], -1: mags[2]}
    for ie in range(d.shape[0]):
        for ig in range(d.shape[1]):
            q = (ie - fp) - (ig - fg)
            if abs(q) > 1 or d[ie, ig] == 0.0:
                continue
            phase = (f ** (1 + q)) * np.exp(-1j * q * np.pi / 2.0) \
                * np.exp(1j * (l - q) * phi)
            table[ie, ig] = phase * prefactor * d[ie, ig] \
                * mag_by_index[-q * l]
    return table


def coupling(mode: ModeSolution, fiber: FiberSpec,
             transition: HyperfineTransition, r: float, phi: float,
             f: int, p) -> np.ndarray:
    """Coupling table over sublevel pairs for guided mode (f, p) at (r, phi).

    p is "+"/"-" (quasicircular) or "x"/"y" (quasilinear); entry [e, g] has
    units sqrt(rad/s).
    """
    if f not in (+1, -1):
        raise DomainError("direction f must be +1 or -1")
    if r < fiber.radius:
        warnings.warn("atom inside the fiber: couplings use the interior "
                      "field branch", stacklevel=2)
    prof = profile_reference(mode, fiber, r)
    mags = spherical_magnitudes(prof)
    pref = coupling_scale(transition, mode)
    if p == "+":
        return _circular_coupling(transition, pref, mags, phi, f, +1)
    if p == "-":
        return _circular_coupling(transition, pref, mags, phi, f, -1)
    plus = _circular_coupling(transition, pref, mags, phi, f, +1)
    minus = _circular_coupling(transition, pref, mags, phi, f, -1)
    if p == "x":
        return (plus + minus) / np.sqrt(2.0)
    if p == "y":
        return (plus - minus) / (1j * np.sqrt(2.0))
    raise DomainError(f"unknown polarization {p!r}")


def coupling_tables(mode: ModeSolution, fiber: FiberSpec,
                    transition: HyperfineTransition, r: float,
                    phi: float = 0.0, basis: str = "linear") -> dict:
    """All four (f, p) coupling tables of one polarization basis."""
    pols = POLARIZATIONS_LINEAR if basis == "linear" \
        else POLARIZATIONS_CIRCULAR
    return {(f, p): coupling(mode, fiber, transition, r, phi, f, p)
            for f in (+1, -1) for p in pols}


def guided_rates(tables: dict, transition: HyperfineTransition) -> dict:
    """Emission-rate tables from one basis worth of coupling tables.

    Returns per-(f, p) rate tables gamma[e, g] = |coupling|^2, the matrices
    gamma^(f)[e, e'] summed over polarizations, the guided matrix summed
    over directions, and the sublevel-averaged scalar.
    """
    gamma_fp_eg = {key: np.abs(tab) ** 2 for key, tab in tables.items()}
    directions = sorted({f for f, _ in tables})
    gamma_f_ee = {}
    for f in directions:
        acc = np.zeros(2 * (transition.n_excited,), dtype=complex)
        for (ff, p), tab in tables.items():
            if ff == f:
                acc += tab @ tab.conj().T
        gamma_f_ee[f] = acc
    gamma_guided_ee = sum(gamma_f_ee.values())
    scalar = float(np.trace(gamma_guided_ee).real) / transition.n_excited
    return {
        "gamma_fp_eg": gamma_fp_eg,
        "gamma_f_ee": gamma_f_ee,
        "gamma_guided_ee": gamma_guided_ee,
        "scalar": scalar,
    }


def gamma_1d_y(mode: ModeSolution, fiber: FiberSpec,
               transition: HyperfineTransition, r: float,
               phi: float = 0.0) -> float:
    """Ground-averaged decay rate into the y-polarized guided modes."""
    total = 0.0
    for f in (+1, -1):
        tab = coupling(mode, fiber, transition, r, phi, f, "y")
        total += float(np.sum(np.abs(tab) ** 2))
    return total / transition.n_ground


@lru_cache(maxsize=256)
def total_rates(fiber: FiberSpec, transition: HyperfineTransition,
                mode: ModeSolution, r: float,
                tol: ToleranceConfig = DEFAULT_TOL) -> DecayRates:
    """All decay scalars for an atom at radius r (phi = 0 geometry)."""
    if r < fiber.radius:
        raise DomainError("decay rates require the atom at or outside the "
                          "fiber surface")
    tables = coupling_tables(mode, fiber, transition, r, basis="linear")
    guided = guided_rates(tables, transition)
    _, rad_scalar = radiation.gamma_rad(fiber, transition, r, tol=tol)
    prof = profile_reference(mode, fiber, r)
    u0 = u0_scale(transition, mode)
    er2 = abs(prof.e_r) ** 2
    ephi2 = abs(prof.e_phi) ** 2
    ez2 = abs(prof.e_z) ** 2
    return DecayRates(
        gamma_gyd=guided["scalar"],
        gamma_rad=rad_scalar,
        gamma_total=guided["scalar"] + rad_scalar,
        gamma_1d_y=gamma_1d_y(mode, fiber, transition, r),
        gamma_s=u0 * np.sqrt(er2 * ez2),
        u0=u0,
        u0_er2=u0 * er2,
        u0_ephi2=u0 * ephi2,
        u0_ez2=u0 * ez2,
        r=float(r),
    )

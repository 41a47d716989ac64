"""Cesium D2 hyperfine transition data and dipole matrix elements.

The dipole algebra works on a single closed hyperfine line F -> F' with
sublevels quantized along the fiber axis.  Spherical tensor components of
the dipole operator between Zeeman sublevels are built from the reduced
J-basis element through standard 6j/3j recoupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar, pi

from .numerics import wigner_3j, wigner_6j

# 1 atomic unit of electric dipole moment, in C m.
ATOMIC_UNIT_DIPOLE = 8.4783536255e-30

CESIUM_D2_WAVELENGTH = 852e-9
# Reduced element <J'||D||J> for the cesium D2 line, in C m (6.347 a.u.).
CESIUM_D2_REDUCED_DIPOLE_J = 5.38e-29


def _triangle(a: float, b: float, c: float) -> bool:
    return abs(a - b) <= c <= a + b


@dataclass(frozen=True)
class HyperfineTransition:
    """One hyperfine line F -> F' of an alkali D line."""

    J: float
    J_prime: float
    I_nuc: float
    F: int
    F_prime: int
    omega0: float            # angular transition frequency, rad/s
    reduced_dipole_J: float  # <J'||D||J>, C m

    def __post_init__(self):
        if abs(self.F - self.F_prime) > 1:
            raise ValueError("dipole-forbidden line: |F - F'| must be <= 1")
        if not _triangle(self.J, self.I_nuc, self.F):
            raise ValueError("(J, I, F) violate the triangle rule")
        if not _triangle(self.J_prime, self.I_nuc, self.F_prime):
            raise ValueError("(J', I, F') violate the triangle rule")
        if not self.reduced_dipole_J > 0.0:
            raise ValueError("reduced dipole element must be positive")
        if not self.omega0 > 0.0:
            raise ValueError("transition frequency must be positive")

    @property
    def n_ground(self) -> int:
        return 2 * self.F + 1

    @property
    def n_excited(self) -> int:
        return 2 * self.F_prime + 1

    @property
    def ground_population(self) -> float:
        # Flat initial distribution over the ground Zeeman sublevels.
        return 1.0 / self.n_ground

    @property
    def wavelength(self) -> float:
        return 2.0 * pi * C_LIGHT / self.omega0


def cesium_d2_default() -> HyperfineTransition:
    """The closed cesium D2 line 6S1/2 F=4 -> 6P3/2 F'=5 at 852 nm."""
    return HyperfineTransition(
        J=0.5, J_prime=1.5, I_nuc=3.5, F=4, F_prime=5,
        omega0=2.0 * pi * C_LIGHT / CESIUM_D2_WAVELENGTH,
        reduced_dipole_J=CESIUM_D2_REDUCED_DIPOLE_J,
    )


@dataclass(frozen=True)
class DipoleElement:
    """Spherical tensor dipole component between |F' M'> and |F M>."""

    M: int
    M_prime: int
    q: int
    value: float  # C m, real in this phase convention


def dipole_component(transition: HyperfineTransition, M: int,
                     M_prime: int) -> DipoleElement:
    """d^(q) for the transition |F' M'> <-> |F M>, q = M' - M.

    Selection-rule violations give value 0 rather than an error.
    """
    q = M_prime - M
    if abs(M) > transition.F or abs(M_prime) > transition.F_prime or abs(q) > 1:
        return DipoleElement(M=M, M_prime=M_prime, q=q, value=0.0)
    F, Fp = transition.F, transition.F_prime
    sign = (-1.0) ** round(transition.I_nuc + transition.J_prime - M_prime)
    value = (sign * transition.reduced_dipole_J
             * np.sqrt((2 * F + 1) * (2 * Fp + 1))
             * wigner_6j(transition.J_prime, Fp, transition.I_nuc,
                         F, transition.J, 1)
             * wigner_3j(F, 1, Fp, M, q, -M_prime))
    return DipoleElement(M=M, M_prime=M_prime, q=q, value=float(value))


@lru_cache(maxsize=None)
def dipole_table(transition: HyperfineTransition) -> np.ndarray:
    """d^(M'-M) for all sublevel pairs, indexed [M'+F', M+F].  Read-only."""
    table = np.zeros((transition.n_excited, transition.n_ground))
    for M_prime in range(-transition.F_prime, transition.F_prime + 1):
        for M in range(-transition.F, transition.F + 1):
            el = dipole_component(transition, M, M_prime)
            table[M_prime + transition.F_prime, M + transition.F] = el.value
    table.setflags(write=False)
    return table


def reduced_dipole_F(transition: HyperfineTransition) -> float:
    """Reduced dipole element D_FF' in the hyperfine basis, C m."""
    F, Fp = transition.F, transition.F_prime
    six_j = wigner_6j(F, 1, Fp, transition.J_prime, transition.I_nuc,
                      transition.J)
    d_sq = (2 * F + 1) * (2 * Fp + 1) * six_j ** 2 \
        * transition.reduced_dipole_J ** 2
    return float(np.sqrt(d_sq))


def free_space_rate(transition: HyperfineTransition) -> float:
    """Free-space decay rate of one excited sublevel of a closed line, rad/s.

    Weisskopf-Wigner with the total line strength shared equally by the
    2F'+1 excited sublevels; for a closed transition this equals the
    natural linewidth.
    """
    d_sq = reduced_dipole_F(transition) ** 2
    return (transition.omega0 ** 3 * d_sq
            / (3.0 * pi * epsilon_0 * hbar * C_LIGHT ** 3
               * transition.n_excited))

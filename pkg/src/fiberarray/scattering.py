"""Single-atom scattering matrix and field-transfer matrix.

The 4x4 scattering matrix maps the four guided modes (two directions, two
polarizations) onto each other in the linear, quasistationary,
weak-excitation regime.  It is always built from explicit sublevel sums
over the coupling tables with a flat ground-state population; the
polarization-channel closed forms act as cross-checks, which keeps the
path open for non-flat populations later.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import emission
from .atoms import HyperfineTransition
from .emission import DecayRates
from .fiber import FiberSpec, ModeSolution
from .numerics import DomainError

MODE_ORDER = {
    "linear": ((+1, "x"), (+1, "y"), (-1, "x"), (-1, "y")),
    "circular": ((+1, "+"), (+1, "-"), (-1, "+"), (-1, "-")),
}


class InvalidRatesError(ValueError):
    """Decay rates unusable for a scattering amplitude (gamma <= 0)."""


class SingularTransferError(ArithmeticError):
    """The outgoing-field system is singular and cannot be inverted."""


@dataclass(frozen=True)
class ScatteringMatrix:
    """Single-atom scattering matrix over one 4-mode basis."""

    matrix: np.ndarray  # 4x4 complex, rows/columns ordered per MODE_ORDER
    basis: str          # "linear" or "circular"
    delta: float        # probe detuning, rad/s

    @property
    def mode_order(self):
        return MODE_ORDER[self.basis]


@dataclass(frozen=True)
class PolarizationChannel:
    """One decoupled quasilinear channel (xi = x or y) of a single atom."""

    xi: str
    s_r: complex
    s_phi: complex
    s_z: complex
    m11: complex
    m12: complex
    m21: complex
    m22: complex
    refl: complex
    trans: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])


def scattering_matrix(mode: ModeSolution, fiber: FiberSpec,
                      transition: HyperfineTransition, rates: DecayRates,
                      delta: float, r: float | None = None,
                      phi: float = 0.0,
                      basis: str = "linear") -> ScatteringMatrix:
    """Scattering matrix by explicit sublevel sums with flat populations."""
    if not rates.gamma_total > 0.0:
        raise InvalidRatesError("total decay rate must be positive")
    if basis not in MODE_ORDER:
        raise DomainError(f"unknown basis {basis!r}")
    position = rates.r if r is None else r
    order = MODE_ORDER[basis]
    tables = [emission.coupling(mode, fiber, transition, position, phi, f, p)
              for f, p in order]
    p_g = transition.ground_population
    denom = rates.gamma_total - 2j * delta
    s = np.empty((4, 4), dtype=complex)
    for i, (f_i, _) in enumerate(order):
        for j in range(4):
            s[i, j] = (2.0 * f_i / denom) * p_g \
                * np.sum(np.conj(tables[i]) * tables[j])
    return ScatteringMatrix(matrix=s, basis=basis, delta=float(delta))


def s_element_closed(rates: DecayRates, delta: float, f: int, f_prime: int,
                     xi: str) -> complex:
    """Closed-form S_{f xi, f' xi} for the decoupled quasilinear channels."""
    denom = rates.gamma_total - 2j * delta
    if xi == "x":
        return f * (rates.u0_er2 + f * f_prime * rates.u0_ez2) / denom
    if xi == "y":
        return f * rates.u0_ephi2 / denom
    raise DomainError(f"unknown channel {xi!r}")


def optical_depth(rates: DecayRates, delta: float, polarization: str) -> float:
    """Optical depth per atom, D = 2 Re(f S_{fp,fp}), even in delta."""
    gamma = rates.gamma_total
    lorentz = gamma / (gamma ** 2 + 4.0 * delta ** 2)
    if polarization == "x":
        return 2.0 * (rates.u0_er2 + rates.u0_ez2) * lorentz
    if polarization == "y":
        return 2.0 * rates.u0_ephi2 * lorentz
    if polarization in ("circ", "circ+", "circ-", "+", "-"):
        return (rates.u0_er2 + rates.u0_ephi2 + rates.u0_ez2) * lorentz
    raise DomainError(f"unknown polarization {polarization!r}")


def optical_depth_from_matrix(s: ScatteringMatrix, f: int, p) -> float:
    """Optical depth per atom read off a diagonal scattering amplitude."""
    order = s.mode_order
    i = order.index((f, p))
    return float(2.0 * f * s.matrix[i, i].real)


def single_atom_transfer(xi: str, s_r: complex, s_phi: complex,
                         s_z: complex) -> PolarizationChannel:
    """Single-atom 2x2 transfer matrix of one quasilinear channel.

    The channel amplitudes are s_r = u0 |e_r|^2 / (gamma - 2 i delta) and
    its phi/z analogs.
    """
    if xi == "x":
        denom = 1.0 - s_r - s_z
        if denom == 0.0:
            raise SingularTransferError("1 - S_r - S_z vanished")
        m11 = (1.0 - 2.0 * s_r) * (1.0 - 2.0 * s_z) / denom
        m22 = 1.0 / denom
        m21 = (s_r - s_z) / denom
        m12 = -m21
        refl = -s_r + s_z
        trans = 1.0 - s_r - s_z
    elif xi == "y":
        denom = 1.0 - s_phi
        if denom == 0.0:
            raise SingularTransferError("1 - S_phi vanished")
        m11 = (1.0 - 2.0 * s_phi) / denom
        m22 = 1.0 / denom
        m21 = s_phi / denom
        m12 = -m21
        refl = -s_phi
        trans = 1.0 - s_phi
    else:
        raise DomainError(f"unknown channel {xi!r}")
    return PolarizationChannel(xi=xi, s_r=s_r, s_phi=s_phi, s_z=s_z,
                               m11=m11, m12=m12, m21=m21, m22=m22,
                               refl=refl, trans=trans)


def channel_s_values(rates: DecayRates, delta: float,
                     lossless: bool = False):
    """(S_r, S_phi, S_z) at detuning delta; optionally with Re parts zeroed.

    Zeroing the real parts removes the scattering loss, which is how the
    band-gap conditions are defined.
    """
    denom = rates.gamma_total - 2j * delta
    values = (rates.u0_er2 / denom, rates.u0_ephi2 / denom,
              rates.u0_ez2 / denom)
    if lossless:
        values = tuple(1j * v.imag for v in values)
    return values


def polarization_channel(rates: DecayRates, delta: float, xi: str,
                         lossless: bool = False) -> PolarizationChannel:
    """Closed-form channel data for xi = "x" or "y" at detuning delta."""
    s_r, s_phi, s_z = channel_s_values(rates, delta, lossless)
    return single_atom_transfer(xi, s_r, s_phi, s_z)


def transfer_2x2_generic(s_pp: complex, s_pm: complex, s_mp: complex,
                         s_mm: complex) -> np.ndarray:
    """Transfer matrix from the four channel scattering amplitudes.

    Index order (+, -): s_pm scatters the backward mode into the forward
    one, and so on.
    """
    denom = 1.0 + s_mm
    if denom == 0.0:
        raise SingularTransferError("1 + S_-- vanished")
    m11 = 1.0 - s_pp + s_pm * s_mp / denom
    m12 = -s_pm / denom
    m21 = -s_mp / denom
    m22 = 1.0 / denom
    return np.array([[m11, m12], [m21, m22]])


def general_transfer_4x4(s) -> np.ndarray:
    """4x4 field-transfer matrix M = (1 + S^-)^(-1) (1 - S^+).

    S^+ / S^- keep the columns of the incoming forward / backward modes.
    """
    matrix = s.matrix if isinstance(s, ScatteringMatrix) else np.asarray(s)
    s_plus = matrix.copy()
    s_plus[:, 2:] = 0.0
    s_minus = matrix.copy()
    s_minus[:, :2] = 0.0
    lhs = np.eye(4, dtype=complex) + s_minus
    if abs(np.linalg.det(lhs)) < 1e-300:
        raise SingularTransferError("1 + S^- is singular")
    return np.linalg.solve(lhs, np.eye(4, dtype=complex) - s_plus)


def channel_from_4x4(m4: np.ndarray, xi: str) -> np.ndarray:
    """Extract one quasilinear 2x2 channel from a 4x4 transfer matrix."""
    idx = {"x": [0, 2], "y": [1, 3]}[xi]
    return m4[np.ix_(idx, idx)]

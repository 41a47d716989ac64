"""Numerical kernels shared by the whole package.

Bessel/Hankel families (with derivatives via the standard recurrences),
Wigner 3j/6j symbols computed by Racah sums with log-factorials, bracketed
root finding, and adaptive / fixed-order Gauss-Legendre quadrature.  The
Bessel evaluations and the adaptive integrator are thin wrappers around
scipy so that every caller goes through one audited surface with uniform
domain checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize
from scipy import special as _special


class DomainError(ValueError):
    """Argument outside the mathematical domain of the requested function."""


class BracketingError(ValueError):
    """The supplied interval does not bracket a sign change."""


class QuadratureError(RuntimeError):
    """Adaptive integration did not converge; carries the best estimate."""

    def __init__(self, message: str, best_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class ToleranceConfig:
    """Package-wide numerical tolerances."""

    root_rel_tol: float = 1e-12
    quad_rel_tol: float = 1e-10
    series_abs_tol: float = 1e-14
    m_truncation_tol: float = 1e-6

    def __post_init__(self):
        for name in ("root_rel_tol", "quad_rel_tol", "series_abs_tol",
                     "m_truncation_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.root_rel_tol > 1e-8:
            raise ValueError("root_rel_tol must not exceed 1e-8")


DEFAULT_TOL = ToleranceConfig()


# ----------------------------------------------------------------------
# Bessel / Hankel families
# ----------------------------------------------------------------------

def _require_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite argument to Bessel function")


def bessel_j(order: int, x):
    """Bessel function of the first kind J_n(x)."""
    _require_finite(x)
    return _special.jv(order, x)


def bessel_j_prime(order: int, x):
    """J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2."""
    _require_finite(x)
    return 0.5 * (_special.jv(order - 1, x) - _special.jv(order + 1, x))


def bessel_y(order: int, x):
    """Bessel function of the second kind Y_n(x), x > 0."""
    _require_finite(x)
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("Y_n requires x > 0")
    return _special.yv(order, x)


def bessel_y_prime(order: int, x):
    _require_finite(x)
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("Y_n' requires x > 0")
    return 0.5 * (_special.yv(order - 1, x) - _special.yv(order + 1, x))


def bessel_i(order: int, x):
    """Modified Bessel function of the first kind I_n(x)."""
    _require_finite(x)
    return _special.iv(order, x)


def bessel_i_prime(order: int, x):
    _require_finite(x)
    return 0.5 * (_special.iv(order - 1, x) + _special.iv(order + 1, x))


def bessel_k(order: int, x):
    """Modified Bessel function of the second kind K_n(x), x > 0."""
    _require_finite(x)
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("K_n requires x > 0")
    return _special.kv(order, x)


def bessel_k_prime(order: int, x):
    """K_n'(x) = -(K_{n-1}(x) + K_{n+1}(x)) / 2."""
    _require_finite(x)
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("K_n' requires x > 0")
    return -0.5 * (_special.kv(order - 1, x) + _special.kv(order + 1, x))


def hankel(kind: int, order: int, x):
    """Hankel function H_m^(kind)(x) = J_m(x) +/- i Y_m(x), x > 0.

    Negative integer orders follow H_{-m} = (-1)^m H_m.
    """
    _require_finite(x)
    if kind not in (1, 2):
        raise DomainError("Hankel kind must be 1 or 2")
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("Hankel functions require x > 0")
    fn = _special.hankel1 if kind == 1 else _special.hankel2
    return fn(order, x)


def hankel_prime(kind: int, order: int, x):
    """Derivative via H_m' = (H_{m-1} - H_{m+1}) / 2."""
    _require_finite(x)
    if kind not in (1, 2):
        raise DomainError("Hankel kind must be 1 or 2")
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("Hankel functions require x > 0")
    fn = _special.hankel1 if kind == 1 else _special.hankel2
    return 0.5 * (fn(order - 1, x) - fn(order + 1, x))


# ----------------------------------------------------------------------
# Wigner 3j / 6j symbols (Racah sums, log-factorial accumulation)
# ----------------------------------------------------------------------

_LOG_FACT = np.array([math.lgamma(n + 1) for n in range(201)])


def _log_fact(n: int) -> float:
    if n < 0:
        raise DomainError("negative factorial argument")
    return float(_LOG_FACT[n])


def _doubled(value: float, name: str) -> int:
    """Return 2*value as an exact integer; reject non-half-integers."""
    doubled = 2.0 * float(value)
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise DomainError(f"{name} = {value} is not integer or half-integer")
    return int(rounded)


def _log_triangle(ta: int, tb: int, tc: int) -> float:
    # Delta(abc): arguments are doubled spins; all four factorial
    # arguments must be nonnegative even integers at this point.
    return (_log_fact((ta + tb - tc) // 2)
            + _log_fact((ta - tb + tc) // 2)
            + _log_fact((-ta + tb + tc) // 2)
            - _log_fact((ta + tb + tc) // 2 + 1))


def _triangle_ok(ta: int, tb: int, tc: int) -> bool:
    return (ta + tb >= tc and abs(ta - tb) <= tc and (ta + tb + tc) % 2 == 0)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3 / m1 m2 m3).

    Selection-rule violations return 0.0; non-half-integer spins raise
    DomainError.
    """
    tj = [_doubled(j, f"j{i + 1}") for i, j in enumerate((j1, j2, j3))]
    tm = [_doubled(m, f"m{i + 1}") for i, m in enumerate((m1, m2, m3))]
    if any(t < 0 for t in tj):
        raise DomainError("angular momenta must be nonnegative")
    if tm[0] + tm[1] + tm[2] != 0:
        return 0.0
    if any(abs(tm[i]) > tj[i] for i in range(3)):
        return 0.0
    if any((tj[i] - tm[i]) % 2 != 0 for i in range(3)):
        return 0.0
    if not _triangle_ok(*tj):
        return 0.0

    tj1, tj2, tj3 = tj
    tm1, tm2, tm3 = tm
    # Racah sum limits (all quantities are plain integers here).
    t1 = (tj2 - tj3 - tm1) // 2
    t2 = (tj1 - tj3 + tm2) // 2
    t3 = (tj1 + tj2 - tj3) // 2
    t4 = (tj1 - tm1) // 2
    t5 = (tj2 + tm2) // 2
    tmin = max(0, t1, t2)
    tmax = min(t3, t4, t5)
    if tmax < tmin:
        return 0.0

    log_pref = 0.5 * (_log_triangle(tj1, tj2, tj3)
                      + _log_fact((tj1 + tm1) // 2)
                      + _log_fact((tj1 - tm1) // 2)
                      + _log_fact((tj2 + tm2) // 2)
                      + _log_fact((tj2 - tm2) // 2)
                      + _log_fact((tj3 + tm3) // 2)
                      + _log_fact((tj3 - tm3) // 2))
    terms = []
    for t in range(tmin, tmax + 1):
        log_term = -(_log_fact(t) + _log_fact(t - t1) + _log_fact(t - t2)
                     + _log_fact(t3 - t) + _log_fact(t4 - t)
                     + _log_fact(t5 - t))
        terms.append((-1.0) ** t * math.exp(log_pref + log_term))
    phase = (-1.0) ** ((tj1 - tj2 - tm3) // 2)
    return phase * math.fsum(terms)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3 / j4 j5 j6}.

    Triad violations return 0.0; non-half-integer spins raise DomainError.
    """
    t = [_doubled(j, f"j{i + 1}") for i, j in enumerate((j1, j2, j3, j4, j5, j6))]
    if any(x < 0 for x in t):
        raise DomainError("angular momenta must be nonnegative")
    tj1, tj2, tj3, tj4, tj5, tj6 = t
    triads = ((tj1, tj2, tj3), (tj1, tj5, tj6), (tj4, tj2, tj6), (tj4, tj5, tj3))
    if not all(_triangle_ok(*tr) for tr in triads):
        return 0.0

    s1 = (tj1 + tj2 + tj3) // 2
    s2 = (tj1 + tj5 + tj6) // 2
    s3 = (tj4 + tj2 + tj6) // 2
    s4 = (tj4 + tj5 + tj3) // 2
    s5 = (tj1 + tj2 + tj4 + tj5) // 2
    s6 = (tj2 + tj3 + tj5 + tj6) // 2
    s7 = (tj3 + tj1 + tj6 + tj4) // 2
    tmin = max(s1, s2, s3, s4)
    tmax = min(s5, s6, s7)
    if tmax < tmin:
        return 0.0

    log_pref = 0.5 * sum(_log_triangle(*tr) for tr in triads)
    terms = []
    for z in range(tmin, tmax + 1):
        log_term = (_log_fact(z + 1)
                    - _log_fact(z - s1) - _log_fact(z - s2)
                    - _log_fact(z - s3) - _log_fact(z - s4)
                    - _log_fact(s5 - z) - _log_fact(s6 - z)
                    - _log_fact(s7 - z))
        terms.append((-1.0) ** z * math.exp(log_pref + log_term))
    return math.fsum(terms)


# ----------------------------------------------------------------------
# Root finding and quadrature
# ----------------------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float,
              tol: ToleranceConfig | float | None = None) -> float:
    """Deterministic bracketed root of f on [lo, hi] (Brent's method).

    Raises BracketingError unless f(lo) and f(hi) have opposite signs.
    """
    if tol is None:
        rel = DEFAULT_TOL.root_rel_tol
    elif isinstance(tol, ToleranceConfig):
        rel = tol.root_rel_tol
    else:
        rel = float(tol)
    flo = f(lo)
    fhi = f(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)):
        raise DomainError("non-finite function value at bracket endpoint")
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if flo * fhi > 0.0:
        raise BracketingError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    return float(_optimize.brentq(f, lo, hi, rtol=max(rel, 4e-16),
                                  xtol=1e-300))


def integrate(f: Callable[[float], complex], a: float, b: float,
              tol: ToleranceConfig | float | None = None,
              limit: int = 200):
    """Adaptive quadrature of a real- or complex-valued integrand on [a, b].

    Raises QuadratureError (carrying the best estimate) if the adaptive
    scheme reports non-convergence.
    """
    if tol is None:
        rel = DEFAULT_TOL.quad_rel_tol
    elif isinstance(tol, ToleranceConfig):
        rel = tol.quad_rel_tol
    else:
        rel = float(tol)

    probe = f(0.5 * (a + b))
    is_complex = np.iscomplexobj(probe)

    def _quad(g):
        out = _integrate.quad(g, a, b, epsabs=1e-300, epsrel=rel,
                              limit=limit, full_output=1)
        value, _err = out[0], out[1]
        if len(out) > 3:  # ier != 0 appends an explanation message
            raise QuadratureError(out[3], value)
        return value

    if is_complex:
        real = _quad(lambda x: f(x).real)
        imag = _quad(lambda x: f(x).imag)
        return real + 1j * imag
    return _quad(f)


def gauss_legendre_nodes(a: float, b: float, n: int):
    """Nodes and weights of n-point Gauss-Legendre quadrature on [a, b]."""
    if n < 1:
        raise DomainError("Gauss-Legendre order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def gauss_legendre(f: Callable, a: float, b: float, n: int):
    """Fixed-order Gauss-Legendre quadrature; exact for degree <= 2n-1."""
    x, w = gauss_legendre_nodes(a, b, n)
    try:
        vals = np.asarray(f(x))
        if vals.shape != x.shape:
            raise ValueError
    except Exception:
        vals = np.asarray([f(xi) for xi in x])
    return np.sum(w * vals)

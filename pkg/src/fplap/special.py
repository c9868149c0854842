"""Dimensional reduction constants for profile functions."""

from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.special import gamma


def sphere_area(k: int) -> float:
    """Surface area of the unit k-sphere embedded in R^{k+1}.

    ``sphere_area(0) == 2`` (two points), ``sphere_area(1) == 2*pi``.
    """
    if k < 0:
        raise ValueError("sphere dimension must be >= 0")
    return float(2.0 * np.pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0))


def angular_factor(n: int, ps: float) -> float:
    """Adaptive quadrature of ``int_0^inf t^{n-2} (1+t^2)^{-(n+ps)/2} dt``.

    This is the radial leftover of integrating the kernel over the n-1
    coordinates orthogonal to a profile direction; see
    :func:`angular_factor_closed` for the Beta-function cross-check.
    The substitution ``t = tan(theta)`` maps the integral to the smooth
    ``int_0^{pi/2} sin^{n-2} cos^{ps}``, which integrates to machine accuracy.
    """
    if n < 2:
        raise ValueError("angular factor is defined for n >= 2")
    val, _ = integrate.quad(
        lambda th: np.sin(th) ** (n - 2.0) * np.cos(th) ** ps,
        0.0,
        0.5 * np.pi,
        epsabs=1.0e-14,
        epsrel=1.0e-13,
        limit=200,
    )
    return float(val)


def angular_factor_closed(n: int, ps: float) -> float:
    """Closed form of :func:`angular_factor` via the Beta function."""
    if n < 2:
        raise ValueError("angular factor is defined for n >= 2")
    a = 0.5 * (n - 1.0)
    b = 0.5 * (ps + 1.0)
    return float(gamma(a) * gamma(b) / (2.0 * gamma(a + b)))


def profile_reduction_constant(n: int, ps: float) -> float:
    """Multiplier turning the 1D profile integral into the nD operator value."""
    if n == 1:
        return 1.0
    return sphere_area(n - 2) * angular_factor(n, ps)

"""Closed-form eigen-constants of one-sided power profiles.

The operator maps ``x -> (x)_+^nu`` on the half-line to ``C(nu) x^{(p-1)nu - ps}``,
and the profile ``x -> (x_n)_+^nu`` in n dimensions to the same power of
``x_n`` times ``C(nu, n)``. This module computes those constants and verifies
the identity against the independent operator quadrature.

The defining integral ``int (1 - z_+^nu)^{p-1} |1-z|^{-1-ps} dz`` is evaluated
in a folded form: the negative axis contributes exactly ``1/(ps)`` and the
substitution ``z -> 1/z`` maps ``(1, inf)`` onto ``(0, 1)``, combining the two
pieces into a single integrand whose ``z -> 1`` singularity is damped by the
factor ``1 - z^{ps - nu(p-1) - 1}``. No principal value is needed numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import QuadratureError
from .fields import FracParams, halfspace_power_field
from .operator import EvalResult, eval_profile_nd, eval_pv, signed_power
from .quadrature import QuadratureSpec, integrate_adaptive, log_edges
from .special import angular_factor, sphere_area

_Z_FLOOR = 1.0e-14  # analytic closure below this abscissa


def _one_minus_pow(z, e):
    """``1 - z**e`` for z > 0 without cancellation near z = 1."""
    return -np.expm1(e * np.log(z))


def left_tail_term(s: float, p: float) -> float:
    """Exact contribution of the negative axis to the defining integral."""
    _validate_sp(s, p)
    return 1.0 / (p * s)


def _validate_sp(s, p):
    if not 0.0 < s < 1.0:
        raise ValueError("order s must lie in (0, 1)")
    if p <= 1.0:
        raise ValueError("exponent p must exceed 1")


def _validate_nu(s, nu, allow_equal=True):
    hi_ok = nu <= s if allow_equal else nu < s
    if not (0.0 < nu and hi_ok):
        raise ValueError(f"profile exponent nu={nu:g} outside the admissible range")


def _folded_integral(s, p, nu, rel_tol):
    """Value and error of the z>0 part in the single-fold representation."""
    ps = p * s
    alpha = ps - nu * (p - 1.0) - 1.0

    def integrand(z):
        return (
            signed_power(_one_minus_pow(z, nu), p)
            * _one_minus_pow(z, alpha)
            * (1.0 - z) ** (-1.0 - ps)
        )

    lo, hi = _Z_FLOOR, 1.0 - 1.0e-13
    edges = np.unique(
        np.concatenate([log_edges(lo, 0.5, 6), 1.0 - log_edges(1.0 - hi, 0.5, 6)[::-1]])
    )
    out = integrate_adaptive(integrand, edges, rel_tol=rel_tol, nodes=14, max_panels=4000)

    # analytic closure at z -> 0: integrand ~ (1 - z^alpha)
    if alpha != 0.0:
        head = lo - lo ** (alpha + 1.0) / (alpha + 1.0)
    else:
        head = 0.0
    head_err = ((p - 1.0) * lo ** min(nu, 1.0) + (1.0 + ps) * lo) * (abs(head) + lo)

    # power-model closure at z -> 1 with the known local exponent p-1-ps
    gamma = p - 1.0 - ps
    w = 1.0 - hi
    f_edge = integrand(np.array([hi]))[0]
    tail = f_edge * w / (gamma + 1.0)
    tail_err = 0.5 * abs(tail)

    return out.value + head + tail, out.error + head_err + tail_err, out.converged


def _subtracted_integral(s, p, nu, rel_tol):
    """The representation that subtracts the degenerate ``nu = s`` profile."""
    ps = p * s
    alpha = ps - nu * (p - 1.0) - 1.0

    def f1(z):
        return (
            (signed_power(_one_minus_pow(z, nu), p) - signed_power(_one_minus_pow(z, s), p))
            * _one_minus_pow(z, alpha)
            * (1.0 - z) ** (-1.0 - ps)
        )

    def f2(z):
        return (
            signed_power(_one_minus_pow(z, s), p)
            * (z ** (s - 1.0) - z**alpha)
            * (1.0 - z) ** (-1.0 - ps)
        )

    lo, hi = _Z_FLOOR, 1.0 - 1.0e-13
    edges = np.unique(
        np.concatenate([log_edges(lo, 0.5, 6), 1.0 - log_edges(1.0 - hi, 0.5, 6)[::-1]])
    )
    total, err, ok = 0.0, 0.0, True
    for f in (f1, f2):
        out = integrate_adaptive(f, edges, rel_tol=rel_tol, nodes=14, max_panels=4000)
        total += out.value
        err += out.error
        ok = ok and out.converged
    # z -> 0 closures: f1 ~ -(p-1) z^nu (1 - z^alpha), f2 ~ z^{s-1} - z^alpha
    head2 = lo**s / s - lo ** (alpha + 1.0) / (alpha + 1.0)
    head_err = (p - 1.0) * lo ** min(nu, 1.0) * (1.0 + abs(head2)) + abs(head2) * (
        (p - 1.0) * lo**s + (1.0 + ps) * lo
    )
    w = 1.0 - hi
    gamma = p - 1.0 - ps
    f_edge = f1(np.array([hi]))[0] + f2(np.array([hi]))[0]
    tail = f_edge * w / (gamma + 1.0)
    return total + head2 + tail, err + head_err + 0.5 * abs(tail), ok


def _raw_pv_integral(s, p, nu, rel_tol):
    """Direct two-sided quadrature with symmetric pairing around z = 1."""
    ps = p * s

    def paired(h):
        up = -np.expm1(nu * np.log1p(h))
        dn = -np.expm1(nu * np.log1p(-h))
        return (signed_power(up, p) + signed_power(dn, p)) * h ** (-1.0 - ps)

    def left(z):
        return (1.0 - z) ** (-1.0 - ps)

    def right(z):
        return signed_power(_one_minus_pow(z, nu), p) * (z - 1.0) ** (-1.0 - ps)

    z_big = 1.0e10
    total, err, ok = 0.0, 0.0, True
    out = integrate_adaptive(paired, log_edges(1.0e-13, 1.0, 6), rel_tol=rel_tol, nodes=14)
    total, err, ok = out.value, out.error, out.converged
    # remainder of the paired cascade below 1e-13: integrand ~ h^{p-1-ps}
    h0 = 1.0e-13
    total += paired(np.array([h0]))[0] * h0 / (p - ps)

    neg = integrate_adaptive(
        lambda t: left(-t), log_edges(1.0e-6, z_big, 4), rel_tol=rel_tol, nodes=12
    )
    total += neg.value + 1.0e-6  # [0, 1e-6) contributes z to first order
    total += (1.0 + z_big) ** (-ps) / ps
    err += neg.error + 1.0e-12
    ok = ok and neg.converged

    # z = 1/w maps (2, inf) exactly onto (0, 1/2); the endpoint power w^alpha
    # is integrable and closed below 1e-12 analytically
    alpha = ps - nu * (p - 1.0) - 1.0

    def far_folded(w):
        return -(
            signed_power(_one_minus_pow(w, nu), p)
            * w**alpha
            * (1.0 - w) ** (-1.0 - ps)
        )

    w0 = 1.0e-12
    far = integrate_adaptive(far_folded, log_edges(w0, 0.5, 6), rel_tol=rel_tol, nodes=14)
    total += far.value - w0 ** (alpha + 1.0) / (alpha + 1.0)
    err += far.error + 2.0 * w0 ** (alpha + 1.0) * w0 ** min(nu, 1.0)
    ok = ok and far.converged
    return total, err, ok


def c_nu(
    s: float,
    p: float,
    nu: float,
    method: str = "folded",
    rel_tol: float = 1.0e-9,
) -> float:
    """The 1D eigen-constant of the ``nu``-power profile, ``0 < nu <= s``.

    ``method`` selects the representation: ``"folded"`` (default),
    ``"subtracted"`` (the form obtained by removing the degenerate ``nu = s``
    profile), or ``"raw-pv"`` (two-sided quadrature with symmetric pairing).
    All three agree to quadrature accuracy; the folded form is cheapest.
    """
    _validate_sp(s, p)
    _validate_nu(s, nu)
    if method == "folded":
        val, err, ok = _folded_integral(s, p, nu, rel_tol)
        val += left_tail_term(s, p)
    elif method == "subtracted":
        val, err, ok = _subtracted_integral(s, p, nu, rel_tol)
    elif method == "raw-pv":
        val, err, ok = _raw_pv_integral(s, p, nu, rel_tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not ok:
        raise QuadratureError(f"eigen-constant quadrature did not converge ({method})", val, err)
    return float(val)


@dataclass(frozen=True)
class EigenConstants:
    """The 1D and nD eigen-constants with their reduction factors.

    ``c_nu_n == c_nu * angular_factor * sphere_area_factor`` by construction;
    the sphere-area factor is kept explicit so either convention (with or
    without it) is recoverable.
    """

    nu: float
    c_nu: float
    c_nu_n: float
    angular_factor: float
    sphere_area_factor: float

    def __post_init__(self):
        if self.angular_factor <= 0.0:
            raise ValueError("angular factor must be positive")
        prod = self.c_nu * self.angular_factor * self.sphere_area_factor
        if abs(prod - self.c_nu_n) > 1.0e-12 * max(1.0, abs(self.c_nu_n)):
            raise ValueError("c_nu_n is not consistent with its factors")


def c_nu_n(s: float, p: float, nu: float, n: int) -> EigenConstants:
    """Eigen-constants for the nD half-space profile, ``n >= 2``."""
    if n < 2:
        raise ValueError("use c_nu for the 1D constant")
    base = c_nu(s, p, nu)
    if nu < s and base <= 0.0:
        raise QuadratureError("1D eigen-constant should be positive below the degenerate exponent")
    ang = angular_factor(n, p * s)
    area = sphere_area(n - 2)
    return EigenConstants(
        nu=nu, c_nu=base, c_nu_n=base * ang * area, angular_factor=ang, sphere_area_factor=area
    )


@dataclass(frozen=True)
class EigenVerifyReport:
    """Per-probe comparison of operator quadrature against the closed form."""

    nu: float
    probes: tuple
    operator_values: tuple
    closed_form_values: tuple
    abs_deviation: tuple
    rel_deviation: tuple
    max_rel_deviation: float
    degenerate: bool
    failures: tuple

    def to_dict(self):
        return {
            "nu": self.nu,
            "probes": list(self.probes),
            "operator_values": list(self.operator_values),
            "closed_form_values": list(self.closed_form_values),
            "abs_deviation": list(self.abs_deviation),
            "rel_deviation": list(self.rel_deviation),
            "max_rel_deviation": self.max_rel_deviation,
            "degenerate": self.degenerate,
            "failures": list(self.failures),
        }


def verify_halfspace_eigen(
    params: FracParams,
    nu: float,
    probe_points: Iterable[float],
    quad: Optional[QuadratureSpec] = None,
) -> EigenVerifyReport:
    """Check the power-profile identity at positive probe points.

    For each probe ``x > 0`` the operator of the ``nu``-power profile is
    evaluated by quadrature and compared against ``C * x^{(p-1)nu - ps}``
    with the constant from :func:`c_nu` (1D) or :func:`c_nu_n` (nD). At the
    degenerate exponent ``nu = s`` both sides vanish and the report carries
    absolute deviations instead of relative ones.
    """
    _validate_nu(params.s, nu)
    quad = quad or QuadratureSpec()
    degenerate = nu == params.s
    if params.n == 1:
        const = c_nu(params.s, params.p, nu) * params.normalization
    else:
        const = c_nu_n(params.s, params.p, nu, params.n).c_nu_n * params.normalization
    field = halfspace_power_field(nu, 1)
    expo = (params.p - 1.0) * nu - params.ps

    probes, ops, refs, abss, rels, fails = [], [], [], [], [], []
    for x in probe_points:
        x = float(x)
        if x <= 0.0:
            raise ValueError("probe points must be positive")
        q = quad.with_inner_radius(0.5 * x)  # the profile kinks at the origin
        try:
            if params.n == 1:
                res: EvalResult = eval_pv(field, [x], params, q)
            else:
                res = eval_profile_nd(field, x, params, q)
            ref = const * x**expo
            probes.append(x)
            ops.append(res.value)
            refs.append(ref)
            abss.append(abs(res.value - ref))
            rels.append(abs(res.value - ref) / max(abs(ref), 1.0e-300))
            if not res.converged:
                fails.append(f"probe {x:g}: quadrature flagged non-converged")
        except (QuadratureError, ValueError) as exc:  # pragma: no cover - defensive
            probes.append(x)
            ops.append(float("nan"))
            refs.append(const * x**expo)
            abss.append(float("inf"))
            rels.append(float("inf"))
            fails.append(f"probe {x:g}: {exc}")
    return EigenVerifyReport(
        nu=nu,
        probes=tuple(probes),
        operator_values=tuple(ops),
        closed_form_values=tuple(refs),
        abs_deviation=tuple(abss),
        rel_deviation=tuple(rels),
        max_rel_deviation=max(rels) if rels else float("nan"),
        degenerate=degenerate,
        failures=tuple(fails),
    )

"""Annular barrier and bounded supersolution checks.

Three constructions are verified numerically:

* the annular barrier ``phi(x) = (|x|^2 - 1)_+^nu`` whose operator value on a
  thin shell outside the unit ball stays above a positive multiple of
  ``(|x| - 1)^{nu(p-1) - ps}``, with the blow-up limit along the inner edge
  equal to ``2^{(p-1)nu}`` times the half-space eigen-constant;
* the bounded profile ``g(x) = min{(2 - x_n)_+^s, 5^s}`` whose operator value
  is strictly positive on the unit ball (the integrand is supported on the
  far slab ``y_n <= -3``, so no principal value is involved);
* the rescaling ``g~(x) = C g(x/R)`` that turns the positive lower bound into
  a supersolution dominating any bounded right-hand side, which yields the
  uniform bound used by the comparison argument.

The shell checks require ``phi`` to satisfy the integrability certificate
``2 nu (p-1) < ps``; constructors raise otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import c_nu, c_nu_n
from .errors import QuadratureError
from .fields import FracParams, ScalarField, TailModel
from .operator import eval_profile_nd, eval_pv, eval_symmetrized, signed_power
from .quadrature import QuadratureSpec, aitken_limit, integrate_adaptive, log_edges, power_tail_closure
from .special import profile_reduction_constant


def phi(points, nu: float):
    """Pointwise annular barrier ``(|x|^2 - 1)_+^nu``; vectorized over rows."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r2 = np.sum(pts * pts, axis=1)
    out = np.maximum(r2 - 1.0, 0.0) ** nu
    return float(out[0]) if np.asarray(points).ndim == 1 else out


def phi_field(nu: float, n: int) -> ScalarField:
    if not 0.0 < nu < 1.0:
        raise ValueError("barrier exponent must lie in (0, 1)")
    return ScalarField(
        evaluator=lambda pts: np.maximum(np.sum(pts * pts, axis=1) - 1.0, 0.0) ** nu,
        dim=n,
        smoothness_radius=1.0,  # callers cap the shell by the distance to |x| = 1
        tail=TailModel(amplitude=1.0, exponent=2.0 * nu, radius=1.0),
    )


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1.0e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1.0e-300)), 0.0)
    out = a / (a + b)
    return out


def smooth_step_slope_bound() -> float:
    """Numerically certified bound on ``sup |smooth_step'|`` (sampled, padded)."""
    t = np.linspace(1.0e-4, 1.0 - 1.0e-4, 20001)
    h = 1.0e-6
    slopes = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h)
    return float(np.max(np.abs(slopes)) * 1.02)


@dataclass(frozen=True)
class BarrierSpec:
    """Shell geometry and amplitudes for the combined comparison function.

    The cutoff rises smoothly from 0 on the unit ball to 1 outside radius
    ``1 + epsilon_shell``; ``C`` scales the barrier part and ``C0`` records
    the claimed (or empirically found) lower-bound constant.
    """

    nu: float
    C: float = 1.0
    epsilon_shell: float = 0.5
    C0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.nu < 1.0:
            raise ValueError("nu must lie in (0, 1)")
        if self.C <= 0.0 or self.epsilon_shell <= 0.0:
            raise ValueError("C and epsilon_shell must be positive")

    @property
    def cutoff_inner(self) -> float:
        return 1.0

    @property
    def cutoff_outer(self) -> float:
        return 1.0 + self.epsilon_shell


def cutoff_field(spec: BarrierSpec, n: int) -> ScalarField:
    """Smooth radial cutoff for the given shell: 0 inside B_1, 1 outside B_{1+eps}."""
    eps = spec.epsilon_shell

    def ev(pts):
        r = np.sqrt(np.sum(pts * pts, axis=1))
        return smooth_step((r - 1.0) / eps)

    return ScalarField(
        evaluator=ev,
        dim=n,
        smoothness_radius=1.0e6,
        tail=TailModel(amplitude=1.0, exponent=0.0, radius=spec.cutoff_outer),
    )


def cutoff_gradient_bound(spec: BarrierSpec) -> float:
    """Explicit gradient bound of the cutoff, needed by remainder estimates."""
    return smooth_step_slope_bound() / spec.epsilon_shell


def combined_barrier_field(spec: BarrierSpec, n: int) -> ScalarField:
    """The comparison function ``C * phi + cutoff``."""
    base = phi_field(spec.nu, n)
    cut = cutoff_field(spec, n)

    def ev(pts):
        return spec.C * base.evaluator(pts) + cut.evaluator(pts)

    beta = base.tail.exponent
    return ScalarField(
        evaluator=ev,
        dim=n,
        smoothness_radius=base.smoothness_radius,
        tail=TailModel(amplitude=spec.C + 1.0, exponent=beta, radius=spec.cutoff_outer),
    )


# ---------------------------------------------------------------------------
# shell lower bound


@dataclass(frozen=True)
class BarrierBoundReport:
    distances: tuple
    operator_values: tuple
    ratios: tuple
    min_ratio: float
    positive: bool
    limit_reference: float
    failures: tuple

    def to_dict(self):
        return {
            "distances": list(self.distances),
            "operator_values": list(self.operator_values),
            "ratios": list(self.ratios),
            "min_ratio": self.min_ratio,
            "positive": self.positive,
            "limit_reference": self.limit_reference,
            "failures": list(self.failures),
        }


def _eigen_reference(params: FracParams, nu: float) -> float:
    if params.n == 1:
        return c_nu(params.s, params.p, nu)
    return c_nu_n(params.s, params.p, nu, params.n).c_nu_n


def barrier_lower_bound_check(
    spec: BarrierSpec,
    params: FracParams,
    shell_samples,
    quad: Optional[QuadratureSpec] = None,
) -> BarrierBoundReport:
    """Ratios of the barrier's operator values to the claimed boundary rate.

    Each sample must lie strictly inside the open shell ``1 < |x| < 1 + eps``.
    The reported minimum ratio is the empirical lower-bound constant; it
    should stay bounded away from zero as samples approach the inner edge,
    where the exact limit is ``2^{(p-1)nu}`` times the eigen-constant.
    """
    if params.p <= 2.0:
        raise ValueError("the shell lower bound is checked for p > 2")
    if not 0.0 < spec.nu < params.s:
        raise ValueError("barrier exponent must lie in (0, s)")
    quad = quad or QuadratureSpec(outer_radius=1.0e6, target_rel_tol=1.0e-4)
    field = phi_field(spec.nu, params.n)
    expo = spec.nu * (params.p - 1.0) - params.ps
    limit_ref = 2.0 ** ((params.p - 1.0) * spec.nu) * _eigen_reference(params, spec.nu)

    ds, vals, ratios, fails = [], [], [], []
    for x in np.atleast_2d(np.asarray(shell_samples, dtype=float)):
        d = float(np.linalg.norm(x)) - 1.0
        if not 0.0 < d < spec.epsilon_shell:
            raise ValueError(f"sample {x} is outside the open shell")
        try:
            res = eval_symmetrized(field, x, params, quad.with_inner_radius(0.5 * d))
            ds.append(d)
            vals.append(res.value)
            ratios.append(res.value / d**expo)
            if not res.converged:
                fails.append(f"sample at distance {d:g}: non-converged quadrature")
        except QuadratureError as exc:
            ds.append(d)
            vals.append(float("nan"))
            ratios.append(float("nan"))
            fails.append(f"sample at distance {d:g}: {exc}")
    finite = [r for r in ratios if np.isfinite(r)]
    min_ratio = min(finite) if finite else float("nan")
    return BarrierBoundReport(
        distances=tuple(ds),
        operator_values=tuple(vals),
        ratios=tuple(ratios),
        min_ratio=min_ratio,
        positive=bool(finite) and min_ratio > 0.0,
        limit_reference=limit_ref,
        failures=tuple(fails),
    )


@dataclass(frozen=True)
class ScaledLimitReport:
    d_sequence: tuple
    scaled_values: tuple
    last_value: float
    extrapolated: float
    target: float
    rel_deviation: float
    failures: tuple

    def to_dict(self):
        return {
            "d_sequence": list(self.d_sequence),
            "scaled_values": list(self.scaled_values),
            "last_value": self.last_value,
            "extrapolated": self.extrapolated,
            "target": self.target,
            "rel_deviation": self.rel_deviation,
            "failures": list(self.failures),
        }


def scaled_limit_scan(
    spec: BarrierSpec,
    params: FracParams,
    d_sequence: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    field: Optional[ScalarField] = None,
) -> ScaledLimitReport:
    """Blow-up limit of the barrier along the inner shell edge.

    Evaluates ``d^{ps - nu(p-1)}`` times the operator of the barrier at
    ``(0, ..., 0, 1 + d)`` for the decreasing distances ``d`` and
    extrapolates the limit, which equals ``2^{(p-1)nu}`` times the
    half-space eigen-constant.
    """
    d_seq = [float(d) for d in d_sequence]
    if any(d2 >= d1 for d1, d2 in zip(d_seq, d_seq[1:])) or d_seq[-1] <= 0.0:
        raise ValueError("d_sequence must be strictly decreasing and positive")
    if not 0.0 < spec.nu < params.s:
        raise ValueError("barrier exponent must lie in (0, s)")
    quad = quad or QuadratureSpec(outer_radius=1.0e6, target_rel_tol=1.0e-4)
    u = field if field is not None else phi_field(spec.nu, params.n)
    target = 2.0 ** ((params.p - 1.0) * spec.nu) * _eigen_reference(params, spec.nu)
    scale_expo = params.ps - spec.nu * (params.p - 1.0)

    vals, fails = [], []
    for d in d_seq:
        x = np.zeros(params.n)
        x[-1] = 1.0 + d
        res = eval_symmetrized(u, x, params, quad.with_inner_radius(0.5 * d))
        vals.append(d**scale_expo * res.value)
        if not res.converged:
            fails.append(f"d={d:g}: non-converged quadrature")
    extrapolated = aitken_limit(vals)
    return ScaledLimitReport(
        d_sequence=tuple(d_seq),
        scaled_values=tuple(vals),
        last_value=vals[-1],
        extrapolated=extrapolated,
        target=target,
        rel_deviation=abs(extrapolated - target) / abs(target),
        failures=tuple(fails),
    )


# ---------------------------------------------------------------------------
# bounded supersolution


def g_field(s: float, n: int) -> ScalarField:
    """The capped profile ``min{(2 - x_n)_+^s, 5^s}``."""

    def ev(pts):
        return np.minimum(np.maximum(2.0 - pts[:, -1], 0.0) ** s, 5.0**s)

    return ScalarField(
        evaluator=ev,
        dim=n,
        smoothness_radius=0.9,  # kinks sit at x_n = 2 and x_n = -3
        tail=TailModel(amplitude=5.0**s, exponent=0.0, radius=0.0),
    )


def _capped_profile_integral(x_n: float, params: FracParams, rel_tol: float):
    """The far-slab integral giving the operator of the capped profile.

    For evaluation points with ``x_n`` in (-1, 1) the capped profile differs
    from the uncapped one only on ``y_n <= -3``, and the uncapped profile is
    annihilated by the operator there, so the operator value reduces to this
    ordinary (non-singular) integral; the flat directions integrate exactly
    into the profile reduction constant.
    """
    s, p, ps = params.s, params.p, params.ps
    gx = (2.0 - x_n) ** s
    cap = 5.0**s
    head = signed_power(gx - cap, p)

    def integrand(t):
        return (head - signed_power(gx - (2.0 + t) ** s, p)) * (x_n + t) ** (-1.0 - ps)

    t_far = 1.0e10
    out = integrate_adaptive(integrand, log_edges(3.0, t_far, 6), rel_tol=rel_tol, nodes=12)
    rem, rem_err = power_tail_closure(float(integrand(np.array([t_far]))[0]), t_far, -(1.0 + s))
    value = out.value + rem
    return value, out.error + rem_err, out.converged


@dataclass(frozen=True)
class SupersolutionReport:
    samples: tuple
    values: tuple
    min_value: float
    positive: bool

    def to_dict(self):
        return {
            "samples": [list(map(float, s)) for s in self.samples],
            "values": list(self.values),
            "min_value": self.min_value,
            "positive": self.positive,
        }


def g_supersolution_check(
    params: FracParams,
    samples,
    quad: Optional[QuadratureSpec] = None,
    rel_tol: float = 1.0e-8,
) -> SupersolutionReport:
    """Positivity of the capped profile's operator values on the unit ball.

    The value depends on the sample only through its last coordinate (the
    profile direction); rotating the flat coordinates leaves it unchanged.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.shape[1] != params.n:
        raise ValueError("sample dimension does not match params.n")
    if np.any(np.linalg.norm(pts, axis=1) >= 1.0):
        raise ValueError("samples must lie in the open unit ball")
    red = profile_reduction_constant(params.n, params.ps) * params.normalization
    values = []
    for x in pts:
        val, _, ok = _capped_profile_integral(float(x[-1]), params, rel_tol)
        if not ok:
            raise QuadratureError("capped-profile integral did not converge", val)
        values.append(red * val)
    min_value = min(values)
    return SupersolutionReport(
        samples=tuple(map(tuple, pts)),
        values=tuple(values),
        min_value=min_value,
        positive=min_value > 0.0,
    )


@dataclass(frozen=True)
class RescaleReport:
    probes: tuple
    lhs: tuple
    rhs: tuple
    rel_deviation: tuple
    max_rel_deviation: float
    identity_ok: bool
    c_empirical: float
    required_amplitude: float
    linf_bound: float

    def to_dict(self):
        return {
            "probes": list(self.probes),
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "rel_deviation": list(self.rel_deviation),
            "max_rel_deviation": self.max_rel_deviation,
            "identity_ok": self.identity_ok,
            "c_empirical": self.c_empirical,
            "required_amplitude": self.required_amplitude,
            "linf_bound": self.linf_bound,
        }


def rescale_supersolution(
    C: float,
    R: float,
    params: FracParams,
    f_sup_norm: float,
    quad: Optional[QuadratureSpec] = None,
    identity_tol: float = 1.0e-3,
) -> RescaleReport:
    """Verify the rescaling identity and size the supersolution amplitude.

    The rescaled profile ``C g(x/R)`` has operator value ``C^{p-1} R^{-ps}``
    times the operator of ``g`` at ``x/R``; both sides are computed by
    independent evaluations at probe points. The minimal amplitude makes
    ``C^{p-1} c / R^{ps} >= f_sup_norm`` with ``c`` the empirical minimum of
    the positivity check, and the resulting uniform bound is
    ``C_min * max g`` over the rescaled ball.
    """
    if C <= 0.0 or R <= 0.0:
        raise ValueError("C and R must be positive")
    if f_sup_norm < 0.0:
        raise ValueError("f_sup_norm must be nonnegative")
    quad = quad or QuadratureSpec(target_rel_tol=1.0e-6)
    s, p, ps = params.s, params.p, params.ps
    red = profile_reduction_constant(params.n, ps) * params.normalization

    # empirical positivity minimum over a deterministic sample of the ball
    xs = np.linspace(-0.9, 0.9, 20)
    vals = [red * _capped_profile_integral(float(t), params, 1.0e-8)[0] for t in xs]
    c_emp = float(min(vals))
    if c_emp <= 0.0:
        raise QuadratureError("positivity minimum is not positive; cannot size the amplitude")

    # identity check: lhs evaluates the rescaled field, rhs rescales the value
    probes = (0.0, 0.3 * R, -0.5 * R)
    lhs, rhs, rels = [], [], []
    scaled = _rescaled_g_profile(C, R, s)
    for t in probes:
        inner = 0.5 * min(2.0 * R - t, t + 3.0 * R)
        q = quad.with_inner_radius(inner)
        if params.n == 1:
            lv = eval_pv(scaled, [t], params, q).value
            rv_base = eval_pv(g_field(s, 1), [t / R], params, q.with_inner_radius(inner / R)).value
        else:
            lv = eval_profile_nd(scaled, t, params, q).value
            rv_base = eval_profile_nd(
                g_field(s, 1), t / R, params, q.with_inner_radius(inner / R)
            ).value
        rv = C ** (p - 1.0) * R ** (-ps) * rv_base
        lhs.append(lv)
        rhs.append(rv)
        rels.append(abs(lv - rv) / max(abs(rv), 1.0e-300))
    max_rel = max(rels)

    c_required = 0.0 if f_sup_norm == 0.0 else (f_sup_norm * R**ps / c_emp) ** (1.0 / (p - 1.0))
    linf_bound = c_required * 3.0**s  # max of g over the unit ball is (2+1)^s
    return RescaleReport(
        probes=probes,
        lhs=tuple(lhs),
        rhs=tuple(rhs),
        rel_deviation=tuple(rels),
        max_rel_deviation=max_rel,
        identity_ok=max_rel < identity_tol,
        c_empirical=c_emp,
        required_amplitude=c_required,
        linf_bound=linf_bound,
    )


def _rescaled_g_profile(C: float, R: float, s: float) -> ScalarField:
    """1D profile ``t -> C * min{(2 - t/R)_+^s, 5^s}``."""

    def ev(pts):
        return C * np.minimum(np.maximum(2.0 - pts[:, -1] / R, 0.0) ** s, 5.0**s)

    return ScalarField(
        evaluator=ev,
        dim=1,
        smoothness_radius=0.9 * R,
        tail=TailModel(amplitude=C * 5.0**s, exponent=0.0, radius=0.0),
    )

"""Problem parameters, tail certificates, and evaluatable scalar fields.

A :class:`ScalarField` bundles a deterministic vectorized evaluator with a
power-law tail certificate and a smoothness radius asserted by the caller.
Every constructor here produces tail models that are honest upper bounds,
so the operator evaluators can close their far-field integrals rigorously.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class FracParams:
    """Order and exponent of the operator plus the kernel normalization.

    The normalization constant in front of the principal-value integral is
    not pinned by the usual formulations; it defaults to 1 so that computed
    values match the unnormalized integrals. External comparisons against a
    differently normalized convention must rescale.
    """

    n: int
    s: float
    p: float
    normalization: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if not 0.0 < self.s < 1.0:
            raise ValueError("order s must lie in (0, 1)")
        if self.p <= 1.0:
            raise ValueError("exponent p must exceed 1")
        if self.normalization <= 0.0:
            raise ValueError("normalization must be positive")

    @property
    def ps(self) -> float:
        return self.p * self.s


@dataclass(frozen=True)
class TailModel:
    """Certificate ``|u(y)| <= amplitude * (1+|y|)^exponent`` for ``|y| > radius``."""

    amplitude: float
    exponent: float
    radius: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError("tail amplitude must be nonnegative")
        if self.radius < 0.0:
            raise ValueError("tail radius must be nonnegative")

    def validate_against(self, params: FracParams) -> None:
        """Check the integrability condition (p-1)*exponent < p*s."""
        if self.amplitude > 0.0 and (params.p - 1.0) * self.exponent >= params.ps:
            raise ValueError(
                f"tail grows too fast: (p-1)*beta = {(params.p - 1.0) * self.exponent:g} "
                f"is not < ps = {params.ps:g}"
            )


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function on R^n with metadata required by the evaluators.

    ``evaluator`` maps an array of shape (m, n) to values of shape (m,); it
    must be deterministic and total. ``smoothness_radius`` is the caller's
    assertion that the field is C^{1,1} on a ball of that radius around any
    point it will be evaluated at. Optional ``gradient`` (m, n) -> (m, n) and
    ``hessian`` (m, n) -> (m, n, n) evaluators switch the singular shell of
    the operator quadrature to its second-order-expansion form.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    dim: int
    smoothness_radius: float
    tail: TailModel
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("field dimension must be >= 1")
        if self.smoothness_radius <= 0.0:
            raise ValueError("smoothness_radius must be positive")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[-1]}, field has {self.dim}")
        out = np.asarray(self.evaluator(pts), dtype=float)
        return out.reshape(pts.shape[0])

    def value_at(self, point) -> float:
        return float(self(np.atleast_2d(np.asarray(point, dtype=float)))[0])


def check_derivative_consistency(field: ScalarField, probes, step: float, tol: float) -> float:
    """Max deviation between declared derivatives and centered differences.

    ``step`` sets the difference scale; raises if the deviation exceeds
    ``tol``. Returns the observed maximum for reporting.
    """
    pts = np.atleast_2d(np.asarray(probes, dtype=float))
    worst = 0.0
    for k in range(field.dim):
        e = np.zeros(field.dim)
        e[k] = step
        fd = (field(pts + e) - field(pts - e)) / (2.0 * step)
        if field.gradient is not None:
            g = np.asarray(field.gradient(pts), dtype=float).reshape(len(pts), field.dim)
            worst = max(worst, float(np.max(np.abs(g[:, k] - fd))))
        if field.hessian is not None:
            sd = (field(pts + e) - 2.0 * field(pts) + field(pts - e)) / step**2
            h = np.asarray(field.hessian(pts), dtype=float).reshape(len(pts), field.dim, field.dim)
            worst = max(worst, float(np.max(np.abs(h[:, k, k] - sd))))
    if worst > tol:
        raise ValueError(f"derivative evaluators deviate from finite differences by {worst:g} > {tol:g}")
    return worst


# ---------------------------------------------------------------------------
# constructors


def constant_field(c: float, n: int) -> ScalarField:
    return ScalarField(
        evaluator=lambda pts: np.full(pts.shape[0], float(c)),
        dim=n,
        smoothness_radius=np.inf if c == 0 else 1.0e12,
        tail=TailModel(amplitude=abs(float(c)), exponent=0.0, radius=0.0),
        gradient=lambda pts: np.zeros_like(pts),
        hessian=lambda pts: np.zeros((pts.shape[0], n, n)),
    )


def halfspace_power_field(nu: float, n: int) -> ScalarField:
    """The one-sided power profile ``x -> (x_n)_+^nu`` with 0 < nu < 1."""
    if not 0.0 < nu < 1.0:
        raise ValueError("profile exponent must lie in (0, 1)")

    def ev(pts):
        return np.maximum(pts[:, -1], 0.0) ** nu

    # |u(y)| = (y_n)_+^nu <= (1+|y|)^nu everywhere
    return ScalarField(
        evaluator=ev,
        dim=n,
        smoothness_radius=1.0,  # callers cap the singular shell near the crease
        tail=TailModel(amplitude=1.0, exponent=nu, radius=1.0),
    )


def gaussian_mixture_field(n: int, centers, widths, weights) -> ScalarField:
    """Smooth rapidly decaying test field: sum of Gaussian bumps."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    widths = np.asarray(widths, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if centers.shape[1] != n:
        raise ValueError("centers must have shape (k, n)")
    if np.any(widths <= 0.0):
        raise ValueError("widths must be positive")

    def ev(pts):
        out = np.zeros(pts.shape[0])
        for c, w, a in zip(centers, widths, weights):
            d2 = np.sum((pts - c[None, :]) ** 2, axis=1)
            out += a * np.exp(-d2 / (2.0 * w * w))
        return out

    # crude but certified tail: bound beyond radius r0 by a decaying power
    r0 = float(np.max(np.linalg.norm(centers, axis=1)) + 6.0 * np.max(widths) + 1.0)
    beta = -float(n) - 2.0
    rr = np.linspace(r0, r0 + 20.0 * np.max(widths), 400)
    envelope = np.zeros_like(rr)
    for c, w, a in zip(centers, widths, weights):
        dist = np.maximum(rr - np.linalg.norm(c), 0.0)
        envelope += abs(a) * np.exp(-(dist**2) / (2.0 * w * w))
    amp = float(np.max(envelope * (1.0 + rr) ** (-beta)) * 1.05) + 1.0e-300
    return ScalarField(
        evaluator=ev,
        dim=n,
        smoothness_radius=1.0e6,
        tail=TailModel(amplitude=amp, exponent=beta, radius=r0),
    )


def random_smooth_field(rng: np.random.Generator, n: int, bumps: int = 3) -> ScalarField:
    """Seeded random Gaussian mixture used by the randomized property suites."""
    k = int(rng.integers(1, bumps + 1))
    centers = rng.uniform(-1.5, 1.5, size=(k, n))
    widths = rng.uniform(0.4, 1.5, size=k)
    weights = rng.uniform(-1.0, 1.0, size=k)
    if np.all(np.abs(weights) < 0.1):
        weights[0] = 0.5
    return gaussian_mixture_field(n, centers, widths, weights)


# ---------------------------------------------------------------------------
# transforms (tail certificates are propagated conservatively)


def scale_field(u: ScalarField, lam: float) -> ScalarField:
    """Amplitude scaling ``x -> lam * u(x)``."""
    grad = None if u.gradient is None else (lambda pts: lam * u.gradient(pts))
    hess = None if u.hessian is None else (lambda pts: lam * u.hessian(pts))
    return ScalarField(
        evaluator=lambda pts: lam * u.evaluator(pts),
        dim=u.dim,
        smoothness_radius=u.smoothness_radius,
        tail=TailModel(abs(lam) * u.tail.amplitude, u.tail.exponent, u.tail.radius),
        gradient=grad,
        hessian=hess,
    )


def dilate_field(u: ScalarField, factor: float) -> ScalarField:
    """Spatial dilation ``v(x) = u(x / factor)`` with factor > 0."""
    if factor <= 0.0:
        raise ValueError("dilation factor must be positive")
    beta = u.tail.exponent
    # (1+|y|/f) <= (1+|y|) * max(1, 1/f); for beta<0 use (1+|y|/f) >= (1+|y|)/max(1,f)
    if beta >= 0.0:
        amp = u.tail.amplitude * max(1.0, 1.0 / factor) ** beta
    else:
        amp = u.tail.amplitude * max(1.0, factor) ** (-beta)
    return ScalarField(
        evaluator=lambda pts: u.evaluator(pts / factor),
        dim=u.dim,
        smoothness_radius=u.smoothness_radius * factor,
        tail=TailModel(amp, beta, u.tail.radius * factor),
    )


def translate_field(u: ScalarField, shift) -> ScalarField:
    """Translation ``v(x) = u(x - shift)``."""
    a = np.asarray(shift, dtype=float).reshape(1, u.dim)
    norm_a = float(np.linalg.norm(a))
    beta = u.tail.exponent
    amp = u.tail.amplitude * (1.0 + norm_a) ** abs(beta)
    return ScalarField(
        evaluator=lambda pts: u.evaluator(pts - a),
        dim=u.dim,
        smoothness_radius=u.smoothness_radius,
        tail=TailModel(amp, beta, u.tail.radius + norm_a),
    )


def combine_fields(terms, smoothness_radius: Optional[float] = None) -> ScalarField:
    """Linear combination ``sum_i c_i u_i`` of fields on a common space."""
    coeffs = [float(c) for c, _ in terms]
    fields = [f for _, f in terms]
    dim = fields[0].dim
    if any(f.dim != dim for f in fields):
        raise ValueError("all fields must share the same dimension")
    beta = max(f.tail.exponent for f in fields)
    r_star = max(f.tail.radius for f in fields)
    amp = sum(
        abs(c) * f.tail.amplitude * (1.0 + r_star) ** (f.tail.exponent - beta)
        for c, f in zip(coeffs, fields)
    )
    sr = min(f.smoothness_radius for f in fields) if smoothness_radius is None else smoothness_radius

    def ev(pts):
        out = np.zeros(pts.shape[0])
        for c, f in zip(coeffs, fields):
            out += c * f.evaluator(pts)
        return out

    return ScalarField(
        evaluator=ev,
        dim=dim,
        smoothness_radius=sr,
        tail=TailModel(amp, beta, r_star),
    )

"""Panel-based quadrature machinery.

All singular integrals in this package are reduced to 1D integrals of
vectorized integrands over panel decompositions: geometric grading absorbs
algebraic endpoint singularities, and an embedded coarse/fine Gauss pair
per panel supplies the error estimate that drives adaptive bisection.
Node placement is fully deterministic, so repeated runs are bit-identical
and concurrent callers never share mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization policy for the singular-integral evaluators.

    Parameters
    ----------
    inner_radius : float
        Radius of the paired singular shell around the evaluation point.
        The effective radius is capped by the field's smoothness radius.
    outer_radius : float
        Handoff radius beyond which the integral is closed with the
        tail-model estimate instead of explicit quadrature.
    shells_per_decade : int
        Geometric panel density for radial decompositions.
    nodes_per_shell : int
        Gauss points per panel; the embedded estimate uses half as many.
    target_rel_tol : float
        Requested relative accuracy of an evaluation.
    extrapolation_levels : int
        Number of refine-and-retry rounds allowed when the first pass
        misses the target tolerance (each round doubles the panel budget).
    """

    inner_radius: float = 0.25
    outer_radius: float = 1.0e12
    shells_per_decade: int = 4
    nodes_per_shell: int = 12
    target_rel_tol: float = 1.0e-6
    extrapolation_levels: int = 2

    def __post_init__(self):
        if not (0.0 < self.inner_radius < self.outer_radius):
            raise ValueError("need 0 < inner_radius < outer_radius")
        if self.target_rel_tol <= 0.0:
            raise ValueError("target_rel_tol must be positive")
        if self.shells_per_decade < 1 or self.nodes_per_shell < 2:
            raise ValueError("shells_per_decade >= 1 and nodes_per_shell >= 2 required")
        if self.extrapolation_levels < 0:
            raise ValueError("extrapolation_levels must be nonnegative")

    def with_inner_radius(self, r: float) -> "QuadratureSpec":
        return replace(self, inner_radius=min(self.inner_radius, r))


@lru_cache(maxsize=64)
def gauss_rule(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_points(a: float, b: float, n: int):
    """Gauss points and weights on the interval [a, b]."""
    x, w = gauss_rule(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def log_edges(a: float, b: float, per_decade: int) -> np.ndarray:
    """Geometric panel edges covering [a, b], 0 < a < b."""
    if not 0.0 < a < b:
        raise ValueError("need 0 < a < b")
    count = max(1, int(np.ceil(np.log10(b / a) * per_decade)))
    return np.geomspace(a, b, count + 1)


def geometric_inner_edges(eps: float, ratio: float = 0.5, panels: int = 45) -> np.ndarray:
    """Edges of (0, eps] accumulating geometrically at 0 (ascending, no 0)."""
    return eps * ratio ** np.arange(panels, -1, -1, dtype=float)


@dataclass(frozen=True)
class IntegrationOutcome:
    value: float
    error: float
    converged: bool
    evaluations: int
    l1_mass: float = 0.0


def integrate_panels(f, edges, nodes: int):
    """One quadrature pass over fixed panels with embedded error estimate.

    ``f`` must map a 1D point array to values; all panels are evaluated in a
    single batched call.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    n_hi = int(nodes)
    n_lo = max(2, n_hi // 2)
    xh, wh = gauss_rule(n_hi)
    xl, wl = gauss_rule(n_lo)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts_hi = (mid[:, None] + half[:, None] * xh[None, :]).ravel()
    pts_lo = (mid[:, None] + half[:, None] * xl[None, :]).ravel()
    vals = f(np.concatenate([pts_hi, pts_lo]))
    k = pts_hi.size
    hi = (vals[:k].reshape(len(a), n_hi) * wh[None, :]).sum(axis=1) * half
    lo = (vals[k:].reshape(len(a), n_lo) * wl[None, :]).sum(axis=1) * half
    return hi, np.abs(hi - lo), vals.size


def integrate_adaptive(
    f,
    edges,
    rel_tol: float = 1.0e-8,
    abs_tol: float = 0.0,
    nodes: int = 12,
    max_panels: int = 2000,
) -> IntegrationOutcome:
    """Adaptively bisect panels until the summed embedded error meets tolerance.

    The worst panel (largest error estimate, lowest index on ties) is split at
    its midpoint, or at the geometric mean when it spans more than a decade of
    positive abscissae. Deterministic given identical inputs.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing with >= 2 entries")
    vals, errs, n_eval = integrate_panels(f, edges, nodes)
    panels = [(edges[i], edges[i + 1], vals[i], errs[i]) for i in range(len(vals))]
    # cancellation floor: accuracy relative to the L1 mass is the best achievable
    floor = max(abs_tol, rel_tol * float(np.sum(np.abs(vals))))

    def totals():
        v = sum(p[2] for p in panels)
        e = sum(p[3] for p in panels)
        l1 = sum(abs(p[2]) for p in panels)
        return v, e, l1

    value, err, l1 = totals()
    while len(panels) < max_panels:
        if err <= max(rel_tol * abs(value), floor):
            return IntegrationOutcome(value, err, True, n_eval, l1)
        worst = max(range(len(panels)), key=lambda i: (panels[i][3], -i))
        a, b, _, werr = panels[worst]
        if werr <= 0.0 or (b - a) <= 1.0e-15 * max(abs(a), abs(b), 1.0):
            break
        if a > 0.0 and b / a > 10.0:
            m = float(np.sqrt(a * b))
        else:
            m = 0.5 * (a + b)
        sub_vals, sub_errs, used = integrate_panels(f, np.array([a, m, b]), nodes)
        n_eval += used
        panels[worst] = (a, m, sub_vals[0], sub_errs[0])
        panels.insert(worst + 1, (m, b, sub_vals[1], sub_errs[1]))
        value, err, l1 = totals()
    return IntegrationOutcome(value, err, err <= max(rel_tol * abs(value), floor), n_eval, l1)


def power_tail_closure(f_at_edge: float, edge: float, exponent: float):
    """Remainder of ``int_edge^inf K t^exponent dt`` with K fitted at the edge.

    Assumes the integrand is asymptotically a pure power with the given
    exponent (< -1). Returns (remainder, crudity) where crudity bounds the
    model risk and belongs in an error estimate.
    """
    if exponent >= -1.0:
        raise ValueError("tail exponent must be < -1 for convergence")
    remainder = f_at_edge * edge / (-exponent - 1.0)
    return remainder, 0.5 * abs(remainder)


def aitken_limit(values) -> float:
    """Accelerated limit of a convergent sequence via one Aitken pass.

    Falls back to the last raw value when differences degenerate.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return float(v[-1])
    best = float(v[-1])
    for i in range(v.size - 2):
        d1 = v[i + 1] - v[i]
        d2 = v[i + 2] - v[i + 1]
        denom = d2 - d1
        if denom != 0.0 and np.isfinite(denom):
            cand = v[i + 2] - d2 * d2 / denom
            if np.isfinite(cand):
                best = float(cand)
    return best


def richardson_first_order(coarse: float, fine: float) -> float:
    """Eliminate the O(h) term from a pair of one-sided estimates at h, h/2."""
    return 2.0 * fine - coarse

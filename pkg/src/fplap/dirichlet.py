"""Desk-scale Dirichlet solver on an interval with zero exterior data.

The unknown is the vector of nodal values of a piecewise-linear interpolant
that is extended by zero outside the interval; collocating the operator at
the interior nodes gives a monotone nonlinear system solved by damped Newton
with a finite-difference Jacobian (and a damped fixed-point fallback).

The singular shell at each collocation node uses the second-order-expansion
rule with the divided-difference slope and curvature of the interpolant:
the exact piecewise-linear integrand is not integrable there once
``ps >= p - 1`` (the slope jump contributes a non-cancelling even term), so
the shell is regularized consistently; the regularization vanishes as the
slope jumps do.

A separately implemented dense solver for the linear case ``p = 2`` (exact
segment antiderivatives, no panel quadrature) provides the reference used to
validate profiles and boundary exponents.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .fields import FracParams, ScalarField, TailModel
from .operator import signed_power
from .quadrature import QuadratureSpec, gauss_rule, geometric_inner_edges


@dataclass(frozen=True)
class Domain1D:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ValueError("need finite endpoints with a < b")


@dataclass(frozen=True)
class GradedGrid:
    """Nodes of [a, b] including endpoints, geometrically refined at both ends."""

    nodes: np.ndarray
    grading_ratio: float
    boundary_layers: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("grid needs at least one interior node")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if not 0.0 < self.grading_ratio <= 1.0:
            raise ValueError("grading_ratio must lie in (0, 1]")
        object.__setattr__(self, "nodes", nodes)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    def boundary_distances(self) -> np.ndarray:
        x = self.interior
        return np.minimum(x - self.nodes[0], self.nodes[-1] - x)


def make_graded_grid(
    domain: Domain1D,
    boundary_layers: int = 12,
    grading_ratio: float = 0.5,
    interior_points: int = 5,
) -> GradedGrid:
    """Grid with geometric boundary layers and a quasi-uniform middle."""
    if boundary_layers < 1:
        raise ValueError("need at least one boundary layer")
    h = 0.5 * (domain.b - domain.a)
    offsets = h * grading_ratio ** np.arange(boundary_layers, 0, -1, dtype=float)
    middle = np.linspace(domain.a + h * grading_ratio, domain.b - h * grading_ratio,
                         interior_points + 2)[1:-1]
    nodes = np.unique(np.concatenate([
        [domain.a], domain.a + offsets, middle, domain.b - offsets[::-1], [domain.b]
    ]))
    return GradedGrid(nodes=nodes, grading_ratio=grading_ratio, boundary_layers=boundary_layers)


def interpolant_field(grid: GradedGrid, values, smoothness_radius=None) -> ScalarField:
    """Piecewise-linear interpolant with zero exterior extension as a field.

    Carries divided-difference derivative evaluators so the generic operator
    quadrature applies the same regularized singular-shell rule as the
    discrete operator; they match centered differences of the interpolant at
    the matching step, not pointwise classical derivatives. The default
    smoothness radius is the smallest cell width, which makes the generic
    engine's shell at the first boundary-layer node coincide with the
    discrete plan's.
    """
    nodes = grid.nodes
    full = np.concatenate([[0.0], np.asarray(values, dtype=float), [0.0]])
    widths = np.diff(nodes)
    slopes = np.diff(full) / widths

    def ev(pts):
        x = pts[:, 0]
        out = np.interp(x, nodes, full)
        return np.where((x > nodes[0]) & (x < nodes[-1]), out, 0.0)

    def grad(pts):
        x = pts[:, 0]
        idx = np.clip(np.searchsorted(nodes, x) - 1, 0, len(slopes) - 1)
        g = slopes[idx]
        near = np.isclose(x[:, None], nodes[None, 1:-1], rtol=0.0, atol=1.0e-12)
        hit = near.any(axis=1)
        if np.any(hit):
            j = near.argmax(axis=1)[hit]  # interior node index
            g = g.astype(float)
            g[hit] = 0.5 * (slopes[j] + slopes[j + 1])
        g = np.where((x >= nodes[0]) & (x <= nodes[-1]), g, 0.0)
        return g[:, None]

    def hess(pts):
        x = pts[:, 0]
        out = np.zeros(x.size)
        near = np.isclose(x[:, None], nodes[None, 1:-1], rtol=0.0, atol=1.0e-12)
        hit = near.any(axis=1)
        if np.any(hit):
            j = near.argmax(axis=1)[hit]
            out[hit] = 2.0 * (slopes[j + 1] - slopes[j]) / (widths[j] + widths[j + 1])
        return out[:, None, None]

    radius = float(np.min(widths)) if smoothness_radius is None else float(smoothness_radius)
    return ScalarField(
        evaluator=ev,
        dim=1,
        smoothness_radius=radius,
        tail=TailModel(amplitude=0.0, exponent=0.0,
                       radius=float(max(abs(nodes[0]), abs(nodes[-1])))),
        gradient=grad,
        hessian=hess,
    )


class DiscreteOperator:
    """Collocated operator of the zero-extended interpolant at interior nodes.

    All quadrature nodes and kernel weights are fixed by the grid, so one
    application is a single interpolation sweep plus weighted reductions;
    repeated applications (Newton, Jacobians) reuse the plan.
    """

    def __init__(self, domain: Domain1D, grid: GradedGrid, params: FracParams,
                 quad: Optional[QuadratureSpec] = None):
        if params.n != 1:
            raise ValueError("the interval solver is one-dimensional")
        quad = quad or QuadratureSpec()
        nodes = grid.nodes
        if not (np.isclose(nodes[0], domain.a) and np.isclose(nodes[-1], domain.b)):
            raise ValueError("grid does not span the domain")
        if np.any(np.diff(nodes) < 1.0e-12):
            raise ValueError("grid nodes closer than 1e-12 are rejected")
        self.domain, self.grid, self.params, self.quad = domain, grid, params, quad
        self.nodes = nodes
        self.xi = grid.interior
        self.m = self.xi.size
        self._build_plan()

    def _build_plan(self):
        params, quad = self.params, self.quad
        ps = params.ps
        nodes, xi = self.nodes, self.xi
        widths = np.diff(nodes)

        # singular shell: fixed log-graded h-nodes per collocation point
        gx, gw = gauss_rule(quad.nodes_per_shell)
        h_pts, h_wts = [], []
        self.eps = np.empty(self.m)
        for i, x in enumerate(xi):
            eps = min(quad.inner_radius, 0.5 * min(widths[i], widths[i + 1]))
            self.eps[i] = eps
            edges = geometric_inner_edges(eps, 0.5, panels=40)
            a, b = edges[:-1], edges[1:]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            hp = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            hw = (half[:, None] * gw[None, :]).ravel()
            h_pts.append(hp)
            h_wts.append(hw * hp ** (-1.0 - ps))
        self.h_pts = np.vstack(h_pts)
        self.h_wts = np.vstack(h_wts)

        # intermediate zone: panel edges at node distances on each side
        pts_all, wts_all, owner = [], [], []
        for i, x in enumerate(xi):
            for sgn, edge_end in ((1.0, nodes[-1] - x), (-1.0, x - nodes[0])):
                if sgn > 0:
                    dists = nodes[i + 2:] - x
                else:
                    dists = x - nodes[:i + 1][::-1]
                edges = np.unique(np.concatenate([[self.eps[i]], dists[dists > self.eps[i]],
                                                  [edge_end]]))
                for k in range(len(edges) - 1):
                    a, b = edges[k], edges[k + 1]
                    if b <= a:
                        continue
                    mid, half = 0.5 * (a + b), 0.5 * (b - a)
                    rp = mid + half * gx
                    rw = half * gw * rp ** (-1.0 - ps)
                    pts_all.append(x + sgn * rp)
                    wts_all.append(rw)
                    owner.append(np.full(rp.size, i))
        self.mid_pts = np.concatenate(pts_all)
        self.mid_wts = np.concatenate(wts_all)
        self.mid_owner = np.concatenate(owner)

        # exact exterior closure (the interpolant vanishes outside [a, b])
        self.tail_coef = ((nodes[-1] - xi) ** (-ps) + (xi - nodes[0]) ** (-ps)) / ps

    def apply(self, values) -> np.ndarray:
        """Operator values of the interpolant at the interior nodes."""
        params = self.params
        p, ps = params.p, params.ps
        values = np.asarray(values, dtype=float)
        if values.shape != (self.m,):
            raise ValueError("values must match the interior node count")
        full = np.concatenate([[0.0], values, [0.0]])
        slopes = np.diff(full) / np.diff(self.nodes)
        s_l, s_r = slopes[:-1], slopes[1:]
        a_mean = 0.5 * (s_l + s_r)
        curv = (s_r - s_l) / (np.diff(self.nodes)[:-1] + np.diff(self.nodes)[1:])

        h = self.h_pts
        am, cv = a_mean[:, None], curv[:, None]
        inner = np.sum(
            (signed_power(am * h - cv * h * h, p) - signed_power(am * h + cv * h * h, p))
            * self.h_wts,
            axis=1,
        )

        u_mid = np.interp(self.mid_pts, self.nodes, full)
        ux = values[self.mid_owner]
        contrib = signed_power(ux - u_mid, p) * self.mid_wts
        mid = np.bincount(self.mid_owner, weights=contrib, minlength=self.m)

        tail = signed_power(values, p) * self.tail_coef
        return params.normalization * (inner + mid + tail)

    def residual(self, values, f_values) -> np.ndarray:
        return self.apply(values) - np.asarray(f_values, dtype=float)

    def refined(self, factor: int = 2) -> "DiscreteOperator":
        """Same collocation with a quadrature plan refined by the factor."""
        q = replace(self.quad,
                    shells_per_decade=self.quad.shells_per_decade * factor,
                    nodes_per_shell=self.quad.nodes_per_shell * factor)
        return DiscreteOperator(self.domain, self.grid, self.params, q)


def discretize(domain: Domain1D, grid: GradedGrid, params: FracParams,
               quad: Optional[QuadratureSpec] = None) -> DiscreteOperator:
    """Build the collocated residual map for the interval problem."""
    return DiscreteOperator(domain, grid, params, quad)


@dataclass(frozen=True)
class SolveResult:
    grid: GradedGrid
    values: np.ndarray
    residual_sup: float
    iterations: int
    converged: bool
    tolerance: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite nodal values")

    def interpolant(self) -> ScalarField:
        return interpolant_field(self.grid, self.values)

    def to_dict(self):
        return {
            "nodes": self.grid.nodes.tolist(),
            "values": self.values.tolist(),
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "converged": self.converged,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 40
    tol_factor: float = 1.0e-4
    backtracks: int = 25
    jacobian_step: float = 1.0e-6
    condition_limit: float = 1.0e12


def _as_f_values(f, xi):
    if isinstance(f, ScalarField):
        vals = f(xi[:, None])
    elif callable(f):
        vals = np.asarray(f(xi), dtype=float)
    else:
        vals = np.full(xi.size, float(f))
    if not np.all(np.isfinite(vals)):
        raise ValueError("right-hand side must be finite (bounded) on the domain")
    return vals


def solve(
    domain: Domain1D,
    grid: GradedGrid,
    f,
    params: FracParams,
    quad: Optional[QuadratureSpec] = None,
    options: Optional[SolveOptions] = None,
) -> SolveResult:
    """Damped-Newton solve of the collocated exterior-zero problem.

    ``f`` may be a constant, a callable of the node coordinates, or a
    :class:`ScalarField`. Exponents below 2 are rejected (the degenerate
    regime is outside this solver); at exactly 2 the system is linear and
    Newton converges in one step.
    """
    if params.p < 2.0:
        raise ValueError("the interval solver requires p >= 2")
    options = options or SolveOptions()
    op = discretize(domain, grid, params, quad)
    f_vals = _as_f_values(f, op.xi)
    tol = options.tol_factor * (1.0 + float(np.max(np.abs(f_vals))))

    # homogeneity-scaled initial guess with the expected boundary profile
    f_scale = float(np.mean(f_vals))
    if f_scale == 0.0:
        f_scale = 0.1 * float(np.max(np.abs(f_vals))) if np.any(f_vals) else 0.0
    amp = abs(f_scale) ** (1.0 / (params.p - 1.0)) * np.sign(f_scale) if f_scale else 0.0
    h = 0.5 * (domain.b - domain.a)
    c = 0.5 * (domain.a + domain.b)
    u = amp * np.maximum(1.0 - ((op.xi - c) / h) ** 2, 0.0) ** params.s

    r = op.residual(u, f_vals)
    iters = 0
    while float(np.max(np.abs(r))) > tol and iters < options.max_iterations:
        jac = np.empty((op.m, op.m))
        base = r + f_vals
        steps = options.jacobian_step * (1.0 + np.abs(u))
        for j in range(op.m):
            pert = u.copy()
            pert[j] += steps[j]
            jac[:, j] = (op.apply(pert) - base) / steps[j]
        use_newton = np.isfinite(jac).all() and np.linalg.cond(jac) < options.condition_limit
        if use_newton:
            du = np.linalg.solve(jac, r)
        else:
            du = r / (1.0 + np.linalg.norm(jac, np.inf))
        norm0 = float(np.max(np.abs(r)))
        lam, accepted = 1.0, False
        for _ in range(options.backtracks):
            trial = u - lam * du
            r_trial = op.residual(trial, f_vals)
            if float(np.max(np.abs(r_trial))) < norm0:
                u, r, accepted = trial, r_trial, True
                break
            lam *= 0.5
        if not accepted and use_newton:
            # fixed-point fallback direction, line-searched the same way
            du = r / (1.0 + np.linalg.norm(jac, np.inf))
            lam = 1.0
            for _ in range(options.backtracks):
                trial = u - lam * du
                r_trial = op.residual(trial, f_vals)
                if float(np.max(np.abs(r_trial))) < norm0:
                    u, r, accepted = trial, r_trial, True
                    break
                lam *= 0.5
        if not accepted:
            break
        iters += 1

    res_sup = float(np.max(np.abs(r)))
    return SolveResult(
        grid=grid,
        values=u,
        residual_sup=res_sup,
        iterations=iters,
        converged=res_sup <= tol,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# dense linear reference (p = 2), exact segment antiderivatives


def _segment_primitive(t: float, two_s: float):
    """Antiderivatives of t^{-1-2s} and t^{-2s} used by the exact assembly."""
    if abs(two_s - 1.0) < 1.0e-12:
        lin = float(np.log(t))
    else:
        lin = t ** (1.0 - two_s) / (1.0 - two_s)
    return t ** (-two_s) / (-two_s), lin


def linear_reference_apply(grid: GradedGrid, params: FracParams, values,
                           quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Exact operator of the interpolant for p = 2 (no panel quadrature).

    Each linear segment integrates in closed form against the kernel; the
    singular shell uses the same divided-difference regularization as the
    discrete operator so the two routes discretize the same system.
    """
    if params.p != 2.0:
        raise ValueError("the dense reference is for the linear case p = 2")
    quad = quad or QuadratureSpec()
    two_s = 2.0 * params.s
    nodes = grid.nodes
    xi = grid.interior
    full = np.concatenate([[0.0], np.asarray(values, dtype=float), [0.0]])
    widths = np.diff(nodes)
    slopes = np.diff(full) / widths
    out = np.empty(xi.size)
    for i, x in enumerate(xi):
        eps = min(quad.inner_radius, 0.5 * min(widths[i], widths[i + 1]))
        curv = (slopes[i + 1] - slopes[i]) / (widths[i] + widths[i + 1])
        acc = -2.0 * curv * eps ** (2.0 - two_s) / (2.0 - two_s)
        ux = full[i + 1]
        for sgn in (1.0, -1.0):
            if sgn > 0:
                seg_lo, seg_hi = nodes[:-1] - x, nodes[1:] - x
                seg_val, seg_slope = full[:-1], slopes * 1.0
            else:
                seg_lo, seg_hi = x - nodes[1:], x - nodes[:-1]
                seg_val, seg_slope = full[1:], -slopes
            for k in range(len(seg_lo)):
                lo, hi = max(seg_lo[k], eps), seg_hi[k]
                if hi <= lo:
                    continue
                # u(x) - u(y) = d0 - m0 * t on the segment, t the distance
                d0 = ux - seg_val[k] + seg_slope[k] * seg_lo[k]
                m0 = seg_slope[k]
                p_pow_lo, p_lin_lo = _segment_primitive(float(lo), two_s)
                p_pow_hi, p_lin_hi = _segment_primitive(float(hi), two_s)
                acc += d0 * (p_pow_hi - p_pow_lo) - m0 * (p_lin_hi - p_lin_lo)
            edge = nodes[-1] - x if sgn > 0 else x - nodes[0]
            acc += ux * edge ** (-two_s) / two_s
        out[i] = acc
    return params.normalization * out


def linear_reference_solve(domain: Domain1D, grid: GradedGrid, f, params: FracParams,
                           quad: Optional[QuadratureSpec] = None) -> SolveResult:
    """Dense solve of the p = 2 collocation system from the exact assembly."""
    op_matrix = np.empty((grid.interior.size,) * 2)
    for j in range(grid.interior.size):
        e = np.zeros(grid.interior.size)
        e[j] = 1.0
        op_matrix[:, j] = linear_reference_apply(grid, params, e, quad)
    f_vals = _as_f_values(f, grid.interior)
    u = np.linalg.solve(op_matrix, f_vals)
    res = float(np.max(np.abs(op_matrix @ u - f_vals)))
    tol = 1.0e-4 * (1.0 + float(np.max(np.abs(f_vals))))
    return SolveResult(grid=grid, values=u, residual_sup=res, iterations=1,
                       converged=res <= tol, tolerance=tol)


# ---------------------------------------------------------------------------
# comparisons and boundary-exponent fitting


@dataclass(frozen=True)
class ComparisonReport:
    holds: bool
    max_violation: float
    tolerance: float

    def to_dict(self):
        return {"holds": self.holds, "max_violation": self.max_violation,
                "tolerance": self.tolerance}


def comparison_check(u_result: SolveResult, v_result: SolveResult,
                     tolerance: Optional[float] = None) -> ComparisonReport:
    """Nodewise ordering check ``u <= v + tol`` for results on one grid.

    Both solutions vanish outside the interval by construction, so ordered
    right-hand sides must produce ordered solutions up to solver tolerance.
    """
    if not np.array_equal(u_result.grid.nodes, v_result.grid.nodes):
        raise ValueError("results live on different grids")
    tol = tolerance if tolerance is not None else u_result.tolerance + v_result.tolerance
    violation = float(np.max(u_result.values - v_result.values))
    return ComparisonReport(holds=violation <= tol, max_violation=violation, tolerance=tol)


@dataclass(frozen=True)
class ExponentFit:
    nu_hat: float
    c_hat: float
    window: tuple
    r_squared: float
    n_points: int
    n_excluded: int

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("fit window must be nonempty")
        if not np.isfinite(self.nu_hat):
            raise ValueError("fitted exponent is not finite")

    def to_dict(self):
        return {"nu_hat": self.nu_hat, "c_hat": self.c_hat,
                "window": list(self.window), "r_squared": self.r_squared,
                "n_points": self.n_points, "n_excluded": self.n_excluded}


def fit_boundary_exponent(result: SolveResult, window) -> ExponentFit:
    """Least-squares fit of ``log |u|`` against ``log dist`` inside the window."""
    d_min, d_max = float(window[0]), float(window[1])
    if not 0.0 < d_min < d_max:
        raise ValueError("window must satisfy 0 < d_min < d_max")
    d = result.grid.boundary_distances()
    v = np.abs(result.values)
    in_window = (d >= d_min) & (d <= d_max)
    usable = in_window & (v > 0.0)
    n_excluded = int(np.sum(in_window & ~usable))
    if int(usable.sum()) < 5:
        raise ValueError("fewer than 5 usable points in the fit window")
    x = np.log(d[usable])
    y = np.log(v[usable])
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return ExponentFit(
        nu_hat=float(coef[0]),
        c_hat=float(np.exp(coef[1])),
        window=(d_min, d_max),
        r_squared=r2,
        n_points=int(usable.sum()),
        n_excluded=n_excluded,
    )

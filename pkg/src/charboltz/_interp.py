"""Interpolation of radial characteristic functions.

State is a sampled profile psi(r) on a geometric radial grid.  Off-grid
evaluation works on the transformed data (t, eta) = (ln r, ln(1-psi)):
a C2 cubic spline (not-a-knot) in these coordinates, exponentiated
back.  Below the first node the spline is continued linearly in (t,
eta), i.e. a power law C*r^p, which is the correct local model for a
characteristic function near the origin.

The transform matters: psi <= 1 is guaranteed structurally (u = e^eta
> 0), and near r = 0 the interpolation error is *relative* to u, which
keeps the discrete collision operator's energy balance clean.  Plain
cubic interpolation of psi(r) loses several digits there and the
solver's Gaussian fixed point drifts.
"""

import numpy as np
from scipy.linalg import solve_banded

ETA_FLOOR = 1e-300


def spline_slopes(t, y):
    """Nodal first derivatives of the not-a-knot C2 cubic spline.

    Matches scipy.interpolate.CubicSpline(t, y)(t, 1); solved here as a
    banded system so the hot path has no PPoly construction overhead.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = t.size
    if n < 2:
        raise ValueError("need at least two nodes")
    h = np.diff(t)
    delta = np.diff(y) / h
    if n == 2:
        return np.array([delta[0], delta[0]])
    if n == 3:
        # not-a-knot with three points is the parabola through them
        d = np.empty(3)
        d[0] = delta[0] + (delta[0] - delta[1]) * h[0] / (h[0] + h[1])
        d[1] = (delta[0] * h[1] + delta[1] * h[0]) / (h[0] + h[1])
        d[2] = delta[1] + (delta[1] - delta[0]) * h[1] / (h[0] + h[1])
        return d

    ab = np.zeros((3, n))
    rhs = np.empty(n)
    # interior rows: C2 continuity
    ab[0, 2:] = h[:-1]                      # superdiagonal
    ab[1, 1:-1] = 2.0 * (h[:-1] + h[1:])    # diagonal
    ab[2, :-2] = h[1:]                      # subdiagonal
    rhs[1:-1] = 3.0 * (delta[1:] * h[:-1] + delta[:-1] * h[1:])
    # not-a-knot boundary rows
    d0 = t[2] - t[0]
    ab[1, 0] = h[1]
    ab[0, 1] = d0
    rhs[0] = ((h[0] + 2.0 * d0) * h[1] * delta[0] + h[0] ** 2 * delta[1]) / d0
    dn = t[-1] - t[-3]
    ab[1, -1] = h[-2]
    ab[2, -2] = dn
    rhs[-1] = (h[-1] ** 2 * delta[-2]
               + (2.0 * dn + h[-1]) * h[-2] * delta[-1]) / dn
    return solve_banded((1, 1), ab, rhs)


def build_plan(t_nodes, queries, allow_above=False):
    """Precompute Hermite gather coefficients for fixed query radii.

    Returns (idx, c0, c1, c2, c3): for each query q,
    eta(q) = c0*eta[i] + c1*deta[i] + c2*eta[i+1] + c3*deta[i+1].
    idx = -1 marks q == 0 (u is exactly 0 there).  Queries below the
    first node get the linear-in-(t, eta) continuation; queries above
    the last node raise unless allow_above (then they clamp).
    """
    q = np.asarray(queries, dtype=float)
    if np.any(q < 0):
        raise ValueError("negative query radius")
    zero = q == 0.0
    tq = np.log(np.where(zero, 1.0, q))
    if not allow_above and np.any(tq > t_nodes[-1] + 1e-12):
        raise ValueError("query radius beyond the grid")
    tq = np.minimum(tq, t_nodes[-1])
    idx = np.clip(np.searchsorted(t_nodes, tq) - 1, 0, t_nodes.size - 2)
    h = t_nodes[idx + 1] - t_nodes[idx]
    s = (tq - t_nodes[idx]) / h
    c0 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    c1 = h * s * (1.0 - s) ** 2
    c2 = s * s * (3.0 - 2.0 * s)
    c3 = h * s * s * (s - 1.0)
    below = tq < t_nodes[0]
    if np.any(below):
        idx[below] = 0
        c0[below] = 1.0
        c1[below] = tq[below] - t_nodes[0]
        c2[below] = 0.0
        c3[below] = 0.0
    idx[zero] = -1
    return idx.astype(np.int64), c0, c1, c2, c3


class RadialInterpolant:
    """Evaluator for one sampled profile; immutable once built."""

    def __init__(self, t_nodes, u_nodes):
        self.t_nodes = t_nodes
        self.u_nodes = u_nodes
        self.trivial = bool(np.all(u_nodes == 0.0))
        if not self.trivial:
            self.eta = np.log(np.maximum(u_nodes, ETA_FLOOR))
            self.deta = spline_slopes(t_nodes, self.eta)

    def u_at(self, radii, allow_above=False):
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if self.trivial:
            if not allow_above and np.any(
                    radii > np.exp(self.t_nodes[-1]) * (1 + 1e-12)):
                raise ValueError("query radius beyond the grid")
            return np.zeros_like(radii)
        idx, c0, c1, c2, c3 = build_plan(self.t_nodes, radii, allow_above)
        i = np.maximum(idx, 0)
        v = (c0 * self.eta[i] + c1 * self.deta[i]
             + c2 * self.eta[i + 1] + c3 * self.deta[i + 1])
        u = np.exp(v)
        u[idx < 0] = 0.0
        return u

    def psi_at(self, radii, allow_above=False):
        return 1.0 - self.u_at(radii, allow_above)

"""Pure-NumPy collision kernels (fallback backend).

The compiled extension charboltz._accel implements the same three
entry points; charboltz._backend picks whichever is importable.  The
hot data layout is shared: an interpolation *plan* is four coefficient
arrays plus an interval index per query, prepared once per
(grid, quadrature) pair, so each evaluation is a fused gather/reduce.

Queries with index -1 denote the exact origin (u = 0 there).
"""

import numpy as np

BACKEND = "python"


def eval_u(eta, deta, idx, c0, c1, c2, c3):
    """Evaluate u = exp(Hermite(eta)) for one query plan."""
    i = np.maximum(idx, 0)
    v = c0 * eta[i] + c1 * deta[i] + c2 * eta[i + 1] + c3 * deta[i + 1]
    u = np.exp(v)
    u[idx < 0] = 0.0
    return u


def collision_gain(eta, deta, plan_plus, plan_minus, weights, rows, out):
    """out[i] = sum_j W_j * (1 - u+_ij) * (1 - u-_ij) for i in rows."""
    lo, hi = rows
    n = weights.shape[0]
    sl = slice(lo * n, hi * n)
    up = eval_u(eta, deta, plan_plus[0][sl], plan_plus[1][sl],
                plan_plus[2][sl], plan_plus[3][sl], plan_plus[4][sl])
    um = eval_u(eta, deta, plan_minus[0][sl], plan_minus[1][sl],
                plan_minus[2][sl], plan_minus[3][sl], plan_minus[4][sl])
    prod = (1.0 - up) * (1.0 - um)
    out[lo:hi] = (prod.reshape(hi - lo, n) * weights).sum(axis=1)


def collision_rhs(u_nodes, eta, deta, plan_plus, plan_minus, weights, rows, out):
    """Cancellation-aware right side.

    out[i] = sum_j W_j * (u_i - u+_ij - u-_ij + u+_ij * u-_ij); the
    bracket is assembled in u = 1 - psi form so the theta -> 0
    cancellation is explicit.
    """
    lo, hi = rows
    n = weights.shape[0]
    sl = slice(lo * n, hi * n)
    up = eval_u(eta, deta, plan_plus[0][sl], plan_plus[1][sl],
                plan_plus[2][sl], plan_plus[3][sl], plan_plus[4][sl])
    um = eval_u(eta, deta, plan_minus[0][sl], plan_minus[1][sl],
                plan_minus[2][sl], plan_minus[3][sl], plan_minus[4][sl])
    bracket = u_nodes[lo:hi, None] - (up + um - up * um).reshape(hi - lo, n)
    out[lo:hi] = (bracket * weights).sum(axis=1)

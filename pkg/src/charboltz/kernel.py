"""Angular collision kernels and their integral constants.

The kernel b(cos theta) lives on (0, pi/2].  Two families: a constant
kernel b0 (Grad cutoff built in) and the canonical singular family

    b(cos theta) = K * sin(theta/2)^(-2-2s),      0 < s < 1,

which is non-integrable at theta -> 0 like theta^(-2-2s).  An optional
cutoff level n replaces b by min(b, n).

All constants are plain 1-D integrals over theta handled by a
geometrically graded Gauss rule accumulating at theta_min; panels are
split at the cutoff cap angle so the integrand is smooth per panel.
Divergent combinations are reported as values (math.inf), not raised:
experiment tables need "inf" rows.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import AccuracyError, ConfigError

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class KernelSpec:
    """Angular kernel family with optional cutoff level."""

    family: str                      # "constant" | "singular"
    b0: float = 1.0                  # constant family strength
    s: float = 0.5                   # singular order, in (0, 1)
    K: float = 1.0                   # singular strength
    cutoff: Optional[float] = None   # cap level n, or None

    def __post_init__(self):
        if self.family not in ("constant", "singular"):
            raise ConfigError(f"unknown kernel family {self.family!r}")
        if self.family == "constant" and self.b0 <= 0:
            raise ConfigError("constant kernel needs b0 > 0")
        if self.family == "singular":
            if not 0.0 < self.s < 1.0:
                raise ConfigError("singular order s must lie in (0, 1)")
            if self.K <= 0:
                raise ConfigError("singular kernel needs K > 0")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ConfigError("cutoff level must be positive")

    @property
    def is_singular_uncut(self) -> bool:
        return self.family == "singular" and self.cutoff is None

    def with_cutoff(self, n: float) -> "KernelSpec":
        return replace(self, cutoff=float(n))

    def cap_angle(self) -> Optional[float]:
        """Angle where the cutoff starts to bind, if it does."""
        if self.cutoff is None or self.family != "singular":
            return None
        x = (self.K / self.cutoff) ** (1.0 / (2.0 + 2.0 * self.s))
        if x >= math.sin(HALF_PI / 2):
            return HALF_PI  # capped on the whole range
        return 2.0 * math.asin(x)


def eval_b(spec: KernelSpec, theta):
    """Kernel value b(cos theta); cutoff caps pointwise at n."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0) | (theta > HALF_PI + 1e-15)):
        raise ValueError("theta must lie in (0, pi/2]")
    if spec.family == "constant":
        b = np.full_like(theta, spec.b0)
    else:
        b = spec.K * np.sin(theta / 2) ** (-2.0 - 2.0 * spec.s)
    if spec.cutoff is not None:
        b = np.minimum(b, spec.cutoff)
    return b if b.ndim else float(b)


@dataclass(frozen=True)
class AngularQuadrature:
    """Graded panel Gauss rule on [theta_min, pi/2]."""

    theta_min: float
    panel_count: int
    nodes_per_panel: int
    grading: float
    panel_edges: tuple          # decreasing toward theta_min, len P+1
    nodes: np.ndarray           # ascending theta
    weights: np.ndarray

    def fingerprint(self):
        return (self.theta_min, self.panel_count, self.nodes_per_panel,
                self.grading)


def build_quadrature(theta_min: float, panel_count: int,
                     nodes_per_panel: int, grading: float) -> AngularQuadrature:
    """Geometric panels accumulating toward theta_min, fixed Gauss order.

    Panel endpoints e_k = theta_min + (pi/2 - theta_min) * q^k decrease
    strictly geometrically toward theta_min; the last panel closes the
    gap [theta_min, e_{P-1}].
    """
    if not 0.0 < theta_min < HALF_PI:
        raise ConfigError("theta_min must lie in (0, pi/2)")
    if not 0.0 < grading < 1.0:
        raise ConfigError("grading ratio must lie in (0, 1)")
    if panel_count < 1 or nodes_per_panel < 1:
        raise ConfigError("panel and node counts must be >= 1")
    span = HALF_PI - theta_min
    edges = theta_min + span * grading ** np.arange(panel_count)
    edges = np.append(edges, theta_min)           # len P+1, decreasing
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    nodes, weights = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        mid, half = (hi + lo) / 2, (hi - lo) / 2
        nodes.append(mid + half * xg)
        weights.append(half * wg)
    nodes = np.concatenate(nodes[::-1])
    weights = np.concatenate(weights[::-1])
    return AngularQuadrature(theta_min, panel_count, nodes_per_panel,
                             grading, tuple(edges), nodes, weights)


DEFAULT_QUADRATURE = dict(theta_min=1e-8, panel_count=40,
                          nodes_per_panel=8, grading=0.6)


def default_quadrature(**overrides) -> AngularQuadrature:
    params = {**DEFAULT_QUADRATURE, **overrides}
    return build_quadrature(**params)


def refine(quad: AngularQuadrature) -> AngularQuadrature:
    """Double the panel count; old panel edges are kept (q -> sqrt q)."""
    return build_quadrature(quad.theta_min, 2 * quad.panel_count,
                            quad.nodes_per_panel, math.sqrt(quad.grading))


def kernel_nodes(spec: KernelSpec, quad: AngularQuadrature):
    """Quadrature nodes/weights with panels split at the cap angle.

    Returns (theta, w, panel_id); panel ids ascend with theta and are
    used by the panel-decay monitor in the solver.
    """
    cap = spec.cap_angle()
    edges = np.array(quad.panel_edges)            # decreasing
    if cap is not None and edges[-1] < cap < edges[0]:
        k = int(np.searchsorted(-edges, -cap))    # insertion in decreasing
        edges = np.insert(edges, k, cap)
    xg, wg = np.polynomial.legendre.leggauss(quad.nodes_per_panel)
    thetas, weights, pids = [], [], []
    npan = len(edges) - 1
    for j, (hi, lo) in enumerate(zip(edges[:-1], edges[1:])):
        mid, half = (hi + lo) / 2, (hi - lo) / 2
        thetas.append(mid + half * xg)
        weights.append(half * wg)
        pids.append(np.full(quad.nodes_per_panel, npan - 1 - j))
    theta = np.concatenate(thetas[::-1])
    w = np.concatenate(weights[::-1])
    pid = np.concatenate(pids[::-1])
    return theta, w, pid


# angular factors g(theta) entering the three constants;
# (cos^a + sin^a - 1) is assembled through expm1 so the theta -> 0
# cancellation costs no precision
def _factor_gamma2(theta, alpha):
    return np.ones_like(theta)


def _factor_gamma_alpha(theta, alpha):
    half = theta / 2
    return np.cos(half) ** alpha + np.sin(half) ** alpha


def _factor_lambda_alpha(theta, alpha):
    sin_half = np.sin(theta / 2)
    # cos^a(t/2) - 1 via expm1(log1p(.)): keeps the cancellation against
    # sin^a(t/2) relative, so singular kernels pick up no 1e-16*b noise
    return (np.expm1(0.5 * alpha * np.log1p(-sin_half ** 2))
            + sin_half ** alpha)


def _integrate(spec, quad, factor, alpha):
    theta, w, _ = kernel_nodes(spec, quad)
    vals = 2 * math.pi * w * eval_b(spec, theta) * np.sin(theta) \
        * factor(theta, alpha)
    return float(vals.sum())


def _small_theta_order(spec, which, alpha):
    """Power p of the integrand 2*pi*b*g*sin(theta) ~ C*theta^p near 0."""
    if spec.family == "constant" or spec.cutoff is not None:
        b_order = 0.0
    else:
        b_order = -2.0 - 2.0 * spec.s
    if which == "gamma2":
        g_order = 0.0
    elif which == "gamma_alpha":
        g_order = 0.0
    else:  # lambda_alpha
        g_order = alpha if alpha < 2 else math.inf
    return 1.0 + b_order + g_order


def _truncation_bound(spec, quad, factor, alpha, order):
    """Rigorous-style bound on the discarded [0, theta_min] piece."""
    if order == math.inf:
        return 0.0
    th = quad.theta_min
    f = 2 * math.pi * float(eval_b(spec, th)) * math.sin(th) \
        * float(factor(np.array([th]), alpha)[0])
    # integrand ~ C*theta^order: integral over [0, th] = f(th)*th/(order+1)
    return abs(f) * th / (order + 1.0) * 1.5


@dataclass(frozen=True)
class KernelConstant:
    """Value of gamma_2 / gamma_alpha / lambda_alpha with error report."""

    name: str
    alpha: Optional[float]
    value: float                # math.inf when divergent
    est_error: float
    divergent: bool

    def csv_row(self):
        val = "inf" if self.divergent else f"{self.value:.17g}"
        a = "" if self.alpha is None else f"{self.alpha:g}"
        return (self.name, a, val, f"{self.est_error:.3g}")


def _constant(spec, quad, which, alpha, factor, rtol=1e-8):
    order = _small_theta_order(spec, which, alpha)
    if order <= -1.0:
        return KernelConstant(which, alpha, math.inf, math.inf, True)
    quad = quad if quad is not None else default_quadrature()
    value = _integrate(spec, quad, factor, alpha)
    refined = _integrate(spec, refine(quad), factor, alpha)
    diff = abs(refined - value)
    scale = max(abs(value), abs(refined), 1e-30)
    if diff > max(1e-12, 100 * rtol * scale):
        raise AccuracyError(
            f"{which} quadrature did not converge: {value!r} vs {refined!r}")
    trunc = _truncation_bound(spec, quad, factor, alpha, order)
    return KernelConstant(which, alpha, refined, diff + trunc, False)


def gamma2(spec: KernelSpec, quad: AngularQuadrature = None) -> KernelConstant:
    """Total angular weight gamma_2 = 2*pi*int b(cos t) sin t dt."""
    return _constant(spec, quad, "gamma2", None, _factor_gamma2)


def gamma_alpha(spec: KernelSpec, alpha: float,
                quad: AngularQuadrature = None) -> KernelConstant:
    """Lipschitz constant of the gain operator on the integral norm."""
    if not 0.0 < alpha < 2.0:
        raise ConfigError("gamma_alpha needs alpha in (0, 2)")
    return _constant(spec, quad, "gamma_alpha", alpha, _factor_gamma_alpha)


def lambda_alpha(spec: KernelSpec, alpha: float,
                 quad: AngularQuadrature = None) -> KernelConstant:
    """Growth rate 2*pi*int b*(cos^a(t/2)+sin^a(t/2)-1) sin t dt.

    Finite for the uncut singular family iff alpha > 2s; the divergent
    case comes back flagged, not raised.
    """
    if not 0.0 < alpha <= 2.0:
        raise ConfigError("lambda_alpha needs alpha in (0, 2]")
    return _constant(spec, quad, "lambda_alpha", alpha, _factor_lambda_alpha)

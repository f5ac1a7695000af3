"""Velocity-space diagnostics reconstructed from radial profiles.

Density inversion uses the standard radial Fourier pair for the
e^{-i v.xi} transform convention,

    f(v) = (1 / (2 pi^2 v)) int_0^R psi(r) r sin(r v) dr,

on a fine uniform Simpson grid.  Sobolev norms are diagnosed on the
Fourier side (no inversion needed):  ||f||_{H^N}^2 = (4 pi / (2 pi)^3)
int (1 + r^2)^N psi(r)^2 r^2 dr, with convergence judged by doubling
the truncation radius.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import quad

from . import metric
from .charfun import CharFn, RadialCharFn
from .errors import ConfigError
from .solver import Trajectory

__all__ = [
    "DensityProfile", "inverse_transform", "sobolev_norm",
    "entropy_and_moments", "moment_trajectory_check",
]


def _radial_eval(phi, radii):
    """psi(r) for a CharFn (isotropic) or RadialCharFn."""
    if isinstance(phi, RadialCharFn):
        return phi.eval_radial(radii)
    if isinstance(phi, CharFn):
        return phi.eval_radial(radii)
    raise ConfigError("expected a CharFn or RadialCharFn")


def _r_limit(phi) -> float:
    if isinstance(phi, RadialCharFn):
        return phi.grid.r_max
    if phi.kind == "radial_grid":
        return phi.profile.grid.r_max
    return math.inf


@dataclass
class DensityProfile:
    """Reconstructed speed-space density with its mass audit."""

    speeds: np.ndarray
    values: np.ndarray
    radius: float                 # truncation radius of the inversion
    truncation_estimate: float
    mass: float
    mass_error: float
    applicable: bool = True       # False: measure data, no density
    clipped_mass: float = 0.0     # mass of clipped truncation lobes

    def __post_init__(self):
        if self.applicable and np.min(self.values) < -1e-6:
            raise ConfigError(
                f"density has a negative lobe ({np.min(self.values):.3g}); "
                "inversion radius too small for this state")

    def mass_ok(self, tol: float = 1e-3) -> bool:
        return self.applicable and abs(self.mass - 1.0) <= max(
            tol, 10 * self.mass_error + self.truncation_estimate)

    def to_csv(self) -> str:
        lines = ["v,f,shell_density"]
        for v, f in zip(self.speeds, self.values):
            lines.append(f"{v:.17g},{f:.17g},{4 * math.pi * v * v * f:.17g}")
        return "\n".join(lines) + "\n"


def _simpson_weights(n: int, h: float) -> np.ndarray:
    if n % 2 == 0:
        raise ValueError("Simpson needs an odd node count")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def inverse_transform(phi, speeds, radius: float = 40.0,
                      decay_threshold: float = 0.01) -> DensityProfile:
    """Reconstruct the speed density from an isotropic profile.

    When psi has not decayed below decay_threshold on the last octave
    before the truncation radius the state is (numerically) a measure,
    not a density, and the profile comes back flagged not-applicable.
    """
    speeds = np.asarray(speeds, dtype=float)
    if np.any(speeds <= 0):
        raise ConfigError("speed grid must be positive")
    radius = min(radius, _r_limit(phi))
    probe = np.linspace(radius / 2, radius, 65)
    if float(np.max(np.abs(_radial_eval(phi, probe)))) > decay_threshold:
        return DensityProfile(speeds, np.zeros_like(speeds), radius,
                              math.inf, math.nan, math.nan, applicable=False)
    vmax = float(speeds.max())
    h = min(3e-3, math.pi / (40.0 * vmax))
    n = int(math.ceil(radius / h))
    n += 1 - n % 2                       # odd node count
    r = np.linspace(0.0, radius, n)
    w = _simpson_weights(n, r[1] - r[0])
    psi_r = _radial_eval(phi, r) * r * w
    phase = np.sin(np.multiply.outer(speeds, r))
    vals = (phase @ psi_r) / (2.0 * math.pi ** 2 * speeds)
    tail = float(np.abs(_radial_eval(phi, np.array([radius]))[0]))
    trunc = tail * radius * radius / (8.0 * math.pi ** 2 * speeds.min())
    # mass on the speed grid (trapezoid, 4 pi v^2 weight)
    shell = 4 * math.pi * speeds ** 2 * vals
    mass = float(np.trapezoid(shell, speeds))
    # beyond-grid mass from the last decade's decay
    mass_err = abs(float(np.trapezoid(shell[-16:], speeds[-16:])))
    small = vals < 0
    if np.any(small) and np.min(vals) >= -1e-6:
        vals = np.where(small, 0.0, vals)   # clip truncation lobes
    return DensityProfile(speeds, vals, radius, trunc, mass, mass_err)


@dataclass
class SobolevResult:
    order: int
    value: float
    radius: float
    converged: bool
    growth_exponent: float


def sobolev_norm(phi, order: int, radius: Optional[float] = None,
                 doublings: int = 4) -> SobolevResult:
    """Truncated H^N norm (squared) of the reconstructed density.

    Converged means the last doubling of the truncation radius moved
    the value by under 1%; otherwise the growth exponent of value(R) ~
    R^p is fitted and reported (p = 2N + 1 for measure-like states).
    """
    if order < 0:
        raise ConfigError("Sobolev order must be >= 0")
    R = radius if radius is not None else _r_limit(phi)
    if not math.isfinite(R):
        R = 64.0
    radii = [R / 2 ** k for k in range(doublings + 1)][::-1]
    vals = []
    for Rk in radii:
        def g(r):
            psi = _radial_eval(phi, r)
            return (1.0 + r * r) ** order * psi * psi * r * r
        freq = 2.0 if not isinstance(phi, CharFn) else phi.oscillation_scale()
        v, _ = metric.integrate_radial(g, 0.0 if Rk < 1 else 1e-9, Rk,
                                       rtol=1e-9, freq=max(freq, 1.0))
        vals.append((4 * math.pi / (2 * math.pi) ** 3) * v)
    change = abs(vals[-1] - vals[-2]) / max(vals[-1], 1e-300)
    converged = change < 0.01
    p = np.polyfit(np.log(radii), np.log(np.maximum(vals, 1e-300)), 1)[0]
    return SobolevResult(order, vals[-1], R, bool(converged), float(p))


@dataclass
class EntropyReport:
    log1p_entropy: float        # int f log(1 + f)
    log_entropy: float          # int_{f>0} f log f
    moment: float               # int <v>^alpha f
    negative_tail_bound: float  # device bound on the unseen log^- part
    clipped_mass: float


def entropy_and_moments(profile: DensityProfile, alpha: float,
                        ) -> EntropyReport:
    """Entropy functionals and the weighted moment on the speed grid."""
    if not profile.mass_ok():
        raise ConfigError("density failed its mass audit; refusing "
                          f"entropy (mass = {profile.mass!r})")
    v, f = profile.speeds, profile.values
    shell = 4 * math.pi * v ** 2
    pos = f > 0
    log1p_term = float(np.trapezoid(shell * f * np.log1p(f), v))
    flog = np.zeros_like(f)
    flog[pos] = f[pos] * np.log(f[pos])
    log_term = float(np.trapezoid(shell * flog, v))
    bracket = np.sqrt(1.0 + v * v) ** alpha
    moment = float(np.trapezoid(shell * f * bracket, v))
    # x log x >= -e^{-<v>^a} - <v>^a x bounds the negative part beyond
    # the grid (and under any clipped lobes)
    vmax = float(v.max())
    dev, _ = quad(lambda s: 4 * math.pi * s * s
                  * math.exp(-(1 + s * s) ** (alpha / 2)), vmax, np.inf)
    tail_moment = moment * 0.0 + dev  # moment tail folded into the device
    clipped = float(np.trapezoid(shell * np.where(f == 0.0, 1.0, 0.0), v))
    return EntropyReport(log1p_term, log_term, moment,
                         float(tail_moment), clipped)


@dataclass
class MomentTrackRow:
    time: float
    measured: float
    bound: float
    passed: bool


def moment_trajectory_check(traj: Trajectory, alpha: float,
                            alpha_prime: float) -> List[MomentTrackRow]:
    """Check the propagated-moment envelope along a trajectory.

    At each snapshot the certified moment bound at order alpha' must
    stay below (C_{a',a,3} / (2 c_{a',3,inf})) (e^{lambda_alpha t}
    ||phi0 - 1||_alpha)^{a'/a}, all constants computed, none fitted.
    """
    if not 0.0 < alpha_prime < alpha:
        raise ConfigError("need 0 < alpha_prime < alpha")
    lam = traj.lambda_alpha
    grid = traj.profiles[0].grid
    eps, R = grid.radii[1], grid.r_max
    one = CharFn.one(3)
    n0 = metric.sup_norm(CharFn.radial_grid(traj.profiles[0]), one,
                         alpha, eps, R).value
    surf = metric.SPHERE_MEASURE[3]
    c_emb = surf * (2.0 / alpha_prime + 1.0 / (alpha - alpha_prime))
    c_inf = metric.c_constant(alpha_prime, 3, math.inf)
    rows = []
    for t, prof in zip(traj.times, traj.profiles):
        measured = metric.moment_upper(CharFn.radial_grid(prof), alpha_prime)
        envelope = (c_emb / (2.0 * c_inf)) \
            * (math.exp(lam * t) * n0) ** (alpha_prime / alpha)
        rows.append(MomentTrackRow(t, measured, envelope,
                                   bool(measured <= envelope)))
    return rows

"""Evolution of isotropic characteristic functions.

The radial reduction of the Fourier-side collision equation is

    d psi(t, r)/dt = 2 pi int_0^{pi/2} b(cos t) [ psi(r cos(t/2))
                     psi(r sin(t/2)) - psi(r) ] sin t dt,

with both post-collisional radii <= r, so a grid on [0, r_max] is
exactly closed.  Two integrators:

* duhamel_picard (integrable kernels): the per-step fixed point
  psi = psi0 e^{-g2 tau} + int e^{-g2 (tau-s)} G(psi)(s) ds, iterated
  to tolerance.  The s-integral uses exponentially weighted hat
  functions on the sub-nodes (exact for stationary states), with node
  doubling until the step stops changing.
* exponential_euler (non-cutoff kernels): explicit stepping on the
  cancellation-aware right side, with the bounded part of the kernel's
  loss rate treated exponentially and a modulus/stability monitor.

The hot kernels live in charboltz._backend (compiled or NumPy).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import kernel as kmod
from . import metric
from ._backend import collision_gain, collision_rhs
from ._interp import ETA_FLOOR, build_plan, spline_slopes
from .charfun import CharFn, RadialCharFn, RadialGrid, sample_radial
from .errors import (AccuracyError, ConfigError, ConvergenceError,
                     StepSizeError)

__all__ = [
    "SolverConfig", "Trajectory", "CollisionOperator",
    "collision_gain_values", "rhs_noncutoff_values",
    "duhamel_evolve", "evolve_noncutoff", "cutoff_sequence_study",
    "verify_stability", "verify_continuity", "rhs_mnorm_bound",
]


class CollisionOperator:
    """Precomputed quadrature/interpolation plans for one (grid, kernel)."""

    def __init__(self, grid: RadialGrid, spec: kmod.KernelSpec,
                 quad: Optional[kmod.AngularQuadrature] = None,
                 threads: int = 1):
        self.grid = grid
        self.spec = spec
        self.quad = quad if quad is not None else kmod.default_quadrature()
        self.threads = max(1, int(threads))
        theta, w, pid = kmod.kernel_nodes(spec, self.quad)
        b = kmod.eval_b(spec, theta)
        self.theta = theta
        self.panel_id = pid
        self.weights = 2 * math.pi * w * b * np.sin(theta)
        self.gamma2 = float(self.weights.sum())
        t_nodes = grid.log_radii()
        self._t_nodes = t_nodes
        radii = grid.radii
        half = theta / 2
        qp = np.multiply.outer(radii, np.cos(half)).ravel()
        qm = np.multiply.outer(radii, np.sin(half)).ravel()
        self.plan_plus = build_plan(t_nodes, qp)
        self.plan_minus = build_plan(t_nodes, qm)
        self._pool = (ThreadPoolExecutor(max_workers=self.threads)
                      if self.threads > 1 else None)

    # -- constants on this node set --------------------------------------
    def gamma_alpha(self, alpha: float) -> float:
        half = self.theta / 2
        return float((self.weights
                      * (np.cos(half) ** alpha + np.sin(half) ** alpha)).sum())

    def lambda_alpha(self, alpha: float) -> float:
        sh = np.sin(self.theta / 2)
        fac = np.expm1(0.5 * alpha * np.log1p(-sh ** 2)) + sh ** alpha
        return float((self.weights * fac).sum())

    # -- state transform --------------------------------------------------
    def _eta(self, u):
        eta = np.log(np.maximum(u[1:], ETA_FLOOR))
        return eta, spline_slopes(self._t_nodes, eta)

    def _run(self, fn, *args):
        n = self.grid.radii.size
        out = np.empty(n)
        if self._pool is None:
            fn(*args, (0, n), out)
            return out
        bounds = np.linspace(0, n, self.threads + 1).astype(int)
        futures = [self._pool.submit(fn, *args, (int(a), int(b)), out)
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        for f in futures:
            f.result()
        return out

    def gain(self, u):
        """Gain term G(psi) on the grid; G(1) = gamma2 by construction."""
        eta, deta = self._eta(u)
        return self._run(collision_gain, eta, deta,
                         self.plan_plus, self.plan_minus, self.weights)

    def rhs(self, u):
        """Cancellation-aware d psi/dt on the grid (u = 1 - psi form)."""
        eta, deta = self._eta(u)
        return self._run(collision_rhs, u, eta, deta,
                         self.plan_plus, self.plan_minus, self.weights)

    def rhs_panel_maxima(self, u):
        """Per-panel max |contribution| (ascending theta); decay monitor."""
        eta, deta = self._eta(u)
        from ._accel_py import eval_u as _eval
        n = self.weights.size
        rows = self.grid.radii.size
        up = _eval(eta, deta, *self.plan_plus).reshape(rows, n)
        um = _eval(eta, deta, *self.plan_minus).reshape(rows, n)
        bracket = (u[:, None] - up - um + up * um) * self.weights
        npan = self.panel_id.max() + 1
        sums = np.zeros((rows, npan))
        for p in range(npan):
            sel = self.panel_id == p
            sums[:, p] = bracket[:, sel].sum(axis=1)
        return np.abs(sums).max(axis=0)

    def check_panel_decay(self, u, two_s: float):
        """Innermost panel sums must decay toward theta_min."""
        maxima = self.rhs_panel_maxima(u)
        inner = maxima[:8]
        scale = maxima.max()
        if scale < 1e-12:
            return
        bad = 0
        for k in range(len(inner) - 1):
            if inner[k] > 1.05 * inner[k + 1] + 1e-13 * scale:
                bad += 1
        if bad >= 3:
            raise AccuracyError(
                "singular-quadrature panel sums do not decay toward "
                "theta_min; the state's Holder exponent must exceed "
                f"2s = {two_s:g} for the collision integral to converge")


@dataclass
class SolverConfig:
    """Evolution parameters; validated against the contraction guard."""

    kernel: kmod.KernelSpec
    alpha: float = 1.0
    horizon: float = 0.5
    step: float = 0.01
    grid: Optional[RadialGrid] = None
    quadrature: Optional[kmod.AngularQuadrature] = None
    integrator: Optional[str] = None       # auto when None
    picard_tol: float = 1e-11
    picard_max_iter: int = 80
    max_refinements: int = 3
    refine_tol: float = 1e-10
    split_target: float = 0.5              # gamma_split * dt for the euler path
    threads: int = 1
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.step <= 0 or self.horizon < 0:
            raise ConfigError("need step > 0 and horizon >= 0")
        if not 0.0 < self.alpha < 2.0:
            raise ConfigError("alpha must lie in (0, 2)")
        if self.integrator not in (None, "duhamel_picard", "exponential_euler"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.grid is None:
            self.grid = RadialGrid.geometric()

    def resolve_integrator(self) -> str:
        if self.integrator is not None:
            return self.integrator
        return ("exponential_euler" if self.kernel.is_singular_uncut
                else "duhamel_picard")


@dataclass
class StepDiagnostics:
    time: float
    picard_iterations: int = 0
    contraction: float = 0.0
    tau_nodes: int = 0
    refine_delta: float = 0.0
    mass_residual: float = 0.0


@dataclass
class Trajectory:
    """Snapshots psi(t_k, .) plus per-step and per-snapshot diagnostics."""

    times: List[float]
    profiles: List[RadialCharFn]
    config: SolverConfig
    gamma2: float
    gamma_alpha: float
    lambda_alpha: float
    steps: List[StepDiagnostics] = field(default_factory=list)

    def snapshot(self, t: float) -> RadialCharFn:
        k = int(np.argmin(np.abs(np.array(self.times) - t)))
        if abs(self.times[k] - t) > 1e-9:
            raise KeyError(f"no snapshot at t = {t}")
        return self.profiles[k]

    def max_contraction(self) -> float:
        return max((s.contraction for s in self.steps), default=0.0)

    def max_mass_residual(self) -> float:
        return max((s.mass_residual for s in self.steps), default=0.0)

    def diagnostics_rows(self, alpha: Optional[float] = None):
        """(t, mass, sup_norm_vs_1, m_norm_vs_1, moment_upper) per snapshot."""
        alpha = self.config.alpha if alpha is None else alpha
        rows = []
        for t, prof in zip(self.times, self.profiles):
            f = CharFn.radial_grid(prof)
            one = CharFn.one(3)
            sup = metric.sup_norm(f, one, alpha)
            mn = metric.m_norm(f, one, alpha)
            mom = metric.moment_upper(f, alpha)
            rows.append((t, float(prof.values[0]), sup.value, mn.value, mom))
        return rows

    def to_csv(self) -> str:
        lines = ["t,r,psi"]
        for t, prof in zip(self.times, self.profiles):
            for r, p in zip(prof.grid.radii, prof.values):
                lines.append(f"{t:.17g},{r:.17g},{p:.17g}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# spec-level operations on raw profiles
# --------------------------------------------------------------------------

def _as_profile(phi0, grid: RadialGrid) -> RadialCharFn:
    if isinstance(phi0, RadialCharFn):
        return phi0
    if isinstance(phi0, CharFn):
        return sample_radial(phi0, grid)
    raise ConfigError("initial datum must be a CharFn or RadialCharFn")


def collision_gain_values(psi: RadialCharFn, spec: kmod.KernelSpec,
                          quad=None) -> np.ndarray:
    """Grid-sampled gain G(psi); requires an integrable kernel."""
    if spec.is_singular_uncut:
        raise ConfigError("gain alone diverges for the uncut singular "
                          "kernel; use the cancellation-aware right side")
    op = CollisionOperator(psi.grid, spec, quad)
    return op.gain(psi.u_values)


def rhs_noncutoff_values(psi: RadialCharFn, spec: kmod.KernelSpec,
                         quad=None) -> np.ndarray:
    """Cancellation-aware right side for singular kernels, with the
    panel-decay monitor guarding the Holder > 2s precondition."""
    op = CollisionOperator(psi.grid, spec, quad)
    two_s = 2.0 * spec.s if spec.family == "singular" else 0.0
    op.check_panel_decay(psi.u_values, two_s)
    return op.rhs(psi.u_values)


# --------------------------------------------------------------------------
# time stepping
# --------------------------------------------------------------------------

def _etd_hat_weights(z: float):
    """(A, B) with int_0^h e^{-g(h-s)} [(1-s/h) G0 + (s/h) G1] ds
    = h (A G0 + B G1); exact linear-in-s exponential moments."""
    if z < 1e-4:
        A = 0.5 - z / 3.0 + z * z / 8.0
        B = 0.5 - z / 6.0 + z * z / 24.0
        return A, B
    em = math.exp(-z)
    return (1.0 - (1.0 + z) * em) / (z * z), (z - 1.0 + em) / (z * z)


class _DuhamelStepper:
    def __init__(self, op: CollisionOperator, cfg: SolverConfig):
        self.op = op
        self.cfg = cfg
        ga = op.gamma_alpha(cfg.alpha)
        if ga * cfg.step >= 1.0:
            raise ConfigError(
                f"contraction guard violated: gamma_alpha * dt = "
                f"{ga * cfg.step:.3f} >= 1; reduce the step")
        self.gamma_a = ga
        r = op.grid.radii
        # grid seminorms for the contraction measurement
        self._sup_w = np.zeros_like(r)
        self._sup_w[1:] = r[1:] ** (-cfg.alpha)
        tr = np.zeros_like(r)
        dr = np.diff(r[1:])
        mid = 0.5 * (r[1:-1] ** (-1 - cfg.alpha) + r[2:] ** (-1 - cfg.alpha))
        tr[1:-1] += 0.5 * dr * r[1:-1] ** (-1 - cfg.alpha)
        tr[2:] += 0.5 * dr * r[2:] ** (-1 - cfg.alpha)
        self._m_w = 4 * math.pi * tr

    def _dis(self, dpsi):
        a = float(np.max(np.abs(dpsi) * self._sup_w))
        b = float(self._m_w @ np.abs(dpsi))
        return a + b

    def step(self, psi: np.ndarray, h: float, t: float) -> tuple:
        op, cfg = self.op, self.cfg
        g2 = op.gamma2
        K = 2
        prev_end = None
        refine_delta = math.inf
        iterations = 0
        contraction = 0.0
        for _ in range(cfg.max_refinements + 1):
            tau = np.linspace(0.0, h, K + 1)
            decay = np.exp(-g2 * tau)
            G0 = op.gain(1.0 - psi)
            # Euler predictor along the mild form
            P = [psi.copy()]
            for k in range(1, K + 1):
                P.append(psi * decay[k]
                         + (-np.expm1(-g2 * tau[k]) / g2) * G0)
            G = [G0] + [op.gain(1.0 - P[k]) for k in range(1, K + 1)]
            last_change = None
            for it in range(cfg.picard_max_iter):
                iterations += 1
                change = 0.0
                newP = [P[0]]
                for k in range(1, K + 1):
                    acc = psi * decay[k]
                    for i in range(k):
                        hi = tau[i + 1] - tau[i]
                        A, B = _etd_hat_weights(g2 * hi)
                        damp = math.exp(-g2 * (tau[k] - tau[i + 1]))
                        acc = acc + damp * hi * (A * G[i] + B * G[i + 1])
                    newP.append(acc)
                    change = max(change, self._dis(acc - P[k]))
                P = newP
                for k in range(1, K + 1):
                    G[k] = op.gain(1.0 - P[k])
                if last_change is not None and last_change > 1e-13:
                    contraction = max(contraction, change / last_change)
                last_change = change
                if change < cfg.picard_tol:
                    break
            else:
                raise ConvergenceError(
                    f"Picard did not reach {cfg.picard_tol:g} within "
                    f"{cfg.picard_max_iter} sweeps at t = {t:g}",
                    contraction_factor=contraction)
            end = P[K]
            if prev_end is not None:
                refine_delta = float(np.max(np.abs(end - prev_end)))
                if refine_delta < cfg.refine_tol:
                    prev_end = end
                    break
            prev_end = end
            K *= 2
        mass_residual = abs(prev_end[0] - 1.0)
        prev_end[0] = 1.0   # phi(t, 0) is conserved exactly by the equation
        diag = StepDiagnostics(time=t + h, picard_iterations=iterations,
                               contraction=contraction, tau_nodes=K,
                               refine_delta=refine_delta,
                               mass_residual=mass_residual)
        return prev_end, diag


class _ExpEulerStepper:
    def __init__(self, op: CollisionOperator, cfg: SolverConfig):
        self.op = op
        self.cfg = cfg
        self.gamma_split = self._auto_split(cfg.split_target / cfg.step)

    def _auto_split(self, target_rate: float) -> float:
        """Loss rate of the capped kernel part, min(b, m), with
        gamma2(b_m) matched to the requested rate."""
        b = kmod.eval_b(self.op.spec, self.op.theta)
        w0 = self.op.weights / np.maximum(b, 1e-300)  # bare 2 pi w sin(t)

        def g2_cap(m):
            return float((w0 * np.minimum(b, m)).sum())

        if self.op.gamma2 <= target_rate:
            return self.op.gamma2
        lo, hi = 1e-6, float(np.max(b))
        for _ in range(80):
            mid = math.sqrt(lo * hi)
            if g2_cap(mid) < target_rate:
                lo = mid
            else:
                hi = mid
        return g2_cap(math.sqrt(lo * hi))

    def step(self, psi: np.ndarray, h: float, t: float) -> tuple:
        u = 1.0 - psi
        bracket = self.op.rhs(u)
        g = self.gamma_split
        h_eff = -math.expm1(-g * h) / g if g > 0 else h
        psi_new = psi + h_eff * bracket
        if not np.all(np.isfinite(psi_new)):
            raise StepSizeError(f"non-finite state at t = {t + h:g}; "
                                "reduce the step")
        if np.max(np.abs(psi_new)) > 1.0 + 1e-10:
            raise StepSizeError(
                f"modulus monitor tripped at t = {t + h:g} "
                f"(max |psi| = {np.max(np.abs(psi_new)):.6g}); "
                "reduce the step")
        mass_residual = abs(psi_new[0] - 1.0)
        psi_new[0] = 1.0
        return psi_new, StepDiagnostics(time=t + h,
                                        mass_residual=mass_residual)


def evolve(phi0, config: SolverConfig) -> Trajectory:
    """Run the configured integrator from the initial datum."""
    grid = phi0.grid if isinstance(phi0, RadialCharFn) else config.grid
    prof0 = _as_profile(phi0, grid)
    op = CollisionOperator(grid, config.kernel, config.quadrature,
                           config.threads)
    name = config.resolve_integrator()
    if name == "duhamel_picard":
        if config.kernel.is_singular_uncut:
            raise ConfigError("the Duhamel route needs an integrable "
                              "kernel (finite gamma2); add a cutoff")
        stepper = _DuhamelStepper(op, config)
    else:
        if config.kernel.family == "singular":
            hold = prof0.holder_exponent()
            if hold <= 2.0 * config.kernel.s:
                raise ConfigError(
                    f"initial datum has Holder exponent {hold:.3f} at 0; "
                    f"the singular integral needs > 2s = "
                    f"{2 * config.kernel.s:g}")
        stepper = _ExpEulerStepper(op, config)
    nsteps = max(1, int(round(config.horizon / config.step))) \
        if config.horizon > 0 else 0
    traj = Trajectory([0.0], [prof0], config, op.gamma2,
                      op.gamma_alpha(config.alpha),
                      op.lambda_alpha(config.alpha))
    psi = prof0.values.copy()
    t = 0.0
    for n in range(nsteps):
        h = config.step if n < nsteps - 1 else config.horizon - t
        psi, diag = stepper.step(psi, h, t)
        t += h
        traj.steps.append(diag)
        if (n + 1) % config.snapshot_stride == 0 or n == nsteps - 1:
            traj.times.append(t)
            traj.profiles.append(RadialCharFn(grid, psi.copy()))
    return traj


def duhamel_evolve(phi0, spec: kmod.KernelSpec, horizon: float, step: float,
                   **kw) -> Trajectory:
    """Cutoff evolution via the per-step Duhamel fixed point."""
    cfg = SolverConfig(kernel=spec, horizon=horizon, step=step,
                       integrator="duhamel_picard", **kw)
    return evolve(phi0, cfg)


def evolve_noncutoff(phi0, spec: kmod.KernelSpec, horizon: float, step: float,
                     **kw) -> Trajectory:
    """Non-cutoff evolution on the cancellation-aware right side."""
    cfg = SolverConfig(kernel=spec, horizon=horizon, step=step,
                       integrator="exponential_euler", **kw)
    return evolve(phi0, cfg)


# --------------------------------------------------------------------------
# verification experiments
# --------------------------------------------------------------------------

@dataclass
class CutoffStudy:
    levels: List[float]
    successive_distances: List[float]     # D(n_k, n_{k+1})
    direct_distance: float                # D(n_max, direct non-cutoff)
    integrator_tolerance: float
    trajectories: dict

    def distances_decreasing(self) -> bool:
        d = self.successive_distances
        return all(d[k + 1] < d[k] for k in range(len(d) - 1))


def _traj_distance(a: Trajectory, b: Trajectory) -> float:
    d = 0.0
    for ta, pa in zip(a.times, a.profiles):
        try:
            pb = b.snapshot(ta)
        except KeyError:
            continue
        d = max(d, float(np.max(np.abs(pa.values - pb.values))))
    return d


def cutoff_sequence_study(phi0, spec: kmod.KernelSpec, levels, horizon: float,
                          step: Optional[float] = None, **kw) -> CutoffStudy:
    """Evolve the cutoff approximations b_n = min(b, n) and the direct
    non-cutoff route; tabulate sup distances between solutions."""
    if spec.family != "singular" or spec.cutoff is not None:
        raise ConfigError("the study needs an uncut singular kernel")
    levels = sorted(float(n) for n in levels)
    grid = kw.pop("grid", None) or RadialGrid.geometric()
    quad = kw.pop("quadrature", None)
    # one common step satisfying the contraction guard at the largest level
    ga_max = kmod.gamma_alpha(spec.with_cutoff(levels[-1]),
                              kw.get("alpha", 1.0)).value
    step = step or 0.01
    step = min(step, 0.5 / ga_max)
    nsteps = max(1, int(math.ceil(horizon / step - 1e-9)))
    step = horizon / nsteps
    runs = {}
    for n in levels:
        cfg = SolverConfig(kernel=spec.with_cutoff(n), horizon=horizon,
                           step=step, grid=grid, quadrature=quad,
                           integrator="duhamel_picard", **kw)
        runs[n] = evolve(phi0, cfg)
    direct = evolve(phi0, SolverConfig(kernel=spec, horizon=horizon,
                                       step=step, grid=grid, quadrature=quad,
                                       integrator="exponential_euler", **kw))
    runs["direct"] = direct
    # Richardson estimate of the direct route's stepping error
    half = evolve(phi0, SolverConfig(kernel=spec, horizon=horizon,
                                     step=step / 2, grid=grid,
                                     quadrature=quad,
                                     integrator="exponential_euler",
                                     snapshot_stride=2, **kw))
    tol = max(_traj_distance(direct, half), 1e-12)
    succ = [_traj_distance(runs[a], runs[b])
            for a, b in zip(levels[:-1], levels[1:])]
    return CutoffStudy(levels, succ, _traj_distance(runs[levels[-1]], direct),
                       tol, runs)


@dataclass
class StabilityReport:
    times: List[float]
    m_ratios: List[float]
    sup_ratios: List[float]
    lambda_alpha: float
    tolerance: float

    @property
    def max_ratio(self) -> float:
        return max(max(self.m_ratios), max(self.sup_ratios))

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.tolerance

    def offending_times(self):
        bad = []
        for t, a, b in zip(self.times, self.m_ratios, self.sup_ratios):
            if max(a, b) > 1.0 + self.tolerance:
                bad.append(t)
        return bad


def verify_stability(phi0_a, phi0_b, spec: kmod.KernelSpec, alpha: float,
                     horizon: float, step: float, tolerance: float = 0.05,
                     **kw) -> StabilityReport:
    """Check both stability envelopes against e^{lambda_alpha t}.

    Ratios ||phi(t) - psi(t)|| / (e^{lambda_alpha t} ||phi0 - psi0||)
    for the integral norm and the weighted sup norm; both must stay
    below 1 + tolerance at every snapshot.
    """
    grid = kw.pop("grid", None) or RadialGrid.geometric()
    cfg = dict(horizon=horizon, step=step, grid=grid, alpha=alpha, **kw)
    ta = evolve(phi0_a, SolverConfig(kernel=spec, **cfg))
    tb = evolve(phi0_b, SolverConfig(kernel=spec, **cfg))
    lam = ta.lambda_alpha
    eps, R = grid.radii[1], grid.r_max

    def norms(pa, pb):
        fa, fb = CharFn.radial_grid(pa), CharFn.radial_grid(pb)
        return (metric.m_norm(fa, fb, alpha, eps, R).value,
                metric.sup_norm(fa, fb, alpha, eps, R).value)

    m0, s0 = norms(ta.profiles[0], tb.profiles[0])
    if m0 == 0 and s0 == 0:
        times = list(ta.times)
        return StabilityReport(times, [0.0] * len(times), [0.0] * len(times),
                               lam, tolerance)
    times, mrat, srat = [], [], []
    for t, pa in zip(ta.times, ta.profiles):
        pb = tb.snapshot(t)
        m, s = norms(pa, pb)
        env = math.exp(lam * t)
        times.append(t)
        mrat.append(m / (env * m0) if m0 > 0 else 0.0)
        srat.append(s / (env * s0) if s0 > 0 else 0.0)
    return StabilityReport(times, mrat, srat, lam, tolerance)


@dataclass
class ContinuityReport:
    rows: List[tuple]          # (s, t, dis, envelope, ratio)
    constant: float            # max ratio = empirical C
    dis0: float


def verify_continuity(traj: Trajectory, alpha: float,
                      max_pairs: int = 400) -> ContinuityReport:
    """Lipschitz-in-time table: dis(phi(t), phi(s)) against
    |t - s| e^{lambda_alpha max(t,s)} dis(phi0, 1)."""
    n = len(traj.times)
    if n < 3:
        raise ConfigError("need at least three snapshots")
    lam = traj.lambda_alpha
    grid = traj.profiles[0].grid
    eps, R = grid.radii[1], grid.r_max
    one = CharFn.one(3)
    d0 = metric.dis_ab(CharFn.radial_grid(traj.profiles[0]), one,
                       alpha, alpha, eps, R).value
    pairs = []
    strides = [1, 2, 5, 10, 25, n - 1]
    for st in strides:
        for i in range(0, n - st, max(1, (n - st) // 20)):
            pairs.append((i, i + st))
    pairs = sorted(set(pairs))[:max_pairs]
    rows = []
    cmax = 0.0
    for i, j in pairs:
        s, t = traj.times[i], traj.times[j]
        d = metric.dis_ab(CharFn.radial_grid(traj.profiles[i]),
                          CharFn.radial_grid(traj.profiles[j]),
                          alpha, alpha, eps, R).value
        env = abs(t - s) * math.exp(lam * max(t, s)) * max(d0, 1e-300)
        ratio = d / env if env > 0 else 0.0
        rows.append((s, t, d, env, ratio))
        cmax = max(cmax, ratio)
    return ContinuityReport(rows, cmax, d0)


def rhs_mnorm_bound(psi: RadialCharFn, spec: kmod.KernelSpec, alpha: float,
                    quad=None) -> tuple:
    """(lhs, scale): integral-norm size of the right side against the
    kernel factor int_0^1 (1-tau)^{alpha/2} b(tau) dtau times
    ||1 - psi||_M.  Only finiteness and linear scaling are asserted."""
    op = CollisionOperator(psi.grid, spec, quad)
    vals = np.abs(op.rhs(psi.u_values))
    r = psi.grid.radii
    w = np.zeros_like(r)
    dr = np.diff(r[1:])
    w[1:-1] += 0.5 * dr * r[1:-1] ** (-1 - alpha)
    w[2:] += 0.5 * dr * r[2:] ** (-1 - alpha)
    lhs = 4 * math.pi * float(w @ vals)
    theta, wq, _ = kmod.kernel_nodes(spec, op.quad)
    b = kmod.eval_b(spec, theta)
    kf = float((wq * b * (1 - np.cos(theta)) ** (alpha / 2)
                * np.sin(theta)).sum())
    one = CharFn.one(3)
    mn = metric.m_norm(CharFn.radial_grid(psi), one, alpha,
                       psi.grid.radii[1], psi.grid.r_max)
    return lhs, kf * mn.value

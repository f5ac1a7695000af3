"""Characteristic functions of probability measures.

Analytic families (gaussian, symmetric stable, uniform sphere shell),
transforms of finite atomic measures, and sampled radial profiles.
Everything evaluates phi(xi) = int exp(-i v.xi) dF(v); the stable
companion one_minus(xi) = 1 - phi(xi) is what the norm integrals
consume, computed without cancellation at small |xi|.
"""

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._interp import RadialInterpolant
from .errors import ConfigError

__all__ = [
    "DiscreteMeasure", "RadialGrid", "RadialCharFn", "CharFn",
    "sample_radial", "holder_inequality_check", "bochner_spotcheck",
    "random_discrete_measure",
]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic probability measure on R^d (oracle substrate)."""

    velocities: np.ndarray      # (n, d)
    weights: np.ndarray         # (n,)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if v.shape[0] != w.shape[0]:
            raise ConfigError("one weight per atom required")
        if v.shape[1] not in (1, 2, 3):
            raise ConfigError("dimension must be 1, 2 or 3")
        if np.any(w <= 0):
            raise ConfigError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError("weights must sum to 1")
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self) -> int:
        return self.velocities.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ self.velocities

    def is_mean_zero(self, tol=1e-12) -> bool:
        return bool(np.all(np.abs(self.mean) <= tol))

    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=1)

    def moment(self, alpha: float) -> float:
        """Brute-force atom sum of |v|^alpha."""
        sp = self.speeds()
        out = np.zeros_like(sp)
        np.power(sp, alpha, out=out, where=sp > 0)
        return float(self.weights @ out)

    @classmethod
    def from_text(cls, text: str) -> "DiscreteMeasure":
        """Parse one atom per line: d coordinates then the weight."""
        rows = []
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#")[0].strip()
            if not line:
                continue
            parts = [float(x) for x in line.split()]
            if len(parts) < 2:
                raise ConfigError(f"atom line {ln}: need coordinates + weight")
            rows.append(parts)
        if not rows:
            raise ConfigError("no atoms found")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ConfigError("inconsistent atom dimensions")
        arr = np.array(rows)
        return cls(arr[:, :-1], arr[:, -1])

    def to_text(self) -> str:
        buf = io.StringIO()
        for v, w in zip(self.velocities, self.weights):
            coords = " ".join(f"{x:.17g}" for x in v)
            buf.write(f"{coords} {w:.17g}\n")
        return buf.getvalue()


def random_discrete_measure(seed: int, max_atoms: int = 8,
                            radius: float = 10.0, dimension: int = 3,
                            mean_zero: bool = True) -> DiscreteMeasure:
    """Seeded mean-zero measure with atoms inside |v| <= radius."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_atoms + 1))
    v = rng.uniform(-radius / 2.5, radius / 2.5, size=(n, dimension))
    w = rng.uniform(0.2, 1.0, size=n)
    w /= w.sum()
    if mean_zero:
        v = v - w @ v
    return DiscreteMeasure(v, w)


@dataclass(frozen=True)
class RadialGrid:
    """Geometric radial grid 0 = r_0 < r_1 < ... < r_M."""

    radii: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ConfigError("grid must start at 0 and increase strictly")
        object.__setattr__(self, "radii", r)

    @classmethod
    def geometric(cls, points: int = 512, r_min: float = 0.0025,
                  r_max: float = 64.0) -> "RadialGrid":
        if points < 8 or r_min <= 0 or r_max <= r_min:
            raise ConfigError("invalid radial grid parameters")
        r = r_min * (r_max / r_min) ** (np.arange(points) / (points - 1))
        return cls(np.concatenate([[0.0], r]))

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    @property
    def positive(self) -> np.ndarray:
        return self.radii[1:]

    def log_radii(self) -> np.ndarray:
        return np.log(self.positive)

    def fingerprint(self):
        return (self.radii.size, float(self.radii[1]), float(self.radii[-1]))


class RadialCharFn:
    """Sampled isotropic characteristic function psi(r) = phi(|xi|).

    Values live on a RadialGrid; off-grid evaluation goes through the
    log-log spline (see _interp).  Instances are immutable.
    """

    def __init__(self, grid: RadialGrid, values: np.ndarray,
                 holder_exponent: Optional[float] = None):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.radii.shape:
            raise ConfigError("one value per grid radius required")
        if abs(values[0] - 1.0) > 1e-12:
            raise ConfigError("psi(0) must equal 1 (mass normalization)")
        if np.max(np.abs(values)) > 1.0 + 1e-10:
            raise ConfigError("|psi| must not exceed 1")
        self.grid = grid
        self.values = values
        self.values.flags.writeable = False
        self._interp = RadialInterpolant(grid.log_radii(), 1.0 - values[1:])
        self._holder = holder_exponent

    @property
    def u_values(self) -> np.ndarray:
        """1 - psi on the grid (origin included)."""
        return np.concatenate([[0.0], self._interp.u_nodes])

    def eval_radial(self, radii):
        """psi at arbitrary radii within [0, r_M]; beyond raises."""
        return self._interp.psi_at(radii)

    def one_minus_radial(self, radii):
        return self._interp.u_at(radii)

    def holder_exponent(self) -> float:
        """Log-log slope of 1 - psi over the five smallest radii."""
        if self._holder is not None:
            return self._holder
        r = self.grid.positive[:5]
        u = self._interp.u_nodes[:5]
        if np.any(u <= 0):
            return math.inf  # flat start: effectively infinitely smooth
        p, _ = np.polyfit(np.log(r), np.log(u), 1)
        return float(p)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,psi\n")
        for r, p in zip(self.grid.radii, self.values):
            buf.write(f"{r:.17g},{p:.17g}\n")
        return buf.getvalue()


_ISOTROPIC = ("gaussian", "stable", "uniform_sphere", "one")


@dataclass(frozen=True)
class CharFn:
    """Evaluable characteristic function.

    kind: gaussian(sigma) | stable(index) | uniform_sphere(radius)
          | one | discrete(measure) | radial_grid(profile)
    """

    kind: str
    dimension: int = 3
    sigma: float = 1.0
    index: float = 1.0
    radius: float = 1.0
    measure: Optional[DiscreteMeasure] = None
    profile: Optional[RadialCharFn] = field(default=None, repr=False)

    # -- constructors ---------------------------------------------------
    @classmethod
    def gaussian(cls, sigma: float = 1.0, dimension: int = 3) -> "CharFn":
        if sigma <= 0:
            raise ConfigError("gaussian needs sigma > 0")
        return cls("gaussian", dimension, sigma=sigma)

    @classmethod
    def stable(cls, index: float, dimension: int = 3) -> "CharFn":
        if not 0.0 < index < 2.0:
            raise ConfigError("stable index must lie in (0, 2)")
        return cls("stable", dimension, index=index)

    @classmethod
    def uniform_sphere(cls, radius: float = 1.0) -> "CharFn":
        if radius <= 0:
            raise ConfigError("uniform_sphere needs radius > 0")
        return cls("uniform_sphere", 3, radius=radius)

    @classmethod
    def one(cls, dimension: int = 3) -> "CharFn":
        return cls("one", dimension)

    @classmethod
    def discrete(cls, measure: DiscreteMeasure) -> "CharFn":
        return cls("discrete", measure.dimension, measure=measure)

    @classmethod
    def radial_grid(cls, profile: RadialCharFn) -> "CharFn":
        return cls("radial_grid", 3, profile=profile)

    # -- properties -----------------------------------------------------
    @property
    def is_isotropic(self) -> bool:
        if self.kind in _ISOTROPIC or self.kind == "radial_grid":
            return True
        m = self.measure
        if m.velocities.shape[0] == 1 and np.all(m.velocities == 0):
            return True
        if m.dimension == 1:
            # symmetric 1-D atom sets are isotropic on the line
            atoms = sorted(zip(m.velocities[:, 0], m.weights))
            rev = sorted(zip(-m.velocities[:, 0], m.weights))
            return all(abs(a[0] - b[0]) < 1e-12 and abs(a[1] - b[1]) < 1e-12
                       for a, b in zip(atoms, rev))
        return False

    # -- evaluation -----------------------------------------------------
    def eval(self, xi):
        """phi(xi) for points xi of shape (..., d); complex for discrete."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.dimension:
            raise ConfigError(f"points must have dimension {self.dimension}")
        if self.kind == "discrete":
            phase = xi @ self.measure.velocities.T       # (..., n)
            return np.exp(-1j * phase) @ self.measure.weights
        r = np.linalg.norm(xi, axis=-1)
        return self.eval_radial(r) + 0j

    def eval_radial(self, r):
        """phi at radius r; requires an isotropic variant (real-valued)."""
        r = np.asarray(r, dtype=float)
        return 1.0 - self.one_minus_radial(r)

    def one_minus_radial(self, r):
        """1 - phi(|xi|=r), cancellation-free at small r."""
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return -np.expm1(-0.5 * self.sigma ** 2 * r ** 2)
        if self.kind == "stable":
            return -np.expm1(-r ** self.index)
        if self.kind == "uniform_sphere":
            return _one_minus_sinc(self.radius * r)
        if self.kind == "one":
            return np.zeros_like(r)
        if self.kind == "radial_grid":
            return self.profile.one_minus_radial(r)
        if self.kind == "discrete" and self.is_isotropic:
            m = self.measure
            if m.dimension == 1:
                sp = m.velocities[:, 0]
                return 2.0 * (np.sin(np.multiply.outer(r, sp) / 2) ** 2
                              @ m.weights)
            return np.zeros_like(r)  # single atom at the origin
        raise ConfigError(f"{self.kind} variant is not isotropic")

    def sphere_mean_one_minus_re(self, r):
        """Spherical average of Re(1 - phi) at radius r (exact identity).

        For d=3 the direction average of cos(v.xi) is sinc(|v| r); d=2
        gives J0, d=1 cos.  Isotropic variants coincide with
        one_minus_radial.
        """
        r = np.asarray(r, dtype=float)
        if self.kind != "discrete" or self.is_isotropic:
            return self.one_minus_radial(r)
        m = self.measure
        arg = np.multiply.outer(r, m.speeds())
        if self.dimension == 3:
            # 1 - sum w sinc assembled as sum w (1 - sinc): stable near 0
            return _one_minus_sinc(arg) @ m.weights
        if self.dimension == 2:
            from scipy.special import j0
            return (1.0 - j0(arg)) @ m.weights
        return 2.0 * (np.sin(arg / 2) ** 2) @ m.weights

    def oscillation_scale(self) -> float:
        """Oscillation frequency of phi along a ray (0 = monotone)."""
        if self.kind == "uniform_sphere":
            return self.radius
        if self.kind == "discrete":
            sp = self.measure.speeds()
            return float(sp.max()) if sp.size else 0.0
        if self.kind == "radial_grid":
            return 1.0
        return 0.0


def _one_minus_sinc(x):
    """1 - sin(x)/x without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    out = np.where(small,
                   x * x / 6.0 * (1.0 - x * x / 20.0),
                   1.0 - np.sin(xs) / xs)
    return out


def sample_radial(phi: CharFn, grid: RadialGrid) -> RadialCharFn:
    """Sample an isotropic characteristic function onto a radial grid."""
    if not phi.is_isotropic:
        raise ConfigError("sample_radial needs an isotropic variant")
    u = phi.one_minus_radial(grid.positive)
    values = np.concatenate([[1.0], 1.0 - u])
    return RadialCharFn(grid, values)


def holder_inequality_check(phi: CharFn, pairs, tolerance: float = 0.0):
    """Max violation of the two-point modulus bound.

    For characteristic functions,
    |phi(xi) - phi(xi+eta)| <= 4|1-phi(xi)|^{1/2}|1-phi(eta)|^{1/2}
                               + |1-phi(eta)|;
    returns max(LHS - RHS) over the pairs (<= tolerance for genuine
    characteristic functions).
    """
    xi, eta = pairs
    lhs = np.abs(phi.eval(xi) - phi.eval(xi + eta))
    a = np.abs(1.0 - phi.eval(xi))
    b = np.abs(1.0 - phi.eval(eta))
    rhs = 4.0 * np.sqrt(a) * np.sqrt(b) + b
    return float(np.max(lhs - rhs))


def bochner_spotcheck(phi, points):
    """Minimum eigenvalue of the Gram matrix [phi(xi_i - xi_j)].

    Sampled necessary condition for positive definiteness (Bochner).
    phi may be a CharFn or a plain radial callable; points are (k, d)
    locations, or 1-D radii for radial callables.  k <= 64.
    """
    pts = np.asarray(points, dtype=float)
    k = pts.shape[0]
    if k > 64:
        raise ConfigError("spot check is a dense eigen-solve; use k <= 64")
    if isinstance(phi, CharFn):
        if pts.ndim == 1:
            pts = pts[:, None] * np.eye(phi.dimension)[0]
        diff = pts[:, None, :] - pts[None, :, :]
        gram = phi.eval(diff)
    else:
        if pts.ndim != 1:
            raise ConfigError("radial callables take 1-D sample points")
        gram = phi(np.abs(pts[:, None] - pts[None, :]))
    gram = np.asarray(gram)
    herm = 0.5 * (gram + gram.conj().T)
    return float(np.linalg.eigvalsh(herm).min())

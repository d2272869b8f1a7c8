"""Fisher geometry of the gamma and Weibull parameter planes.

Coordinates are always ordered (scale, shape).  The module provides the
Fisher information metrics, three flavours of connection coefficients,
a fixed-step geodesic integrator, and a shooting solver for geodesic
distances:

* `christoffel_from_metric` is the Levi-Civita connection obtained
  numerically from the metric (central differences) and serves as the
  geometric reference.
* `_levi_civita` holds the same symbols in closed form and is what the
  integrator actually evaluates, for speed.  Tests pin the two against
  each other.
* `christoffel_gamma_alpha` and `christoffel_weibull` reproduce known
  closed-form coefficient sets for the two families.  The Weibull set
  is kept exactly as printed in its source formulas even though its
  (k=2, i=j=1) entry disagrees with the Levi-Civita symbols of the
  Fisher metric by a factor of 6; see the docstring there.

Index conventions: first-kind arrays are indexed [i, j, k] meaning
Gamma_ij,k and second-kind arrays [k, i, j] meaning Gamma^k_ij.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import GammaParams, WeibullParams
from .divergences import skld
from .specfun import EULER_GAMMA, tetragamma, trigamma

_PI2 = math.pi * math.pi
# (xi - 1)^2 + pi^2/6, recurring Weibull shape constant
_WEIBULL_C = (EULER_GAMMA - 1.0) ** 2 + _PI2 / 6.0

_DOMAIN_FLOOR = 1e-12
_COND_LIMIT = 1e12


class SingularMetric(ValueError):
    """The metric tensor is numerically singular at the requested point."""


class LeftDomain(RuntimeError):
    """A geodesic left the positive parameter quadrant."""


class NoConvergence(RuntimeError):
    """The boundary value solver failed to hit the target point."""


class Family(enum.Enum):
    GAMMA = "gamma"
    WEIBULL = "weibull"


def make_params(family: Family, scale: float, shape: float):
    """Build the parameter object of the given family from (scale, shape)."""
    if family is Family.GAMMA:
        return GammaParams(alpha=scale, beta=shape)
    if family is Family.WEIBULL:
        return WeibullParams(lam=scale, mu=shape)
    raise ValueError("unknown family %r" % (family,))


def theta_of(p) -> np.ndarray:
    """Coordinate vector (scale, shape) of a parameter object."""
    if isinstance(p, GammaParams):
        return np.array([p.alpha, p.beta])
    if isinstance(p, WeibullParams):
        return np.array([p.lam, p.mu])
    raise TypeError("unsupported parameter type %r" % type(p).__name__)


def family_of(p) -> Family:
    if isinstance(p, GammaParams):
        return Family.GAMMA
    if isinstance(p, WeibullParams):
        return Family.WEIBULL
    raise TypeError("unsupported parameter type %r" % type(p).__name__)


def _fisher(family: Family, scale: float, shape: float) -> np.ndarray:
    if family is Family.GAMMA:
        return np.array([
            [shape / (scale * scale), 1.0 / scale],
            [1.0 / scale, trigamma(shape)],
        ])
    g12 = (EULER_GAMMA - 1.0) / scale
    return np.array([
        [shape * shape / (scale * scale), g12],
        [g12, _WEIBULL_C / (shape * shape)],
    ])


def fisher_gamma(p: GammaParams) -> np.ndarray:
    """Fisher information of the gamma model in (alpha, beta) coordinates.

    [[beta/alpha^2, 1/alpha], [1/alpha, psi'(beta)]].  The frequently
    quoted diagonal form diag(beta/m^2, psi'(beta) - 1/beta) is this
    same metric expressed in (mean, shape) coordinates with m = alpha
    beta; in the scale coordinates used by the density, the divergences
    and the sampler, the off-diagonal entry 1/alpha is nonzero, and the
    tests pin the exact coordinate-change identity between the two.
    """
    return _fisher(Family.GAMMA, p.alpha, p.beta)


def fisher_weibull(p: WeibullParams) -> np.ndarray:
    """Fisher information of the Weibull model in (lam, mu) coordinates.

    [[mu^2/lam^2, (xi-1)/lam], [(xi-1)/lam, ((xi-1)^2 + pi^2/6)/mu^2]]
    with xi the Euler-Mascheroni constant.
    """
    return _fisher(Family.WEIBULL, p.lam, p.mu)


def fisher_matrix(p) -> np.ndarray:
    """Fisher information at a parameter point, dispatched on its type."""
    th = theta_of(p)
    return _fisher(family_of(p), float(th[0]), float(th[1]))


@dataclass(frozen=True)
class ChristoffelSymbols:
    """Connection coefficients at a point.

    first_kind is indexed [i, j, k] meaning Gamma_ij,k; second_kind is
    indexed [k, i, j] meaning Gamma^k_ij.  Each op fills the kind it
    actually produces and leaves the other None.
    """

    first_kind: Optional[np.ndarray] = None
    second_kind: Optional[np.ndarray] = None


def christoffel_gamma_alpha(p: GammaParams, a: float = 0.0) -> ChristoffelSymbols:
    """First-kind alpha-connection coefficients of the gamma plane.

    These derive from the potential phi = log Gamma(beta) - beta log(alpha)
    as Gamma_ij,k = (1-a)/2 * d_i d_j d_k phi, hence they are fully
    symmetric in all three indices.  Nonzero up to symmetry:

        Gamma_11,1 = -(1-a) beta / alpha^3
        Gamma_11,2 = Gamma_12,1 = Gamma_21,1 = (1-a) / (2 alpha^2)
        Gamma_22,2 = (1-a) psi''(beta) / 2

    At a = 1 the connection is flat (all coefficients vanish).
    """
    alpha, beta = p.alpha, p.beta
    f = 1.0 - a
    out = np.zeros((2, 2, 2))
    out[0, 0, 0] = -f * beta / alpha ** 3
    mixed = f / (2.0 * alpha * alpha)
    out[0, 0, 1] = out[0, 1, 0] = out[1, 0, 0] = mixed
    out[1, 1, 1] = f * tetragamma(beta) / 2.0
    return ChristoffelSymbols(first_kind=out)


def christoffel_weibull(p: WeibullParams) -> ChristoffelSymbols:
    """Second-kind connection coefficients of the Weibull plane, closed form.

    Reproduces the coefficient set exactly as printed in its source
    derivation.  Caution: the [1, 0, 0] entry (-mu^3 / (pi^2 lam^2))
    disagrees with the Levi-Civita symbols of fisher_weibull, which
    carry an extra factor 6 there; every other entry matches.  The
    geodesic solver therefore uses the metric-derived symbols, and this
    function is kept as the closed-form reference it is.
    """
    lam, mu = p.lam, p.mu
    xi = EULER_GAMMA
    out = np.zeros((2, 2, 2))
    out[0, 0, 0] = 6.0 * (xi * mu - mu - _PI2 / 6.0) / (_PI2 * lam)
    out[1, 0, 0] = -mu ** 3 / (_PI2 * lam * lam)
    out[0, 0, 1] = out[0, 1, 0] = 6.0 * _WEIBULL_C / (_PI2 * mu)
    out[1, 0, 1] = out[1, 1, 0] = 6.0 * mu * (1.0 - xi) / (_PI2 * lam)
    out[0, 1, 1] = -6.0 * lam * (1.0 - xi) * _WEIBULL_C / (_PI2 * mu ** 3)
    out[1, 1, 1] = -6.0 * _WEIBULL_C / (_PI2 * mu)
    return ChristoffelSymbols(second_kind=out)


def christoffel_from_metric(family: Family, p, rel_step: float = 1e-6,
                            metric=None) -> ChristoffelSymbols:
    """Second-kind Levi-Civita symbols from the Fisher metric.

    Metric derivatives are central differences with a relative step, so
    this works for any family the metric is defined for and serves as
    the reference the closed-form symbols are validated against.  A
    custom metric callable (scale, shape) -> 2x2 array can be supplied
    to probe, e.g., rescaling invariance.
    """
    th = theta_of(p) if not isinstance(p, np.ndarray) else np.asarray(p, float)
    if metric is None:
        metric = lambda s, sh: _fisher(family, s, sh)
    g = metric(th[0], th[1])
    if not np.all(np.isfinite(g)) or np.linalg.cond(g) > _COND_LIMIT:
        raise SingularMetric("metric is singular at %s" % (tuple(th),))
    dg = np.zeros((2, 2, 2))
    for r in range(2):
        h = rel_step * th[r]
        hi = th.copy()
        lo = th.copy()
        hi[r] += h
        lo[r] -= h
        dg[r] = (metric(hi[0], hi[1]) - metric(lo[0], lo[1])) / (2.0 * h)
    ginv = np.linalg.inv(g)
    out = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                s = 0.0
                for r in range(2):
                    s += ginv[k, r] * (dg[i][j, r] + dg[j][i, r] - dg[r][i, j])
                out[k, i, j] = 0.5 * s
    return ChristoffelSymbols(second_kind=out)


def _levi_civita(family: Family, scale: float, shape: float):
    """Closed-form Levi-Civita symbols as a 6-tuple.

    Order: (G^1_11, G^1_12, G^1_22, G^2_11, G^2_12, G^2_22).  These are
    the exact symbols of the Fisher metrics above; tests compare them
    with christoffel_from_metric.
    """
    if family is Family.GAMMA:
        # hand-derived from g = [[b/a^2, 1/a], [1/a, psi'(b)]] with
        # D = b psi'(b) - 1 (positive since psi'(b) > 1/b)
        pg = trigamma(shape)
        d = shape * pg - 1.0
        return (
            (1.5 - shape * pg) / (scale * d),
            pg / (2.0 * d),
            -scale * tetragamma(shape) / (2.0 * d),
            -shape / (2.0 * scale * scale * d),
            -1.0 / (2.0 * scale * d),
            shape * tetragamma(shape) / (2.0 * d),
        )
    xi = EULER_GAMMA
    lam, mu = scale, shape
    return (
        6.0 * (xi * mu - mu - _PI2 / 6.0) / (_PI2 * lam),
        6.0 * _WEIBULL_C / (_PI2 * mu),
        -6.0 * lam * (1.0 - xi) * _WEIBULL_C / (_PI2 * mu ** 3),
        -6.0 * mu ** 3 / (_PI2 * lam * lam),
        6.0 * mu * (1.0 - xi) / (_PI2 * lam),
        -6.0 * _WEIBULL_C / (_PI2 * mu),
    )


def line_element(p, dtheta) -> float:
    """Length of the tangent vector dtheta under the Fisher metric at p."""
    d = np.asarray(dtheta, dtype=np.float64)
    g = fisher_matrix(p)
    val = float(d @ g @ d)
    if val < 0.0:
        raise SingularMetric("negative squared length %g" % val)
    return math.sqrt(val)


@dataclass
class ParamPath:
    """A parameter curve sampled at increasing times.

    points has one (scale, shape) row per sample; velocities is filled
    by the integrator and may be None for hand-built paths.
    """

    family: Family
    times: np.ndarray
    points: np.ndarray
    velocities: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        if self.times.shape != (self.points.shape[0],):
            raise ValueError("times and points disagree in length")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.points <= 0.0):
            raise ValueError("path leaves the positive quadrant")


def path_length(path: ParamPath) -> float:
    """Riemannian length of the sampled path.

    Midpoint composite rule: each segment is measured with the metric
    at its midpoint, which is second order accurate in the sample
    spacing and exactly reversal-symmetric.
    """
    pts = path.points
    total = 0.0
    for i in range(len(pts) - 1):
        d = pts[i + 1] - pts[i]
        mid = 0.5 * (pts[i] + pts[i + 1])
        g = _fisher(path.family, mid[0], mid[1])
        total += math.sqrt(float(d @ g @ d))
    return total


def _accel(family, th0, th1, v0, v1):
    if th0 < _DOMAIN_FLOOR or th1 < _DOMAIN_FLOOR:
        raise LeftDomain("geodesic reached (%.3g, %.3g)" % (th0, th1))
    c111, c112, c122, c211, c212, c222 = _levi_civita(family, th0, th1)
    a0 = -(c111 * v0 * v0 + 2.0 * c112 * v0 * v1 + c122 * v1 * v1)
    a1 = -(c211 * v0 * v0 + 2.0 * c212 * v0 * v1 + c222 * v1 * v1)
    return a0, a1


def geodesic_shoot(family: Family, start, velocity, t_end: float = 1.0,
                   steps: int = 256) -> ParamPath:
    """Integrate the geodesic equation from a point and initial velocity.

    Classic fixed-step fourth-order Runge-Kutta on the first-order
    system (theta, theta_dot).  Raises LeftDomain as soon as any stage
    evaluates outside the positive quadrant.
    """
    th = theta_of(start) if not isinstance(start, np.ndarray) else np.asarray(start, float)
    x0, x1 = float(th[0]), float(th[1])
    v0, v1 = float(velocity[0]), float(velocity[1])
    if steps < 16:
        raise ValueError("need at least 16 integration steps")
    h = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)
    points = np.empty((steps + 1, 2))
    vels = np.empty((steps + 1, 2))
    points[0] = (x0, x1)
    vels[0] = (v0, v1)
    for n in range(steps):
        k1x0, k1x1 = v0, v1
        k1v0, k1v1 = _accel(family, x0, x1, v0, v1)

        k2x0, k2x1 = v0 + 0.5 * h * k1v0, v1 + 0.5 * h * k1v1
        k2v0, k2v1 = _accel(family, x0 + 0.5 * h * k1x0, x1 + 0.5 * h * k1x1, k2x0, k2x1)

        k3x0, k3x1 = v0 + 0.5 * h * k2v0, v1 + 0.5 * h * k2v1
        k3v0, k3v1 = _accel(family, x0 + 0.5 * h * k2x0, x1 + 0.5 * h * k2x1, k3x0, k3x1)

        k4x0, k4x1 = v0 + h * k3v0, v1 + h * k3v1
        k4v0, k4v1 = _accel(family, x0 + h * k3x0, x1 + h * k3x1, k4x0, k4x1)

        x0 += h / 6.0 * (k1x0 + 2.0 * k2x0 + 2.0 * k3x0 + k4x0)
        x1 += h / 6.0 * (k1x1 + 2.0 * k2x1 + 2.0 * k3x1 + k4x1)
        v0 += h / 6.0 * (k1v0 + 2.0 * k2v0 + 2.0 * k3v0 + k4v0)
        v1 += h / 6.0 * (k1v1 + 2.0 * k2v1 + 2.0 * k3v1 + k4v1)
        if x0 < _DOMAIN_FLOOR or x1 < _DOMAIN_FLOOR:
            raise LeftDomain("geodesic reached (%.3g, %.3g) at t=%.4g" % (x0, x1, times[n + 1]))
        points[n + 1] = (x0, x1)
        vels[n + 1] = (v0, v1)
    return ParamPath(family=family, times=times, points=points, velocities=vels)


def _endpoint(family, th_start, v, steps):
    """Endpoint of the geodesic with initial velocity v, or None if it
    escapes the domain."""
    try:
        path = geodesic_shoot(family, th_start, v, 1.0, steps)
    except LeftDomain:
        return None
    return path.points[-1]


@dataclass
class GeodesicResult:
    distance: float
    path: ParamPath
    iterations: int
    endpoint_error: float


def geodesic_distance_bvp(family: Family, a, b, steps: int = 192,
                          tol: float = 1e-10, max_iter: int = 64) -> GeodesicResult:
    """Geodesic distance between two same-family points by shooting.

    Damped Newton iteration on the initial velocity with a forward
    difference Jacobian, started from the straight chord.  When a full
    sweep of step dampings fails to reduce the endpoint miss, a scan
    over the velocity magnitude along the current direction is used to
    re-seed the iteration.  The reported distance is the length of the
    solved path, Richardson-extrapolated from half and full resolution.
    """
    th_a = theta_of(a)
    th_b = theta_of(b)
    scale = max(1.0, float(np.max(np.abs(th_b))))
    v = th_b - th_a

    def miss(vel):
        end = _endpoint(family, th_a, vel, steps)
        if end is None:
            return None, None
        resid = end - th_b
        return float(np.max(np.abs(resid))) / scale, resid

    err, resid = miss(v)
    if err is None:
        raise NoConvergence("initial chord leaves the domain")

    iters = 0
    while err > tol and iters < max_iter:
        iters += 1
        # forward difference Jacobian of the endpoint in the velocity
        jac = np.empty((2, 2))
        ok = True
        for j in range(2):
            h = 1e-6 * (1.0 + abs(v[j]))
            vp = v.copy()
            vp[j] += h
            end = _endpoint(family, th_a, vp, steps)
            if end is None:
                ok = False
                break
            jac[:, j] = (end - (resid + th_b)) / h
        if ok:
            try:
                delta = np.linalg.solve(jac, resid)
            except np.linalg.LinAlgError:
                ok = False
        if ok:
            improved = False
            damp = 1.0
            for _ in range(12):
                cand = v - damp * delta
                e2, r2 = miss(cand)
                if e2 is not None and e2 < err:
                    v, err, resid = cand, e2, r2
                    improved = True
                    break
                damp *= 0.5
            if improved:
                continue
        # fallback: scan the velocity magnitude along the current direction
        best = (err, v, resid)
        for s in np.geomspace(0.25, 2.5, 17):
            cand = v * s
            e2, r2 = miss(cand)
            if e2 is not None and e2 < best[0]:
                best = (e2, cand, r2)
        if best[0] >= err:
            raise NoConvergence(
                "shooting stalled at endpoint error %.3g (tol %.3g)" % (err, tol))
        err, v, resid = best[0], best[1], best[2]

    if err > tol:
        raise NoConvergence(
            "no convergence after %d iterations, endpoint error %.3g" % (iters, err))

    fine = geodesic_shoot(family, th_a, v, 1.0, 2 * steps)
    coarse = ParamPath(family=family, times=fine.times[::2], points=fine.points[::2])
    l_fine = path_length(fine)
    l_coarse = path_length(coarse)
    distance = (4.0 * l_fine - l_coarse) / 3.0
    return GeodesicResult(distance=distance, path=fine, iterations=iters,
                          endpoint_error=err)


def gd_skld(p, q) -> float:
    """Geodesic distance approximation sqrt(2 * skld(p, q)).

    Exact to first order in the separation: 2 * skld expands to the
    Fisher quadratic form, so the ratio to line_element tends to one
    for nearby points.
    """
    return math.sqrt(max(0.0, 2.0 * skld(p, q)))

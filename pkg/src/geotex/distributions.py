"""Gamma and Weibull models: densities, moments, sampling, fitting.

Parameterisation used throughout the package:

* gamma: scale alpha > 0, shape beta > 0, density
  f(x) = x^(beta-1) exp(-x/alpha) / (alpha^beta Gamma(beta))
* Weibull: scale lam > 0, shape mu > 0, density
  f(x) = (mu/lam) (x/lam)^(mu-1) exp(-(x/lam)^mu)

Fitting is by maximum likelihood.  The gamma shape solves
log(beta) - psi(beta) = log(mean(x)) - mean(log x) by Newton iteration
from the standard rational initialiser; the Weibull shape solves the
profile likelihood equation 1/mu = sum(x^mu log x)/sum(x^mu) - mean(log x)
by safeguarded Newton.  Both stop on a residual below `tol` and raise
ConvergenceError when the iteration cap is hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import digamma, log_gamma, trigamma


class ConvergenceError(RuntimeError):
    """An iterative fit exhausted its iteration budget."""


class DegenerateSample(ValueError):
    """The sample carries no usable shape information (e.g. constant data)."""


def _check_positive(value, name):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValueError("%s must be a positive finite real, got %r" % (name, value))
    return float(value)


@dataclass(frozen=True)
class GammaParams:
    """Gamma distribution parameters (scale alpha, shape beta)."""

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_positive(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _check_positive(self.beta, "beta"))


@dataclass(frozen=True)
class WeibullParams:
    """Weibull distribution parameters (scale lam, shape mu)."""

    lam: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_positive(self.lam, "lam"))
        object.__setattr__(self, "mu", _check_positive(self.mu, "mu"))


class Sample:
    """A batch of strictly positive observations.

    Zeros are rejected here on purpose: both model families have
    log-likelihood terms in log x, and silently dropping or clamping
    values would bias the fit.  Callers that can produce exact zeros
    must filter them before constructing the Sample.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("sample must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample contains non-finite values")
        if np.any(values <= 0.0):
            raise ValueError("sample contains non-positive values")
        self.values = values

    def __len__(self):
        return int(self.values.size)

    def __repr__(self):
        return "Sample(n=%d, mean=%.6g)" % (len(self), float(self.values.mean()))


def _check_support(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("density is defined for finite x > 0 only")
    return x


def gamma_log_pdf(x, p: GammaParams):
    """Log-density of the gamma model, vectorised over x > 0."""
    x = _check_support(x)
    return (p.beta - 1.0) * np.log(x) - x / p.alpha \
        - p.beta * math.log(p.alpha) - log_gamma(p.beta)


def gamma_pdf(x, p: GammaParams):
    return np.exp(gamma_log_pdf(x, p))


def weibull_log_pdf(x, p: WeibullParams):
    """Log-density of the Weibull model, vectorised over x > 0."""
    x = _check_support(x)
    z = np.log(x) - math.log(p.lam)
    # overflow of the hazard term to +inf gives the correct -inf log
    # density in the far tail, so the warning is suppressed
    with np.errstate(over="ignore"):
        return math.log(p.mu / p.lam) + (p.mu - 1.0) * z - np.exp(p.mu * z)


def weibull_pdf(x, p: WeibullParams):
    return np.exp(weibull_log_pdf(x, p))


def gamma_moments(p: GammaParams):
    """(mean, variance) of the gamma model."""
    return p.alpha * p.beta, p.alpha * p.alpha * p.beta


def weibull_moments(p: WeibullParams):
    """(mean, variance) of the Weibull model."""
    g1 = math.exp(log_gamma(1.0 + 1.0 / p.mu))
    g2 = math.exp(log_gamma(1.0 + 2.0 / p.mu))
    return p.lam * g1, p.lam * p.lam * (g2 - g1 * g1)


def gamma_sample(p: GammaParams, n: int, seed) -> Sample:
    """Draw n gamma variates (Marsaglia-Tsang via numpy) as a Sample."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    return Sample(rng.gamma(shape=p.beta, scale=p.alpha, size=n))


def weibull_inverse_survival(u, p: WeibullParams):
    """Map survival probabilities u in (0, 1] to Weibull quantiles.

    S(x) = exp(-(x/lam)^mu), so S^-1(u) = lam * (-log u)^(1/mu).
    With u uniform this is the sampling transform; u = 1/e maps to lam.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0) or np.any(u > 1.0):
        raise ValueError("survival probabilities must lie in (0, 1]")
    return p.lam * (-np.log(u)) ** (1.0 / p.mu)


def weibull_sample(p: WeibullParams, n: int, seed) -> Sample:
    """Draw n Weibull variates by inverse transform as a Sample."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    # rng.random can in principle return exactly 0; keep the transform total
    u = np.where(u > 0.0, u, np.finfo(np.float64).tiny)
    return Sample(weibull_inverse_survival(u, p))


def gamma_mle(sample: Sample, tol: float = 1e-10, max_iter: int = 200) -> GammaParams:
    """Maximum likelihood gamma fit.

    Newton iteration on g(beta) = log(beta) - psi(beta) - s with
    s = log(mean x) - mean(log x), started from
    beta0 = (3 - s + sqrt((s-3)^2 + 24 s)) / (12 s).
    g is strictly decreasing with a single root, so plain Newton with a
    positivity guard is enough.  alpha follows as mean(x)/beta.
    """
    x = sample.values
    if x.size < 2:
        raise DegenerateSample("gamma fit needs at least 2 observations")
    mean = float(x.mean())
    s = math.log(mean) - float(np.log(x).mean())
    if not (s > 1e-12):
        # constant (or numerically constant) data: the shape diverges
        raise DegenerateSample("log-dispersion %.3g too small for a gamma fit" % s)

    beta = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(max_iter):
        resid = math.log(beta) - digamma(beta) - s
        if abs(resid) <= tol:
            return GammaParams(alpha=mean / beta, beta=beta)
        step = resid / (1.0 / beta - trigamma(beta))
        nxt = beta - step
        beta = nxt if nxt > 0.0 else beta / 2.0
    raise ConvergenceError("gamma shape iteration did not converge in %d steps" % max_iter)


def _weibull_profile(mu, logs, log_weights_base):
    """Residual 1/mu - A(mu) + mean(log x) and its derivative.

    A(mu) = sum(x^mu log x) / sum(x^mu) is evaluated through shifted
    exponentials so large mu cannot overflow.
    """
    shifted = logs - logs.max()
    w = np.exp(mu * shifted)
    wsum = w.sum()
    a = float((w * logs).sum() / wsum)
    second = float((w * logs * logs).sum() / wsum)
    resid = 1.0 / mu - a + log_weights_base
    deriv = -1.0 / (mu * mu) - (second - a * a)
    return resid, deriv, a


def weibull_mle(sample: Sample, tol: float = 1e-10, max_iter: int = 200) -> WeibullParams:
    """Maximum likelihood Weibull fit.

    Solves the shape profile equation by Newton iteration from
    mu0 = pi / (sqrt(6) std(log x)), falling back to bisection inside a
    sign-change bracket whenever a Newton step leaves it.  The residual
    1/mu - sum(x^mu log x)/sum(x^mu) + mean(log x) is strictly
    decreasing in mu, which makes the bracket easy to maintain.
    """
    x = sample.values
    if x.size < 2:
        raise DegenerateSample("Weibull fit needs at least 2 observations")
    logs = np.log(x)
    mean_log = float(logs.mean())
    sd_log = float(logs.std())
    if not (sd_log > 1e-12):
        raise DegenerateSample("log-dispersion %.3g too small for a Weibull fit" % sd_log)

    mu = math.pi / (math.sqrt(6.0) * sd_log)

    # bracket the root: residual is positive below it, negative above
    lo, hi = mu, mu
    r, _, _ = _weibull_profile(mu, logs, mean_log)
    grow = 0
    while r > 0.0:
        lo = hi
        hi *= 2.0
        r, _, _ = _weibull_profile(hi, logs, mean_log)
        grow += 1
        if grow > 200:
            raise ConvergenceError("could not bracket the Weibull shape from above")
    grow = 0
    r, _, _ = _weibull_profile(lo, logs, mean_log)
    while r < 0.0:
        hi = lo
        lo /= 2.0
        r, _, _ = _weibull_profile(lo, logs, mean_log)
        grow += 1
        if grow > 200:
            raise ConvergenceError("could not bracket the Weibull shape from below")

    mu = min(max(mu, lo), hi)
    for _ in range(max_iter):
        resid, deriv, _ = _weibull_profile(mu, logs, mean_log)
        if abs(resid) <= tol:
            break
        if resid > 0.0:
            lo = max(lo, mu)
        else:
            hi = min(hi, mu)
        nxt = mu - resid / deriv
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        mu = nxt
    else:
        raise ConvergenceError("Weibull shape iteration did not converge in %d steps" % max_iter)

    # lam = (mean(x^mu))^(1/mu), again through shifted exponentials
    m = logs.max()
    log_lam = m + math.log(float(np.exp(mu * (logs - m)).mean())) / mu
    return WeibullParams(lam=math.exp(log_lam), mu=mu)

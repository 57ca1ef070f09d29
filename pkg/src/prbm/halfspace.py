"""Half-space laws for partially reflected Brownian motion.

Everything here is exact: closed forms where they exist, adaptive quadrature
of the defining integrals otherwise. Lengths are in units of the interface
scale; the walk has unit variance per unit time, so the single physical
parameter is the absorption length Lambda (the mean of the exponential
local-time threshold). The key objects:

* stopping_time_density / stopping_time_cdf: law of the absorption time for
  the motion started on the interface of a half-space.
* spread_kernel_t: lateral density of the final absorption point for a walk
  started at the origin of the interface (translation invariant).
* eta: the correction factor by which that kernel differs from the harmonic
  measure density seen from height Lambda.
* absorption_probability_disk: probability that the walk started at the
  origin is finally absorbed within lateral distance r.
* harmonic_density_halfspace / spread_density_halfspace: interior-to-boundary
  absorption densities at Lambda = 0 and Lambda > 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InvalidParam, NumericOverflowWarning, SlowConvergence

__all__ = [
    "TransportParams",
    "QuadratureConfig",
    "stopping_time_density",
    "stopping_time_cdf",
    "spread_kernel_t",
    "eta",
    "absorption_probability_disk",
    "harmonic_density_halfspace",
    "spread_density_halfspace",
]


@dataclass(frozen=True)
class TransportParams:
    """Physical triple for the mixed boundary condition.

    Lambda = D/W is the absorption length, D the diffusion coefficient,
    C0 the source concentration. Impedances are reported per unit C0.
    """

    Lambda: float
    D: float = 1.0
    C0: float = 1.0

    def __post_init__(self) -> None:
        if not self.Lambda >= 0:
            raise InvalidParam("Lambda must be nonnegative")
        if not self.D > 0:
            raise InvalidParam("D must be positive")
        if not self.C0 > 0:
            raise InvalidParam("C0 must be positive")


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    cutoff: float = 50.0  # upper limit for exponentially damped u-integrals

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise InvalidParam("rel_tol must be positive")
        if self.max_subdivisions < 10:
            raise InvalidParam("max_subdivisions must be at least 10")
        if math.exp(-self.cutoff) >= self.rel_tol:
            raise InvalidParam("cutoff too small: truncated tail exceeds rel_tol")


_DEFAULT_CFG = QuadratureConfig()

# Beyond this scaled time the closed form cancels catastrophically; the
# asymptotic series below agrees with it to ~1e-12 relative at the switch.
_TAIL_SWITCH = 1e4


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise InvalidParam("Lambda must be positive")
    return lam


def stopping_time_density(t, Lambda: float, method: str = "closed", cfg: QuadratureConfig | None = None):
    """Density of the absorption time for the half-space walk started on the wall.

    The scaled variable is tau = t / (2 Lambda^2); the density is
    (1/(2 Lambda^2)) [ (pi tau)^{-1/2} - erfcx(sqrt(tau)) ], switching to the
    asymptotic tail series for tau > 1e4 where the bracket cancels. The
    "integral" method evaluates the defining z-integral by quadrature and is
    kept as an independent oracle for the closed form.
    """
    lam = _check_lambda(Lambda)
    if method == "integral":
        cfg = cfg or _DEFAULT_CFG
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        for i, ti in enumerate(t_arr):
            if not ti > 0:
                raise InvalidParam("t must be positive")
            f = lambda z: z * math.exp(-z * z / (2 * ti) - z / lam)
            val, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions)
            out[i] = val / (lam * math.sqrt(2 * math.pi) * ti**1.5)
        return out if np.ndim(t) else float(out[0])
    if method != "closed":
        raise InvalidParam(f"unknown method {method!r}")

    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidParam("t must be positive")
    tau = t_arr / (2 * lam * lam)
    out = np.zeros_like(tau)

    overflow = tau > 1e280
    if np.any(overflow):
        warnings.warn(
            "stopping-time density underflows for t/Lambda^2 this large; returning 0",
            NumericOverflowWarning,
        )
    tail = (tau > _TAIL_SWITCH) & ~overflow
    core = ~tail & ~overflow
    if np.any(core):
        tc = tau[core]
        out[core] = (1.0 / (2 * lam * lam)) * (1.0 / np.sqrt(np.pi * tc) - special.erfcx(np.sqrt(tc)))
    if np.any(tail):
        tt = tau[tail]
        series = 1.0 - 1.5 / tt + 3.75 / tt**2 - 13.125 / tt**3
        out[tail] = series / (4 * lam * lam * math.sqrt(math.pi) * tt**1.5)
    return out if np.ndim(t) else float(out)


def stopping_time_cdf(t, Lambda: float):
    """P{T <= t} = 1 - erfcx(sqrt(t / (2 Lambda^2))), exact."""
    lam = _check_lambda(Lambda)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidParam("t must be nonnegative")
    out = 1.0 - special.erfcx(np.sqrt(t_arr / (2 * lam * lam)))
    return out if np.ndim(t) else float(out)


def _eta_logw(x: float, z: float, d: int) -> float:
    """Integrand w^2 e^{-z w} (1+w^2)^{-d/2} at w = e^x (the dw = w dx weight)."""
    w = math.exp(x)
    return w * w * math.exp(-z * w) * (1.0 + w * w) ** (-d / 2.0)


def eta(z: float, d: int = 2, cfg: QuadratureConfig | None = None) -> float:
    """Correction factor eta_d(z) = (1+z^2)^{d/2} * int_0^inf u e^{-u} (u^2+z^2)^{-d/2} du.

    For z >= 1 the z^{-d} magnitude is factored out of the integrand first;
    otherwise quad's absolute-error floor swallows the answer entirely for
    large z. For z < 1 the integral is split at u = z to resolve the
    near-origin structure that produces the small-z divergence.
    """
    cfg = cfg or _DEFAULT_CFG
    z = float(z)
    if not z > 0:
        raise InvalidParam("z must be positive")
    d = int(d)
    if d < 2:
        raise InvalidParam("d must be at least 2")
    opts = dict(epsabs=0.0, epsrel=min(cfg.rel_tol, 1e-12), limit=cfg.max_subdivisions)
    if z >= 1.0:
        g = lambda u: u * math.exp(-u) * (1.0 + (u / z) ** 2) ** (-d / 2.0)
        val, _ = integrate.quad(g, 0, cfg.cutoff, **opts)
        return (1 + z * z) ** (d / 2.0) * z ** (-d) * val
    # u = z w keeps the integrand O(1) however small z gets, with the
    # magnitude in the z^{2-d} prefactor; integrating in ln w folds the
    # slow 1/w stretch up to w ~ 1/z into an interval of length ln(1/z)
    val, _ = integrate.quad(
        lambda x: _eta_logw(x, z, d), -40.0, math.log(cfg.cutoff / z),
        points=[0.0], **opts,
    )
    return (1 + z * z) ** (d / 2.0) * z ** (2.0 - d) * val


def spread_kernel_t(s, Lambda: float, d: int = 2, cfg: QuadratureConfig | None = None) -> float:
    """Lateral absorption density t_Lambda(s) for the walk started at the wall origin.

    s is a lateral (d-1)-vector or a scalar lateral distance. Evaluates
    Gamma(d/2)/(pi^{d/2} Lambda) * int_0^inf z e^{-z/Lambda} (|s|^2+z^2)^{-d/2} dz
    directly (substituting z = Lambda u). At s = 0 the integral diverges for
    every d >= 2 (logarithmically for d = 2) and +inf is returned.
    """
    cfg = cfg or _DEFAULT_CFG
    lam = _check_lambda(Lambda)
    d = int(d)
    if d < 2:
        raise InvalidParam("d must be at least 2")
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(s, dtype=float))))
    if r == 0.0:
        return math.inf
    z = r / lam
    pref = special.gamma(d / 2.0) / (math.pi ** (d / 2.0) * lam ** (d - 1))
    opts = dict(epsabs=0.0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions)
    if z >= 1.0:
        g = lambda u: u * math.exp(-u) * (1.0 + (u / z) ** 2) ** (-d / 2.0)
        val, _ = integrate.quad(g, 0, cfg.cutoff, **opts)
        return pref * z ** (-d) * val
    # same substitution as in eta: u = z w, integrated in ln w
    val, _ = integrate.quad(
        lambda x: _eta_logw(x, z, d), -40.0, math.log(cfg.cutoff / z),
        points=[0.0], **opts,
    )
    return pref * z ** (2.0 - d) * val


def absorption_probability_disk(r: float, Lambda: float, d: int = 2, cfg: QuadratureConfig | None = None) -> float:
    """Probability that the walk from the wall origin is absorbed within |s| <= r.

    Uses P(r) = int_0^inf e^{-u} H_d(r / (Lambda u)) du where H_d is the
    radial CDF of the half-space harmonic measure, which reduces to the
    regularized incomplete beta function:
    H_d(rho) = I(rho^2/(1+rho^2); (d-1)/2, 1/2). Depends on r/Lambda only.
    """
    cfg = cfg or _DEFAULT_CFG
    lam = _check_lambda(Lambda)
    if r < 0:
        raise InvalidParam("r must be nonnegative")
    d = int(d)
    if d < 2:
        raise InvalidParam("d must be at least 2")
    if r == 0.0:
        return 0.0
    ratio = float(r) / lam
    a, b = (d - 1) / 2.0, 0.5

    def f(u: float) -> float:
        rho = ratio / u
        return math.exp(-u) * special.betainc(a, b, rho * rho / (1.0 + rho * rho))

    # e^{-u} kills the tail; the left edge is smooth (H -> 1 as u -> 0+)
    pts = sorted({min(ratio, cfg.cutoff * 0.5), 1.0})
    val, _ = integrate.quad(
        f, 0, cfg.cutoff, points=pts, epsabs=0.0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions
    )
    return min(val, 1.0)


def harmonic_density_halfspace(x, s, d: int | None = None) -> float:
    """Harmonic measure density of the half-space seen from interior point x.

    x is a d-vector with x[-1] > 0; s gives the lateral coordinates of the
    boundary point (a (d-1)-vector or scalar for d = 2). Returns
    Gamma(d/2)/pi^{d/2} * x_d / (|x_par - s|^2 + x_d^2)^{d/2}.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if d is None:
        d = len(x)
    if d < 2 or len(x) != d:
        raise InvalidParam("x must be a d-vector with d >= 2")
    if not x[-1] > 0:
        raise InvalidParam("x must lie strictly inside the half-space (x_d > 0)")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if len(s) != d - 1:
        raise InvalidParam("s must have d-1 lateral coordinates")
    h = x[-1]
    q = float(np.sum((x[:-1] - s) ** 2)) + h * h
    return special.gamma(d / 2.0) / math.pi ** (d / 2.0) * h / q ** (d / 2.0)


def spread_density_halfspace(
    x,
    s: float,
    Lambda: float,
    cfg: QuadratureConfig | None = None,
    min_height_ratio: float = 1e-6,
) -> float:
    """Planar spread density: absorption-point law for the walk from interior x.

    Fourier form (1/pi) int_0^inf cos(k (s - x_1)) e^{-k x_2} / (1 + Lambda k) dk,
    evaluated with the oscillatory-weight quadrature rule. Only the planar
    case is implemented; Lambda = 0 falls back to the harmonic density.

    Raises SlowConvergence when x_2 / Lambda < min_height_ratio, where the
    effective frequency cutoff 1/x_2 makes the integral ill-conditioned.
    """
    cfg = cfg or _DEFAULT_CFG
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(x) != 2:
        raise InvalidParam("only the planar half-space (d = 2) is implemented")
    if not x[1] > 0:
        raise InvalidParam("x must lie strictly inside the half-space")
    lam = float(Lambda)
    if lam < 0:
        raise InvalidParam("Lambda must be nonnegative")
    if lam == 0.0:
        return harmonic_density_halfspace(x, s)
    h = float(x[1])
    if h / lam < min_height_ratio:
        raise SlowConvergence(
            f"height/Lambda = {h / lam:.3e} below floor {min_height_ratio:.1e}; "
            "the Fourier integral is ill-conditioned this close to the wall"
        )
    u = float(s) - float(x[0])
    f = lambda k: math.exp(-k * h) / (math.pi * (1.0 + lam * k))
    if abs(u) * cfg.cutoff < 0.5 * h:
        # less than half a radian of phase across the whole e^{-kh} support:
        # not an oscillatory integral, and QAWF silently returns ~0 there
        g = lambda k: f(k) * math.cos(k * u)
        val, _ = integrate.quad(g, 0, np.inf, epsabs=0.0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions)
        return val
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, 0, np.inf, weight="cos", wvar=u, limit=cfg.max_subdivisions)
        except integrate.IntegrationWarning as exc:
            raise SlowConvergence(f"oscillatory quadrature did not converge: {exc}") from exc
    return val

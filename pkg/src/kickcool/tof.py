"""Time-of-flight thermometry and profile analysis.

Temperature is extracted from the growth of the cloud's rms size,
sigma^2(t) = sigma_0^2 + (k_B T / m) t^2, fitted as a weighted linear
problem in (t^2, sigma^2) space where the solution is closed-form and
deterministic. Bimodal profiles (cold stripe over hot background) are
decomposed with a damped Gauss-Newton two-Gaussian fit.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .constants import CONSTANTS, AtomSpecies, PhysicalConstants
from .ensemble import Ensemble


@dataclass(frozen=True)
class ExpansionCurve:
    """rms size vs expansion delay along one axis."""

    times: np.ndarray            # s, strictly increasing
    rms_sizes: np.ndarray        # m
    standard_errors: np.ndarray  # m, jackknife over atoms
    axis: str = "z"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.rms_sizes, dtype=float)
        err = np.asarray(self.standard_errors, dtype=float)
        if not (len(t) == len(s) == len(err)) or len(t) < 3:
            raise ValueError("need >= 3 points with matching lengths")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(s <= 0.0):
            raise ValueError("sizes must be positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "rms_sizes", s)
        object.__setattr__(self, "standard_errors", err)

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("t,sigma,sigma_err\n")
            for t, s, err in zip(self.times, self.rms_sizes,
                                 self.standard_errors):
                f.write(f"{float(t)!r},{float(s)!r},{float(err)!r}\n")


@dataclass(frozen=True)
class TemperatureFit:
    """Weighted fit of sigma^2(t) = sigma0^2 + (k_B T/m) t^2.

    ``covariance`` is the 2x2 covariance of the linear parameters
    (sigma0^2, k_B T/m), propagated from the curve's standard errors.
    When the slope is consistent with zero at one sigma (or negative) the
    fit is ``flagged`` and ``t_upper`` carries slope+1sigma as an upper
    limit; ``temperature`` still holds the unconstrained value.
    """

    temperature: float
    sigma0: float
    covariance: np.ndarray
    flagged: bool = False
    t_upper: float | None = None

    @property
    def temperature_error(self) -> float:
        return float(np.sqrt(self.covariance[1, 1]))


@dataclass(frozen=True)
class BimodalFit:
    """Two-Gaussian decomposition; weights are area fractions."""

    narrow_weight: float
    narrow_width: float
    broad_weight: float
    broad_width: float
    center: float
    residual_norm: float
    unimodal: bool = False


_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


def _jackknife_rms(x: np.ndarray):
    """Centered rms and its leave-one-out jackknife standard error, O(n)."""
    n = x.shape[0]
    rms = float(np.sqrt(np.var(x - x[0])))
    s1, s2 = float(np.sum(x)), float(np.sum(x * x))
    loo_mean = (s1 - x) / (n - 1)
    loo_var = (s2 - x * x) / (n - 1) - loo_mean ** 2
    theta = np.sqrt(np.maximum(loo_var, 0.0))
    se = math.sqrt((n - 1) / n * float(np.sum((theta - theta.mean()) ** 2)))
    return rms, se


def expansion_curve(e: Ensemble, delays, axis="z") -> ExpansionCurve:
    """rms size of the freely expanded cloud at each delay.

    A uniform gravitational fall shifts every atom identically and cancels
    in the centered rms, so no gravity argument is needed here.
    """
    delays = np.asarray(delays, dtype=float)
    if len(delays) < 3 or np.any(np.diff(delays) <= 0.0):
        raise ValueError("delays must be >= 3 increasing values")
    ax = _AXES[axis]
    x0 = e.positions[:, ax]
    v = e.velocities[:, ax]
    sizes, errors = [], []
    for d in delays:
        rms, se = _jackknife_rms(x0 + v * d)
        sizes.append(rms)
        errors.append(se)
    return ExpansionCurve(times=delays, rms_sizes=np.array(sizes),
                          standard_errors=np.array(errors),
                          axis=str(axis))


def fit_temperature(curve: ExpansionCurve, species: AtomSpecies,
                    constants: PhysicalConstants = CONSTANTS) -> TemperatureFit:
    """Closed-form weighted least squares in (t^2, sigma^2) space."""
    t2 = curve.times ** 2
    y = curve.rms_sizes ** 2
    var_y = (2.0 * curve.rms_sizes * curve.standard_errors) ** 2
    if np.any(var_y <= 0.0):
        w = np.ones_like(y)
    else:
        w = 1.0 / var_y
    xtx = np.array([[np.sum(w), np.sum(w * t2)],
                    [np.sum(w * t2), np.sum(w * t2 * t2)]])
    xty = np.array([np.sum(w * y), np.sum(w * t2 * y)])
    intercept, slope = np.linalg.solve(xtx, xty)
    cov = np.linalg.inv(xtx)
    scale = species.mass / constants.k_boltzmann
    temp = slope * scale
    sigma0 = math.sqrt(max(intercept, 0.0))
    slope_err = math.sqrt(cov[1, 1])
    cov_temp = cov * scale ** 2
    cov_temp[0, 0] = cov[0, 0]
    cov_temp[0, 1] = cov[0, 1] * scale
    cov_temp[1, 0] = cov[1, 0] * scale
    flagged = slope <= slope_err
    t_upper = (slope + slope_err) * scale if flagged else None
    return TemperatureFit(temperature=temp, sigma0=sigma0,
                          covariance=cov_temp, flagged=flagged,
                          t_upper=t_upper)


@dataclass(frozen=True)
class DensityImage:
    """2D projected histogram, optionally blurred by a Gaussian PSF."""

    counts: np.ndarray
    x_edges: np.ndarray
    y_edges: np.ndarray
    blur_rms: float

    def to_txt(self, path):
        """Plain text grid: 3 header lines (nx ny / extents / blur), then rows."""
        nx, ny = self.counts.shape
        with open(path, "w") as f:
            f.write(f"{nx} {ny}\n")
            f.write(f"{float(self.x_edges[0])!r} {float(self.x_edges[-1])!r} "
                    f"{float(self.y_edges[0])!r} {float(self.y_edges[-1])!r}\n")
            f.write(f"{float(self.blur_rms)!r}\n")
            for row in self.counts:
                f.write(" ".join(repr(float(c)) for c in row) + "\n")


def density_image(e: Ensemble, plane="zy", bins=64, blur_rms: float = 0.0,
                  extent=None) -> DensityImage:
    """Histogram atom positions on a plane and convolve with a Gaussian PSF.

    When blurring, the grid is padded by the kernel radius so the blur
    conserves total counts exactly. ``extent`` fixes the unpadded grid as
    ((xmin, xmax), (ymin, ymax)); by default it hugs the data.
    """
    ax1, ax2 = _AXES[plane[0]], _AXES[plane[1]]
    if np.isscalar(bins):
        bins = (int(bins), int(bins))
    if bins[0] < 2 or bins[1] < 2:
        raise ValueError("need >= 2 bins per axis")
    u = e.positions[:, ax1]
    v = e.positions[:, ax2]
    if extent is None:
        pad_u = 1e-12 + 1e-9 * (u.max() - u.min())
        pad_v = 1e-12 + 1e-9 * (v.max() - v.min())
        extent = ((u.min() - pad_u, u.max() + pad_u),
                  (v.min() - pad_v, v.max() + pad_v))
    counts, xe, ye = np.histogram2d(u, v, bins=bins, range=extent)
    if blur_rms > 0.0:
        du = xe[1] - xe[0]
        dv = ye[1] - ye[0]
        sig_u, sig_v = blur_rms / du, blur_rms / dv
        rad_u = int(4.0 * sig_u + 0.5) + 1
        rad_v = int(4.0 * sig_v + 0.5) + 1
        padded = np.pad(counts, ((rad_u, rad_u), (rad_v, rad_v)))
        padded = ndimage.gaussian_filter(padded, (sig_u, sig_v),
                                         mode="constant", truncate=4.0)
        xe = np.concatenate([xe[0] - du * np.arange(rad_u, 0, -1), xe,
                             xe[-1] + du * np.arange(1, rad_u + 1)])
        ye = np.concatenate([ye[0] - dv * np.arange(rad_v, 0, -1), ye,
                             ye[-1] + dv * np.arange(1, rad_v + 1)])
        counts = padded
    return DensityImage(counts=counts, x_edges=xe, y_edges=ye,
                        blur_rms=float(blur_rms))


def _two_gaussian(params, x):
    a1, s1, a2, s2, mu = params
    d = x - mu
    return (a1 * np.exp(-0.5 * d * d / (s1 * s1))
            + a2 * np.exp(-0.5 * d * d / (s2 * s2)))


def _two_gaussian_jacobian(params, x):
    a1, s1, a2, s2, mu = params
    d = x - mu
    g1 = np.exp(-0.5 * d * d / (s1 * s1))
    g2 = np.exp(-0.5 * d * d / (s2 * s2))
    jac = np.empty((x.shape[0], 5))
    jac[:, 0] = g1
    jac[:, 1] = a1 * g1 * d * d / s1 ** 3
    jac[:, 2] = g2
    jac[:, 3] = a2 * g2 * d * d / s2 ** 3
    jac[:, 4] = a1 * g1 * d / s1 ** 2 + a2 * g2 * d / s2 ** 2
    return jac


MAX_BIMODAL_ITERATIONS = 200
BIMODAL_TOLERANCE = 1e-10


def fit_bimodal(x, profile, narrow_width_guess: float,
                broad_width_guess: float,
                center_guess: float | None = None) -> BimodalFit:
    """Two-Gaussian mixture fit via damped Gauss-Newton.

    Deterministic given the guesses: fixed iteration cap, fixed damping
    schedule, tolerance on the relative residual change. Mixtures whose
    fitted widths agree within 5% are flagged as effectively unimodal.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(profile, dtype=float)
    if y.shape[0] < 16:
        raise ValueError("need >= 16 profile samples")
    if np.any(y < 0.0):
        raise ValueError("profile must be nonnegative")
    if center_guess is None:
        center_guess = float(np.sum(x * y) / max(np.sum(y), 1e-300))
    peak = float(y.max())
    params = np.array([0.5 * peak, narrow_width_guess, 0.5 * peak,
                       broad_width_guess, center_guess])
    residual = y - _two_gaussian(params, x)
    cost = float(residual @ residual)
    lam = 1e-3
    for _ in range(MAX_BIMODAL_ITERATIONS):
        jac = _two_gaussian_jacobian(params, x)
        jtj = jac.T @ jac
        jtr = jac.T @ residual
        accepted = False
        for _ in range(20):
            damped = jtj + lam * np.diag(np.diag(jtj).clip(min=1e-30))
            try:
                delta = np.linalg.solve(damped, jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + delta
            trial_res = y - _two_gaussian(trial, x)
            trial_cost = float(trial_res @ trial_res)
            if np.isfinite(trial_cost) and trial_cost <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        rel_change = abs(cost - trial_cost) / max(cost, 1e-300)
        params, residual, cost = trial, trial_res, trial_cost
        lam = max(lam / 3.0, 1e-12)
        if rel_change < BIMODAL_TOLERANCE:
            break

    a1, s1, a2, s2, mu = params
    s1, s2 = abs(s1), abs(s2)
    area1 = a1 * s1 * math.sqrt(2.0 * math.pi)
    area2 = a2 * s2 * math.sqrt(2.0 * math.pi)
    total = area1 + area2
    if total <= 0.0:
        total = 1e-300
    comps = sorted([(s1, area1 / total), (s2, area2 / total)])
    (narrow_w, narrow_frac), (broad_w, broad_frac) = comps
    # degenerate widths, or a component carrying no weight: one Gaussian
    unimodal = ((broad_w - narrow_w) <= 0.05 * broad_w
                or min(narrow_frac, broad_frac) < 0.02)
    return BimodalFit(narrow_weight=float(narrow_frac),
                      narrow_width=float(narrow_w),
                      broad_weight=float(broad_frac),
                      broad_width=float(broad_w),
                      center=float(mu),
                      residual_norm=math.sqrt(cost),
                      unimodal=bool(unimodal))

"""Generalized external angle, truncated exterior map, corner detection and decay classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import GeometricFactors
from .errors import OrderError
from .geometry import BoundaryCurve, curvature
from .mesh import build_mesh, integrate_parameter

DEFAULT_TAU = 3.0
MAD_SCALE = 1.4826  # MAD -> standard deviation for Gaussian data
DECAY_THRESHOLD = math.log(0.95)
SYMMETRY_RTOL = 1e-4
TINY_SIGMA = 1e-13


def _sigma_array(sigma) -> np.ndarray:
    s = sigma.sigma if isinstance(sigma, GeometricFactors) else sigma
    return np.asarray(s, complex).ravel()


def uniform_grid(G: int) -> np.ndarray:
    if G < 1:
        raise ValueError("grid size must be positive")
    return np.arange(G) / G


@dataclass(frozen=True)
class ThetaSeries:
    m: int
    sigma: np.ndarray
    t: np.ndarray
    values: np.ndarray


def theta_values(sigma, t) -> np.ndarray:
    """``2 + 2 Re sum_k sigma_k e^{2 pi i k t}``.

    This is the real Fourier series whose coefficients
    ``int Theta(t) e^{-2 pi i k t} dt`` are the ``sigma_k``.
    """
    s = _sigma_array(sigma)
    t = np.asarray(t, float)
    k = np.arange(1, len(s) + 1)
    ph = 2 * np.pi * np.outer(t, k)
    return 2.0 + 2.0 * (np.cos(ph) @ s.real - np.sin(ph) @ s.imag)


def theta_partial(sigma, m: int, grid) -> ThetaSeries:
    s = _sigma_array(sigma)
    if m > len(s):
        raise OrderError(f"Theta_{m} needs sigma up to sigma_{m}", required=m)
    t = uniform_grid(grid) if np.isscalar(grid) else np.asarray(grid, float)
    return ThetaSeries(m, s[:m].copy(), t, theta_values(s[:m], t))


def theta_analytic(curve: BoundaryCurve, t):
    """Smooth density ``k_g |alpha'| / pi`` at ``t`` and the corner deltas ``(t_l, beta_l)``."""
    z, dz, ddz = curve.evaluate(t)
    smooth = curvature(dz, ddz) * np.abs(dz) / np.pi
    return smooth, list(zip(curve.corner_params, curve.external_angles))


def _smooth_mesh(curve: BoundaryCurve, panels: int):
    return build_mesh(curve, panels)


def theta_fourier(curve: BoundaryCurve, K: int, panels: int = 16) -> GeometricFactors:
    """``int Theta e^{-2 pi i k t} dt``, ``k = 1..K``, with the delta terms summed exactly."""
    mesh = _smooth_mesh(curve, panels)
    smooth = curvature(mesh.dz, mesh.ddz) * np.abs(mesh.dz) / np.pi
    k = np.arange(1, K + 1)
    e = np.exp(-2j * np.pi * np.outer(mesh.t, k))
    out = integrate_parameter(mesh, smooth[:, None] * e)
    for tl, bl in zip(curve.corner_params, curve.external_angles):
        out = out + bl * np.exp(-2j * np.pi * k * tl)
    return GeometricFactors(np.asarray(out), "analytic")


def gauss_bonnet_residual(curve: BoundaryCurve, panels: int = 16) -> float:
    """``int k_g |alpha'| / pi dt + sum beta_l - 2``."""
    mesh = _smooth_mesh(curve, panels)
    smooth = curvature(mesh.dz, mesh.ddz) * np.abs(mesh.dz) / np.pi
    return float(integrate_parameter(mesh, smooth) + sum(curve.external_angles) - 2.0)


def phi_truncated(C: float, mu, m: int, t) -> np.ndarray:
    """``C sum_{k=-1}^{m} mu_k zeta^{-k}`` at ``zeta = e^{-2 pi i t}``.

    ``mu[0]`` holds ``mu_{-1}``.
    """
    mu = np.asarray(mu, complex).ravel()
    if len(mu) < m + 2:
        raise OrderError(f"Phi_{m} needs mu up to mu_{m}", required=m + 2)
    t = np.asarray(t, float)
    k = np.arange(-1, m + 1)
    return C * (np.exp(2j * np.pi * np.outer(t, k)) @ mu[: m + 2])


# ------------------------------------------------------------ corners


@dataclass(frozen=True)
class Peak:
    t: float
    value: float
    sign: int


@dataclass
class CornerReport:
    peaks: list[Peak]
    locations: list[complex]
    detection: str
    threshold: float
    robust_std: float
    merged: int = 0
    verdict: str | None = None
    slope: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_peaks(self) -> int:
        return len(self.peaks)

    def to_json(self) -> dict:
        return {
            "detection": self.detection,
            "verdict": self.verdict,
            "decay_slope": self.slope,
            "decay_ratio": None if self.slope is None else math.exp(self.slope),
            "threshold": self.threshold,
            "robust_std": self.robust_std,
            "merged_peaks": self.merged,
            "peaks": [
                {"t": p.t, "theta": p.value, "sign": p.sign, "location": [z.real, z.imag] if z is not None else None}
                for p, z in zip(self.peaks, self.locations)
            ],
            **self.extra,
        }


def _circ_dist(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def detect_corners(
    theta: ThetaSeries,
    tau: float = DEFAULT_TAU,
    max_peaks: int | None = None,
    C: float | None = None,
    mu=None,
    min_spacing: float | None = None,
) -> CornerReport:
    """Isolated extrema of ``|Theta_m - 2|`` above ``tau`` robust standard deviations.

    Requires a uniform periodic grid with at least ``8 m`` points. When ``C``
    and ``mu`` are given, each peak is mapped through ``Phi_m`` at
    ``zeta = e^{-2 pi i t0}``.
    """
    t, v = theta.t, theta.values
    G = len(t)
    if G < 8 * theta.m:
        raise ValueError(f"grid of {G} points is too coarse for order {theta.m}; need >= {8 * theta.m}")
    if not np.allclose(np.diff(t), 1.0 / G, atol=1e-12) or abs(t[0]) > 1e-12:
        raise ValueError("detect_corners needs the uniform grid t_i = i/G")
    d = v - 2.0
    a = np.abs(d)
    med = np.median(d)
    rstd = float(MAD_SCALE * np.median(np.abs(d - med)))
    thr = tau * rstd
    is_max = (a >= np.roll(a, 1)) & (a > np.roll(a, -1)) & (a > thr)
    cand = np.flatnonzero(is_max)
    cand = cand[np.argsort(-a[cand], kind="stable")]
    spacing = 1.0 / (2 * theta.m) if min_spacing is None else min_spacing
    kept: list[int] = []
    merged = 0
    for i in cand:
        if all(_circ_dist(t[i], t[j]) >= spacing for j in kept):
            kept.append(int(i))
        else:
            merged += 1
    if max_peaks is not None and len(kept) > max_peaks:
        merged += len(kept) - max_peaks
        kept = kept[:max_peaks]
    kept.sort(key=lambda i: t[i])
    peaks = [Peak(float(t[i]), float(v[i]), int(np.sign(d[i]))) for i in kept]
    if C is not None and mu is not None and peaks:
        m = min(theta.m, len(np.asarray(mu)) - 2)
        locs = list(phi_truncated(C, mu, m, [p.t for p in peaks]))
    else:
        locs = [None] * len(peaks)
    detection = "peaks" if peaks else "insufficient order"
    return CornerReport(peaks, locs, detection, float(thr), rstd, merged)


# ------------------------------------------------------------ decay


def detect_symmetry(sigma, rtol: float = SYMMETRY_RTOL) -> int:
    """Largest ``n`` such that ``sigma_k`` is negligible for every ``k`` not divisible by ``n``."""
    s = np.abs(_sigma_array(sigma))
    K = len(s)
    top = s.max() if K else 0.0
    if top < TINY_SIGMA:
        return 1
    k = np.arange(1, K + 1)
    best = 1
    for n in range(2, K // 2 + 1):
        off = s[k % n != 0]
        on = s[k % n == 0]
        if off.max() <= rtol * top and on.max() > rtol * top:
            best = n
    return best


def classify_decay(sigma, K: int | None = None):
    """``(verdict, slope)`` from a log-linear fit of ``|sigma_k|`` over ``[K/2, K]``.

    ``slope`` is per index, so ``exp(slope)`` is the fitted decay ratio.
    """
    s = _sigma_array(sigma)
    K = len(s) if K is None else K
    if K < 16 or len(s) < K:
        raise OrderError("decay classification needs sigma up to order >= 16", required=16)
    s = s[:K]
    n = detect_symmetry(s)
    k = np.arange(1, K + 1)
    sel = (k >= math.ceil(K / 2)) & (k % n == 0) & (np.abs(s) >= TINY_SIGMA)
    if sel.sum() == 0:
        return "smooth", -math.inf
    if sel.sum() == 1:
        # a lone surviving term is not a trend; extend the window to all admissible k
        sel = (k % n == 0) & (np.abs(s) >= TINY_SIGMA)
        if sel.sum() < 2:
            return "smooth", -math.inf
    slope = float(np.polyfit(k[sel], np.log(np.abs(s[sel])), 1)[0])
    return ("smooth" if slope < DECAY_THRESHOLD else "cornered"), slope

"""Strip (Paley-Wiener) norms and analyticity-radius diagnostics in x."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDecay, RadiusTooLarge

NOISE_FLOOR = 1e-14
_LOG_MAX = np.log(np.finfo(float).max) - 5.0


@dataclass(frozen=True)
class NormParams:
    l: int = 0
    rho: float = 0.0
    beta: float = 0.0

    def rho_at(self, t: float) -> float:
        r = self.rho - self.beta * t
        if r < 0:
            raise ValueError(f"strip width negative at t={t}")
        return r


def _envelope(modes: np.ndarray) -> np.ndarray:
    """Per-wavenumber l2 magnitude, summing over every axis but the first."""
    a = np.abs(np.asarray(modes)) ** 2
    return np.sqrt(a.reshape(a.shape[0], -1).sum(axis=1))


def strip_norm(modes: np.ndarray, xi: np.ndarray, Lx: float, p: NormParams, t: float = 0.0) -> float:
    """sum_{alpha <= l} || e^{rho |xi|} (i xi)^alpha f_hat || with the x-period quadrature weight."""
    rho = p.rho_at(t)
    if rho * np.abs(xi).max() > _LOG_MAX:
        raise RadiusTooLarge(f"e^(rho*|xi|max) overflows for rho={rho}")
    env = _envelope(modes)
    weight = np.exp(rho * np.abs(xi))
    total = 0.0
    for alpha in range(p.l + 1):
        total += np.sqrt(2 * Lx * np.sum((weight * np.abs(xi) ** alpha * env) ** 2))
    return float(total)


def estimate_radius(modes: np.ndarray, xi: np.ndarray, floor: float = NOISE_FLOOR,
                    rho_max: float | None = None, min_modes: int = 8) -> float:
    """Least-squares decay rate of log|f_hat| against |xi| over the resolved band."""
    env = _envelope(modes)
    scale = env.max()
    if scale == 0:
        raise InsufficientDecay("field is identically zero")
    kabs = np.abs(xi)
    mags, ks = [], []
    for k in np.unique(kabs[kabs > 0]):
        m = env[kabs == k].mean()
        if m > floor * scale:
            mags.append(m)
            ks.append(k)
    if len(ks) < min_modes:
        raise InsufficientDecay(f"only {len(ks)} modes above the noise floor")
    slope, _ = np.polyfit(np.array(ks), -np.log(np.array(mags)), 1)
    rho = max(float(slope), 0.0)
    if rho_max is not None:
        rho = min(rho, rho_max)
    return rho


@dataclass(frozen=True)
class RadiusFit:
    times: np.ndarray
    rho_hat: np.ndarray
    rho0_hat: float
    beta_hat: float
    monotone: bool


def radius_track(times, mode_series, xi, window: tuple[float, float] | None = None,
                 tol: float = 1e-2, **kw) -> RadiusFit:
    """Fit rho_hat(t) = rho0 - beta t over a series of fields.

    ``monotone`` is False when the fitted radius grows in time by more than ``tol``
    over the window (heat-like smoothing); beta_hat is then reported as 0.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError("radius_track needs at least 3 time samples")
    rho = np.array([estimate_radius(m, xi, **kw) for m in mode_series])
    sel = np.ones_like(times, dtype=bool)
    if window is not None:
        sel = (times >= window[0]) & (times <= window[1])
    slope, intercept = np.polyfit(times[sel], rho[sel], 1)
    growth = slope * (times[sel].max() - times[sel].min())
    monotone = growth <= tol
    return RadiusFit(times, rho, float(intercept), float(max(-slope, 0.0)), bool(monotone))

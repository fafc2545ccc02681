"""Hyperbolic-secant pulses and pulse-area bookkeeping.

A pulse of envelope ``E0 sech(t/tau)`` has full-line area ``(M/hbar) tau E0 pi``.
Cutting it off at ``|t| <= 10 tau`` loses a small fraction of that area; the
exact retained fraction is ``2 atan(sinh 10) / pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .constants import HBAR, PULSE_WINDOW

TRUNCATED_AREA_FACTOR = 2.0 * np.arctan(np.sinh(PULSE_WINDOW)) / np.pi


def truncated_area_factor(window: float = PULSE_WINDOW) -> float:
    """Fraction of the full-line sech area kept on [-window tau, window tau]."""
    return 2.0 * np.arctan(np.sinh(window)) / np.pi


@dataclass(frozen=True)
class PulseSpec:
    E0: float  # V/m
    tau: float  # s
    omega0: float  # rad/s
    k: float = float("nan")  # nominal area in units of pi, informational
    window: float = PULSE_WINDOW
    t_center: float = 0.0  # s, time of the envelope peak at the source

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.omega0 < 0:
            raise ValueError("omega0 must be non-negative")
        if not self.window > 0:
            raise ValueError("window must be positive")

    @classmethod
    def from_area(cls, k: float, M: float, tau: float, omega0: float, corrected: bool = True, **kw) -> PulseSpec:
        E0 = corrected_amplitude(k, M, tau) if corrected else k * HBAR / (M * tau)
        return cls(E0=E0, tau=tau, omega0=omega0, k=k, **kw)

    def envelope(self, t):
        s = (np.asarray(t, dtype=float) - self.t_center) / self.tau
        inside = np.abs(s) <= self.window
        out = np.where(inside, self.E0 / np.cosh(np.where(inside, s, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def field(self, t):
        """Real carrier-modulated field; zero outside the truncation window."""
        t = np.asarray(t, dtype=float)
        out = self.envelope(t) * np.sin(self.omega0 * (t - self.t_center))
        return out if np.ndim(out) else float(out)

    @property
    def start(self) -> float:
        return self.t_center - self.window * self.tau

    @property
    def end(self) -> float:
        return self.t_center + self.window * self.tau


def pulse_area(pulse: PulseSpec, M: float, window: float | None = None) -> float:
    """(M/hbar) times the integral of the envelope over [-window tau, window tau]."""
    if not M > 0:
        raise ValueError("dipole M must be positive")
    w = pulse.window if window is None else window
    if pulse.E0 == 0.0:
        return 0.0
    val, _ = quad(lambda s: 1.0 / np.cosh(s), -w, w, epsabs=0.0, epsrel=1e-13, limit=200)
    return M / HBAR * pulse.E0 * pulse.tau * val


def corrected_amplitude(k: float, M: float, tau: float, window: float = PULSE_WINDOW) -> float:
    """Peak amplitude whose truncated sech area is exactly k pi."""
    if not k > 0:
        raise ValueError("k must be positive")
    if not (M > 0 and tau > 0):
        raise ValueError("M and tau must be positive")
    return k * HBAR / (M * tau * truncated_area_factor(window))


def envelope_area(samples, dt: float, M: float) -> float:
    """(M/hbar) * sum(samples) * dt for a sampled non-negative envelope."""
    return float(M / HBAR * np.sum(samples) * dt)

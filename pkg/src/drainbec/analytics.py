"""Closed-form stationary states, critical point, acoustic metric, and
thermal-emission predictions.

Conventions: densities are measured in units of the unperturbed density n0
and velocities in units of the bare sound speed c0, so g = 1 and the local
sound speed of a region at density n is c = sqrt(n).  All profiles are the
spatial part psi(x) of stationary solutions psi(x) e^{-i mu t}.

The two stationary branches are

  subcritical  (gamma < 2c/3):  psi = sqrt(n) e^{-i gamma |x|},
                                v = gamma,      mu = gamma^2/2 + n
  supercritical (v = c^2/gamma < c): a grey-soliton pair glued at the drain,
      psi = sqrt(n) (i v/c + alpha tanh(alpha c |x|)) e^{-i v |x|},
      alpha = sqrt(1 - v^2/c^2),  mu = n alpha^2 + 3 v^2 / 2

and both satisfy the drain jump condition
psi'(0+) - psi'(0-) = -2i gamma psi(0).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "Regime",
    "StationaryProfile",
    "CriticalPoint",
    "AcousticMetric",
    "subcritical_state",
    "supercritical_state",
    "critical_gamma",
    "critical_point",
    "critical_profile",
    "acoustic_metric",
    "hawking_temperature",
    "fluctuation_wedge_prediction",
    "gpe_residual",
    "drain_jump_residual",
]


class Regime(Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass
class StationaryProfile:
    regime: Regime
    density_fn: Callable[[np.ndarray], np.ndarray]
    phase_fn: Callable[[np.ndarray], np.ndarray]
    profile_fn: Callable[[np.ndarray], np.ndarray]   # complex psi(x)
    velocity_fn: Callable[[np.ndarray], np.ndarray]  # signed flow v(x) = dS/dx
    velocity: float                                  # asymptotic flow speed
    mu: float
    gamma: float
    n_ref: float                                     # background density (n0 units)
    alpha: float | None = None                       # supercritical only


@dataclass(frozen=True)
class CriticalPoint:
    """Reported critical data: gamma_c = 2 c0 / 3, exponents nu = 1/2, z = 1."""
    gamma_c: float
    nu: float = 0.5
    z: float = 1.0


def critical_gamma(c0: float = 1.0) -> float:
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    return 2.0 * c0 / 3.0


def critical_point(c0: float = 1.0) -> CriticalPoint:
    return CriticalPoint(gamma_c=critical_gamma(c0))


def subcritical_state(gamma: float, n: float = 1.0) -> StationaryProfile:
    """Homogeneous flow-to-drain state: S = -gamma |x|, mu = gamma^2/2 + n."""
    c = np.sqrt(n)
    if not 0 <= gamma < critical_gamma(c):
        raise ValueError(
            f"gamma = {gamma} is not below the critical loss 2c/3 = {critical_gamma(c):.6g} "
            f"for density n = {n}"
        )
    sqrt_n = np.sqrt(n)

    def density_fn(x):
        return np.full_like(np.asarray(x, dtype=float), n)

    def phase_fn(x):
        return -gamma * np.abs(x)

    def profile_fn(x):
        return sqrt_n * np.exp(-1j * gamma * np.abs(np.asarray(x, dtype=float)))

    def velocity_fn(x):
        return -gamma * np.sign(x)

    return StationaryProfile(
        regime=Regime.SUBCRITICAL,
        density_fn=density_fn, phase_fn=phase_fn, profile_fn=profile_fn,
        velocity_fn=velocity_fn,
        velocity=gamma, mu=0.5 * gamma**2 + n, gamma=gamma, n_ref=n,
    )


def supercritical_state(gamma: float, n_asym: float) -> StationaryProfile:
    """Grey-soliton pair with flow v = c^2/gamma outside the horizon.

    n_asym is the measured asymptotic condensate density (the stationary
    branch exists for any remaining density, so it is an input here, never
    a guess).  The soliton healing length is the local one, 1/sqrt(n_asym).
    """
    c = np.sqrt(n_asym)
    v = c**2 / gamma
    if v >= c:
        raise ValueError(
            f"gamma = {gamma} gives v = c^2/gamma = {v:.6g} >= c = {c:.6g}; "
            "supercritical branch requires gamma > c"
        )
    alpha = np.sqrt(1.0 - v**2 / c**2)
    mu = n_asym * alpha**2 + 1.5 * v**2
    sqrt_n = np.sqrt(n_asym)

    def _bracket(x):
        return 1j * v / c + alpha * np.tanh(alpha * c * np.abs(x))

    def profile_fn(x):
        x = np.asarray(x, dtype=float)
        return sqrt_n * _bracket(x) * np.exp(-1j * v * np.abs(x))

    def density_fn(x):
        x = np.asarray(x, dtype=float)
        t = np.tanh(alpha * c * np.abs(x))
        return n_asym * (v**2 / c**2 + alpha**2 * t**2)

    def phase_fn(x):
        x = np.asarray(x, dtype=float)
        b = _bracket(x)
        return np.angle(b) - v * np.abs(x)

    def velocity_fn(x):
        # current conservation: j = -n_asym v sgn(x), u = j / n(x);
        # the drain site takes the right-side limit (flow speed gamma there)
        x = np.asarray(x, dtype=float)
        sgn = np.where(x >= 0, 1.0, -1.0)
        return -sgn * n_asym * v / density_fn(x)

    return StationaryProfile(
        regime=Regime.SUPERCRITICAL,
        density_fn=density_fn, phase_fn=phase_fn, profile_fn=profile_fn,
        velocity_fn=velocity_fn,
        velocity=v, mu=mu, gamma=gamma, n_ref=n_asym, alpha=alpha,
    )


def critical_profile(t: float, n0: float = 1.0, c0: float = 1.0):
    """Self-similar state at gamma = 2 c0/3, valid |x| <= c0 t.

    n(x) = (4 n0/9)(|x|/(2 c0 t) + 1)^2 and
    S(x) = (c0^2 t/3)(|x|/(c0 t) - 1)^2 - c0^2 t, matching the unperturbed
    condensate (n = n0, S = -mu0 t) continuously at |x| = c0 t.
    Returns (density_fn, phase_fn).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    ct = c0 * t

    def density_fn(x):
        x = np.abs(np.asarray(x, dtype=float))
        n = (4.0 * n0 / 9.0) * (x / (2.0 * ct) + 1.0) ** 2
        return np.where(x <= ct, n, n0)

    def phase_fn(x):
        x = np.abs(np.asarray(x, dtype=float))
        s = (c0**2 * t / 3.0) * (x / ct - 1.0) ** 2 - c0**2 * t
        return np.where(x <= ct, s, -c0**2 * t)

    return density_fn, phase_fn


@dataclass
class AcousticMetric:
    """Per-site inverse metric [[1, v], [v, v^2 - c^2]] and its horizon roots."""
    x: np.ndarray
    components: np.ndarray           # shape (n, 2, 2)
    horizon_positions: list


def acoustic_metric(profile: StationaryProfile, x: np.ndarray) -> AcousticMetric:
    """Acoustic metric of a stationary profile on evaluation points x.

    Horizons are the sign changes of v^2 - c^2 (linearly interpolated).
    """
    x = np.asarray(x, dtype=float)
    v = profile.velocity_fn(x)
    c2 = profile.density_fn(x)       # g = 1 in n0 units
    comp = np.empty(x.shape + (2, 2))
    comp[..., 0, 0] = 1.0
    comp[..., 0, 1] = v
    comp[..., 1, 0] = v
    comp[..., 1, 1] = v**2 - c2

    f = v**2 - c2
    horizons = []
    sign_change = np.nonzero(np.diff(np.sign(f)) != 0)[0]
    for i in sign_change:
        x0, x1, f0, f1 = x[i], x[i + 1], f[i], f[i + 1]
        horizons.append(float(x0 - f0 * (x1 - x0) / (f1 - f0)))
    return AcousticMetric(x=x, components=comp, horizon_positions=horizons)


def hawking_temperature(v: float, mu: float) -> float:
    """k_B T = v/(1+v) * mu for flow speed v in local sound-speed units."""
    if not 0 <= v < 1:
        raise ValueError(f"flow speed must satisfy 0 <= v < c = 1, got {v}")
    return v / (1.0 + v) * mu


def fluctuation_wedge_prediction(v: float, x, t: float):
    """Reservoir-noise fluctuation density n_out(x, t) of the flowing state.

    n_out = 1/2 * v/(1+v) * ((1-v) t - |x|) inside the emission wedge
    |x| <= (1-v) t, zero outside; the kink sits at the phonon front.
    """
    if not 0 <= v < 1:
        raise ValueError(f"flow speed must satisfy 0 <= v < c = 1, got {v}")
    x = np.abs(np.asarray(x, dtype=float))
    front = (1.0 - v) * t
    out = 0.5 * v / (1.0 + v) * np.abs(x - front)
    return np.where(x <= front, out, 0.0)


def gpe_residual(profile: StationaryProfile, x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """| -1/2 psi'' + |psi|^2 psi - mu psi | via 4th-order differences.

    Only meaningful away from the drain cusp; callers exclude |x| < few h.
    """
    x = np.asarray(x, dtype=float)
    f = profile.profile_fn
    d2 = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h**2)
    psi = f(x)
    return np.abs(-0.5 * d2 + np.abs(psi) ** 2 * psi - profile.mu * psi)


def drain_jump_residual(profile: StationaryProfile, h: float = 1e-6) -> float:
    """|psi'(0+) - psi'(0-) + 2i gamma psi(0)| with one-sided differences."""
    f = profile.profile_fn
    dp = (-3 * f(0.0) + 4 * f(h) - f(2 * h)) / (2 * h)
    dm = (3 * f(0.0) - 4 * f(-h) + f(-2 * h)) / (2 * h)
    return float(np.abs(dp - dm + 2j * profile.gamma * f(0.0)))

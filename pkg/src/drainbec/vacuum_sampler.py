"""Wigner sampling of the Bogoliubov ground state of the homogeneous condensate.

The initial field is

    psi(x) = sqrt(n0) + sum_k [ u_k a_k e^{ikx} - v_k a_k^* e^{-ikx} ] / sqrt(L)

with u_k, v_k > 0 the positive-norm Bogoliubov coefficients of the
homogeneous background and a_k complex Gaussians of zero mean and
covariance <a_k^* a_q> = delta_kq / 2 (half a quantum per mode).  The minus
sign on v_k is the phase convention that makes the static structure factor
S(k) = (u_k - v_k)^2 = eps0/eps come out suppressed at long wavelength
(ground-state anti-bunching).

The k = 0 mode is not sampled: global phase diffusion of the condensate
mode does not affect any of the local observables studied here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ComplexField, GridSpec, momentum_grid

__all__ = ["VacuumSample", "bogoliubov_uv", "sample_vacuum"]


@dataclass
class VacuumSample:
    field: ComplexField
    sampled_k: np.ndarray      # wavenumbers that received a random amplitude
    a_k: np.ndarray            # amplitudes, shape (..., len(sampled_k))
    cutoff_k: float

    @property
    def mode_amplitudes(self) -> dict:
        """k -> a_k map for a single-trajectory sample."""
        if self.a_k.ndim != 1:
            raise ValueError("mode_amplitudes is only defined for a single trajectory")
        return dict(zip(self.sampled_k.tolist(), self.a_k.tolist()))


def bogoliubov_uv(k, n0: float, g: float | None = None):
    """Positive-norm Bogoliubov coefficients of the homogeneous background.

    Solves the 2x2 Bogoliubov block

        [[eps0 + gn,  gn], [-gn, -(eps0 + gn)]]

    numerically for its positive eigenvalue eps = sqrt(eps0*(eps0 + 2*gn))
    (eps0 = k^2/2) and returns (u, v, eps) with u, v real positive and
    u^2 - v^2 = 1.  By default g = 1/n0, i.e. the fixed unit system
    g*n0 = 1; pass g explicitly to sample a non-interacting vacuum (g=0).

    The sign convention is u e^{ikx} a - v e^{-ikx} a^*; the returned v is
    the magnitude of the (negative) eigenvector component.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k == 0.0):
        raise ValueError("k = 0 is excluded from Bogoliubov sampling")
    if g is None:
        g = 1.0 / n0
    gn = g * n0
    eps0 = 0.5 * k**2

    if gn == 0.0:
        u = np.ones_like(eps0)
        v = np.zeros_like(eps0)
        return u, v, eps0

    blocks = np.zeros(k.shape + (2, 2))
    blocks[..., 0, 0] = eps0 + gn
    blocks[..., 0, 1] = gn
    blocks[..., 1, 0] = -gn
    blocks[..., 1, 1] = -(eps0 + gn)
    evals, evecs = np.linalg.eig(blocks)

    pos = np.argmax(evals.real, axis=-1)
    idx = np.expand_dims(pos, axis=(-2, -1))
    vec = np.take_along_axis(evecs, np.broadcast_to(idx, evecs.shape[:-1] + (1,)), axis=-1)[..., 0]
    eps = np.take_along_axis(evals, np.expand_dims(pos, -1), axis=-1)[..., 0].real

    a = vec[..., 0].real
    b = vec[..., 1].real
    norm = a**2 - b**2          # indefinite Bogoliubov norm, positive branch
    u = np.abs(a) / np.sqrt(norm)
    v = np.abs(b) / np.sqrt(norm)
    return u, v, eps


def sample_vacuum(
    grid: GridSpec,
    n0: float,
    cutoff_k: float | None = None,
    rng: np.random.Generator | None = None,
    n_traj: int | None = None,
    g: float | None = None,
) -> VacuumSample:
    """Draw Wigner-distributed initial fields for the Bogoliubov ground state.

    Deterministic given the generator state; a batch of n_traj independent
    fields is returned if n_traj is given (values shape (n_traj, n_sites)).
    cutoff_k defaults to the lattice Nyquist pi/dx (all modes populated).
    """
    if rng is None:
        rng = np.random.default_rng()
    ks = momentum_grid(grid)
    k_nyquist = np.pi / grid.dx
    if cutoff_k is None:
        cutoff_k = k_nyquist
    if cutoff_k > k_nyquist * (1 + 1e-12):
        raise ValueError(f"cutoff_k {cutoff_k} exceeds Nyquist {k_nyquist}")

    sampled = (ks != 0.0) & (np.abs(ks) <= cutoff_k * (1 + 1e-12))
    n = grid.n_sites
    shape = (n,) if n_traj is None else (n_traj, n)

    u = np.zeros(n)
    v = np.zeros(n)
    u[sampled], v[sampled], _ = bogoliubov_uv(ks[sampled], n0, g=g)

    z = rng.standard_normal(shape + (2,))
    a = 0.5 * (z[..., 0] + 1j * z[..., 1])
    a[..., ~sampled] = 0.0

    # C_k = u_k a_k - v_k conj(a_{-k}); -k index in FFT order is (-j) mod n
    minus = (-np.arange(n)) % n
    coeff = u * a - v * np.conj(a[..., minus])
    # shift so mode functions are e^{ikx} with x = (j - origin)*dx
    coeff = coeff * np.exp(-1j * ks * grid.origin_index * grid.dx)

    fluct = np.sqrt(n / grid.dx) * np.fft.ifft(coeff, axis=-1)
    values = np.sqrt(n0) + fluct
    return VacuumSample(
        field=ComplexField(values, grid, time=0.0),
        sampled_k=ks[sampled],
        a_k=a[..., sampled],
        cutoff_k=float(cutoff_k),
    )


def depletion_mode_sum(grid: GridSpec, n0: float, cutoff_k: float | None = None,
                       g: float | None = None) -> float:
    """Expected Weyl-density excess over n0: sum_k (u_k^2 + v_k^2) / (2 L).

    Independent oracle for <|psi|^2> of a fresh vacuum ensemble.
    """
    ks = momentum_grid(grid)
    if cutoff_k is None:
        cutoff_k = np.pi / grid.dx
    sampled = (ks != 0.0) & (np.abs(ks) <= cutoff_k * (1 + 1e-12))
    u, v, _ = bogoliubov_uv(ks[sampled], n0, g=g)
    return float(np.sum(u**2 + v**2) / (2.0 * grid.length))

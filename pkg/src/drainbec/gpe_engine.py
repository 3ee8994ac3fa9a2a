"""Time evolution of Wigner trajectories under the stochastic GPE with local loss.

The equation of motion is

    i dpsi/dt = -1/2 d^2psi/dx^2 + g|psi|^2 psi - i gamma delta(x) psi + eta(t) delta(x)

with complex white noise <eta*(t) eta(s)> = gamma delta(t - s).  On the
lattice the delta becomes 1/dx on the drain site.  One step is the fixed
operator splitting

    kinetic half -> interaction phase + drain decay + noise -> kinetic half

where the drain decay is the exact exponential exp(-gamma dt/dx) and the
noise increment variance is the exact Ornstein-Uhlenbeck balance
(1 - exp(-2 gamma dt/dx)) / (2 dx), which reduces to gamma dt/dx^2 as
dt -> 0 and keeps the Wigner vacuum an exact fixed point of the discrete
loss+noise update at any dt.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import Boundary, ComplexField, GridSpec, momentum_grid, spatial_integral
from .vacuum_sampler import sample_vacuum

__all__ = [
    "DrainSpec",
    "Scheme",
    "EngineConfig",
    "NoiseDraw",
    "Stepper",
    "step",
    "run_trajectory",
    "run_ensemble",
    "TrajectoryRecord",
    "EnsembleStats",
    "trajectory_rng",
    "energy_functional",
]

STABILITY_FACTOR = 0.1
NORM_EXPLOSION_FACTOR = 10.0
_SMALL_ANGLE = 0.15


class Scheme(Enum):
    SPLIT_STEP_SPECTRAL = "split_step_spectral"
    SEMI_IMPLICIT_FD = "semi_implicit_fd"


@dataclass(frozen=True)
class DrainSpec:
    """Localized loss gamma*delta(x - position); position must be a grid site."""
    position: float
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class EngineConfig:
    dt: float
    drains: tuple = ()
    noise_enabled: bool = True
    interaction_g: float = 0.1       # g = 1/n0 in fixed units
    scheme: Scheme = Scheme.SPLIT_STEP_SPECTRAL

    def __post_init__(self):
        object.__setattr__(self, "drains", tuple(self.drains))
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", Scheme(self.scheme))

    def validate(self, grid: GridSpec):
        bound = STABILITY_FACTOR * min(grid.dx**2, 1.0)
        if self.dt > bound * (1 + 1e-12):
            raise ValueError(
                f"dt = {self.dt} violates the stability bound "
                f"dt <= 0.1*min(dx^2, 1) = {bound}"
            )
        for d in self.drains:
            grid.index_of(d.position)
        if self.scheme is Scheme.SPLIT_STEP_SPECTRAL and grid.boundary is not Boundary.PERIODIC:
            raise ValueError("split_step_spectral requires periodic boundary")


@dataclass
class NoiseDraw:
    """Complex Gaussian increments for the drain noise, one per drain per step.

    variance_rule is <|W|^2> per step: the exact discrete balance
    (1 - exp(-2 gamma dt/dx)) / (2 dx) for each drain.
    """
    increments: np.ndarray          # shape (..., n_steps, n_drains), complex
    variance_rule: np.ndarray       # shape (n_drains,)

    @staticmethod
    def draw(rng: np.random.Generator, n_steps: int, drains, dt: float, dx: float,
             lead_shape: tuple = ()) -> "NoiseDraw":
        gammas = np.array([d.gamma for d in drains])
        lam = gammas * dt / dx
        var = (1.0 - np.exp(-2.0 * lam)) / (2.0 * dx)
        z = rng.standard_normal(lead_shape + (n_steps, len(drains), 2))
        w = np.sqrt(var / 2.0)[..., :, None] * z
        return NoiseDraw(increments=w[..., 0] + 1j * w[..., 1], variance_rule=var)


_COS_COEF = (1.0, -1 / 2, 1 / 24, -1 / 720, 1 / 40320)
_SINC_COEF = (1.0, -1 / 6, 1 / 120, -1 / 5040, 1 / 362880)


class Stepper:
    """Precomputed one-step propagator; operates in place on (..., n_sites) arrays."""

    def __init__(self, grid: GridSpec, cfg: EngineConfig):
        cfg.validate(grid)
        self.grid = grid
        self.cfg = cfg
        self.dt = cfg.dt
        self.g = cfg.interaction_g
        self.drain_idx = np.array([grid.index_of(d.position) for d in cfg.drains], dtype=int)
        self.drain_gamma = np.array([d.gamma for d in cfg.drains])
        self.decay = np.exp(-self.drain_gamma * self.dt / grid.dx)
        self._bufs = None
        if cfg.scheme is Scheme.SPLIT_STEP_SPECTRAL:
            k = momentum_grid(grid)
            self._kin_half = np.exp(-0.25j * k**2 * self.dt)
            self._kin_full = np.exp(-0.5j * k**2 * self.dt)
        else:
            self._build_fd_half()

    def _ensure_bufs(self, shape):
        if self._bufs is None or self._bufs[0].shape != shape:
            self._bufs = (np.empty(shape), np.empty(shape), np.empty(shape),
                          np.empty(shape), np.empty(shape, dtype=np.complex128))
        return self._bufs

    def _phase_rotation(self, psi):
        """psi *= exp(-i dt g |psi|^2), machine-accurate polynomial for the
        small per-step angle, exact exp fallback otherwise."""
        th, t2, c, s, cis = self._ensure_bufs(psi.shape)
        np.multiply(psi.real, psi.real, out=th)
        np.multiply(psi.imag, psi.imag, out=t2)
        th += t2
        th *= self.dt * self.g
        if th.max() < 2 * _SMALL_ANGLE:
            np.multiply(th, th, out=t2)
            for buf, coef in ((c, _COS_COEF), (s, _SINC_COEF)):
                buf.fill(coef[-1])
                for a in coef[-2::-1]:
                    buf *= t2
                    buf += a
            s *= th
            np.negative(s, out=s)
            cis.real = c
            cis.imag = s
        else:
            np.multiply(th, -1j, out=cis)
            np.exp(cis, out=cis)
        psi *= cis
        return psi

    def _build_fd_half(self):
        # Crank-Nicolson factors for a half kinetic step with the 3-point Laplacian
        n, dx = self.grid.n_sites, self.grid.dx
        main = np.full(n, -2.0)
        off = np.ones(n - 1)
        lap = sp.diags([off, main, off], [-1, 0, 1], format="lil") / dx**2
        if self.grid.boundary is Boundary.PERIODIC:
            lap[0, -1] = 1.0 / dx**2
            lap[-1, 0] = 1.0 / dx**2
        kin = -0.5 * lap.tocsc()
        eye = sp.identity(n, format="csc")
        z = 0.25j * self.dt
        self._fd_rhs = (eye - z * kin).tocsr()
        self._fd_lu = spla.splu((eye + z * kin).tocsc())

    def _kinetic_half(self, psi):
        if self.cfg.scheme is Scheme.SPLIT_STEP_SPECTRAL:
            spec = sfft.fft(psi, axis=-1, workers=-1)
            spec *= self._kin_half
            psi[...] = sfft.ifft(spec, axis=-1, workers=-1, overwrite_x=True)
        else:
            rhs = self._fd_rhs @ psi.reshape(-1, self.grid.n_sites).T
            psi[...] = self._fd_lu.solve(rhs).T.reshape(psi.shape)
        return psi

    def _local_update(self, psi, noise_row=None):
        # interaction phase (exact for the pointwise substep), then drain
        # decay, then the noise increment
        if self.g != 0.0:
            self._phase_rotation(psi)
        if len(self.drain_idx):
            psi[..., self.drain_idx] *= self.decay
            if noise_row is not None:
                psi[..., self.drain_idx] += noise_row
        return psi

    def advance(self, psi, noise_row=None):
        """One full step: K(dt/2) -> local -> K(dt/2).  In place."""
        self._kinetic_half(psi)
        self._local_update(psi, noise_row)
        self._kinetic_half(psi)
        return psi

    def evolve_segment(self, psi, n_steps, noise_seg=None):
        """Advance n_steps, merging interior kinetic half steps.

        Mathematically identical to n_steps advance() calls (half steps of
        adjacent splits combine into full kinetic steps) at half the FFT
        count.  Spectral scheme only; may return a different array object.
        """
        if n_steps == 0:
            return psi
        if self.cfg.scheme is not Scheme.SPLIT_STEP_SPECTRAL:
            for s in range(n_steps):
                row = noise_seg[:, s, :] if noise_seg is not None else None
                self.advance(psi, row)
            return psi

        def kin(psi_, phases):
            spec = sfft.fft(psi_, axis=-1, workers=-1, overwrite_x=True)
            spec *= phases
            return sfft.ifft(spec, axis=-1, workers=-1, overwrite_x=True)

        psi = kin(psi, self._kin_half)
        for s in range(n_steps):
            row = noise_seg[:, s, :] if noise_seg is not None else None
            self._local_update(psi, row)
            psi = kin(psi, self._kin_full if s < n_steps - 1 else self._kin_half)
        return psi


def step(fld: ComplexField, cfg: EngineConfig, rng: np.random.Generator | None = None,
         stepper: Stepper | None = None) -> ComplexField:
    """Advance a field by one dt.  Aborts (raises) on NaN/Inf."""
    st = stepper if stepper is not None else Stepper(fld.grid, cfg)
    noise_row = None
    if cfg.noise_enabled and len(st.drain_idx):
        if rng is None:
            raise ValueError("noise_enabled requires an rng stream")
        nd = NoiseDraw.draw(rng, 1, cfg.drains, cfg.dt, fld.grid.dx,
                            lead_shape=fld.values.shape[:-1])
        noise_row = nd.increments[..., 0, :]
    out = fld.copy()
    st.advance(out.values, noise_row)
    out.time = fld.time + cfg.dt
    if not np.all(np.isfinite(out.values)):
        raise FloatingPointError(
            f"non-finite field after step at t = {out.time:.6g}"
        )
    return out


@dataclass
class TrajectoryRecord:
    final_hash: str
    norm_times: np.ndarray
    norm_history: np.ndarray
    aborted: bool
    abort_reason: str | None = None
    n_steps: int = 0


def _schedule_to_steps(schedule, dt, t0=0.0):
    steps = []
    for t in schedule:
        s = (t - t0) / dt
        s_round = int(round(s))
        if abs(s - s_round) > 1e-6 or s_round < 0:
            raise ValueError(f"schedule time {t} is not a non-negative multiple of dt={dt}")
        steps.append(s_round)
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError("schedule must be strictly increasing")
    return steps


def run_trajectory(init, cfg: EngineConfig, schedule, sinks=(),
                   rng: np.random.Generator | None = None,
                   record_norm_every: int = 0) -> TrajectoryRecord:
    """Evolve one trajectory, invoking sinks(field) at each scheduled time.

    The last schedule entry (or t=0 for an empty schedule) is the final
    time.  Norm history is recorded at scheduled times, plus every
    record_norm_every steps when that is positive.
    """
    fld = init.field if hasattr(init, "field") else init
    fld = fld.copy()
    grid = fld.grid
    st = Stepper(grid, cfg)
    steps = _schedule_to_steps(schedule, cfg.dt, fld.time) if len(schedule) else []
    n_steps = steps[-1] if steps else 0
    snap_set = set(steps)

    noise = None
    if cfg.noise_enabled and len(cfg.drains) and n_steps:
        if rng is None:
            raise ValueError("noise_enabled requires an rng stream")
        noise = NoiseDraw.draw(rng, n_steps, cfg.drains, cfg.dt, grid.dx)

    norm_t, norm_h = [fld.time], [float(fld.weyl_norm())]
    n0_norm = norm_h[0]
    aborted, reason = False, None

    if 0 in snap_set:
        for sink in sinks:
            sink(fld)
    for s in range(1, n_steps + 1):
        row = noise.increments[s - 1] if noise is not None else None
        st.advance(fld.values, row)
        fld.time += cfg.dt
        take_norm = (record_norm_every and s % record_norm_every == 0) or s in snap_set
        if take_norm or s == n_steps:
            if not np.all(np.isfinite(fld.values)):
                aborted, reason = True, f"non-finite field at step {s}"
                break
            nw = float(fld.weyl_norm())
            if nw > NORM_EXPLOSION_FACTOR * max(n0_norm, 1e-300):
                aborted, reason = True, f"norm explosion at step {s}: N_W = {nw:.3g}"
                break
            if take_norm:
                norm_t.append(fld.time)
                norm_h.append(nw)
        if s in snap_set:
            for sink in sinks:
                sink(fld)

    h = hashlib.sha256(np.ascontiguousarray(fld.values).tobytes()).hexdigest()
    return TrajectoryRecord(
        final_hash=h,
        norm_times=np.array(norm_t),
        norm_history=np.array(norm_h),
        aborted=aborted,
        abort_reason=reason,
        n_steps=n_steps,
    )


def trajectory_rng(base_seed: int, traj_index: int) -> np.random.Generator:
    """Per-trajectory stream, independent of batching and worker count."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(traj_index,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class EnsembleSpec:
    """Everything one worker needs to rebuild and evolve a batch."""
    grid: GridSpec
    cfg: EngineConfig
    n0: float
    schedule: tuple
    base_seed: int
    cutoff_k: float | None = None
    sample_g: float | None = None        # defaults to cfg.interaction_g
    deterministic_init: bool = False     # plain sqrt(n0), no Wigner sampling
    paired_control: bool = False         # co-evolve a drainless, noiseless twin


@dataclass
class EnsembleStats:
    results: dict
    n_traj: int
    n_aborted: int
    abort_reasons: list
    partials: dict | None = None


def _run_batch(spec: EnsembleSpec, reducers, idx_lo: int, idx_hi: int):
    grid, cfg = spec.grid, spec.cfg
    nb = idx_hi - idx_lo
    steps = _schedule_to_steps(spec.schedule, cfg.dt)
    n_steps = steps[-1] if steps else 0

    psi = np.empty((nb, grid.n_sites), dtype=np.complex128)
    noise_inc = None
    for j in range(nb):
        rng = trajectory_rng(spec.base_seed, idx_lo + j)
        if spec.deterministic_init:
            psi[j] = np.sqrt(spec.n0)
        else:
            g = spec.sample_g if spec.sample_g is not None else cfg.interaction_g
            psi[j] = sample_vacuum(grid, spec.n0, cutoff_k=spec.cutoff_k,
                                   rng=rng, g=g).field.values
        if cfg.noise_enabled and len(cfg.drains) and n_steps:
            nd = NoiseDraw.draw(rng, n_steps, cfg.drains, cfg.dt, grid.dx)
            if noise_inc is None:
                noise_inc = np.empty((nb,) + nd.increments.shape, dtype=np.complex128)
            noise_inc[j] = nd.increments

    st = Stepper(grid, cfg)
    slabs = np.empty((len(steps), nb, grid.n_sites), dtype=np.complex128)
    times = np.array(spec.schedule, dtype=float)
    psi_ctl = slabs_ctl = st_ctl = None
    if spec.paired_control:
        psi_ctl = psi.copy()
        st_ctl = Stepper(grid, replace(cfg, drains=(), noise_enabled=False))
        slabs_ctl = np.empty_like(slabs)

    valid = np.ones(nb, dtype=bool)
    reasons = []
    norm0 = (np.abs(psi) ** 2).sum(axis=-1) * grid.dx
    prev = 0
    for i, s in enumerate(steps):
        if s > prev:
            seg = noise_inc[:, prev:s, :] if noise_inc is not None else None
            psi = st.evolve_segment(psi, s - prev, seg)
            if psi_ctl is not None:
                psi_ctl = st_ctl.evolve_segment(psi_ctl, s - prev)
            prev = s
            finite = np.isfinite(psi).all(axis=-1)
            if not finite.all():
                for j in np.nonzero(valid & ~finite)[0]:
                    reasons.append(f"traj {idx_lo + j}: non-finite by step {s}")
                valid &= finite
                psi[~finite] = 0.0  # keep the batch arithmetic clean
        slabs[i] = psi
        if psi_ctl is not None:
            slabs_ctl[i] = psi_ctl

    nw = (np.abs(slabs[-1] if len(steps) else psi) ** 2).sum(axis=-1) * grid.dx
    blew = valid & (nw > NORM_EXPLOSION_FACTOR * np.maximum(norm0, 1e-300))
    for j in np.nonzero(blew)[0]:
        reasons.append(f"traj {idx_lo + j}: norm explosion N_W = {nw[j]:.3g}")
    valid &= ~blew

    partials = {}
    for red in reducers:
        if getattr(red, "needs_control", False):
            partials[red.name] = red.batch_partial(times, slabs, valid, slabs_ctl)
        else:
            partials[red.name] = red.batch_partial(times, slabs, valid)
    return partials, int(valid.sum()), reasons


def run_ensemble(spec: EnsembleSpec, n_traj: int, reducers,
                 batch_size: int = 256, workers: int = 1,
                 keep_partials: bool = False,
                 max_abort_fraction: float = 0.01) -> EnsembleStats:
    """Evolve n_traj independent trajectories and merge reducer partials.

    Trajectories are partitioned into fixed batches of batch_size
    regardless of worker count, and partials are merged in batch order, so
    the result is bit-identical for any `workers`.  Aborted trajectories
    are excluded and counted; more than max_abort_fraction aborts raises.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    bounds = [(lo, min(lo + batch_size, n_traj)) for lo in range(0, n_traj, batch_size)]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_batch, spec, reducers, lo, hi) for lo, hi in bounds]
            outs = [f.result() for f in futs]   # batch order preserved
    else:
        outs = [_run_batch(spec, reducers, lo, hi) for lo, hi in bounds]

    n_ok = sum(o[1] for o in outs)
    reasons = [r for o in outs for r in o[2]]
    n_aborted = n_traj - n_ok
    if n_aborted > max_abort_fraction * n_traj:
        raise RuntimeError(
            f"{n_aborted}/{n_traj} trajectories aborted: {reasons[:5]}"
        )

    results, partials = {}, {}
    for red in reducers:
        plist = [o[0][red.name] for o in outs]
        results[red.name] = red.merge(plist)
        if keep_partials:
            partials[red.name] = plist
    return EnsembleStats(results=results, n_traj=n_ok, n_aborted=n_aborted,
                         abort_reasons=reasons, partials=partials if keep_partials else None)


def energy_functional(fld: ComplexField, g: float) -> float:
    """E = integral of 1/2 |dpsi/dx|^2 + g/2 |psi|^4 (spectral gradient)."""
    if fld.grid.boundary is Boundary.PERIODIC:
        k = momentum_grid(fld.grid)
        dpsi = np.fft.ifft(1j * k * np.fft.fft(fld.values, axis=-1), axis=-1)
    else:
        dpsi = np.gradient(fld.values, fld.grid.dx, axis=-1)
    dens = np.abs(fld.values) ** 2
    e = 0.5 * np.abs(dpsi) ** 2 + 0.5 * g * dens**2
    return spatial_integral(e, fld.grid)

"""Reduction of trajectory ensembles to measured quantities.

All reducers are associative partial sums: a batch of trajectories is
folded into {sum, sum of squares, count} style partials and partials are
merged in fixed batch order, which makes ensemble statistics independent
of how many workers produced them.

Weyl-ordering bookkeeping: a lattice Wigner field carries half a quantum
per mode, i.e. <|psi_j|^2> = <psi^dag psi>_j + 1/(2 dx) with the default
full-Nyquist mode population.  Densities subtract that constant directly;
two-point functions subtract the matched t = 0 correlation of the same
ensemble instead, which cancels the ordering constants together with the
initial depletion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DensityReducer", "PhaseReducer", "FluctuationReducer", "PairedFluctuationReducer", "G2Reducer",
    "DensityStats", "PhaseStats", "FluctStats", "PairedFluctStats", "G2Stats",
    "ProfileSeries", "CorrelationMap", "FluctuationWedge",
    "density_profile", "phase_profile", "flow_velocity", "fluctuation_wedge",
    "g2_map", "band_mean", "fit_wedge_profile", "count_solitons", "region_flow",
]


# --------------------------------------------------------------------------
# reducers


@dataclass
class DensityStats:
    times: np.ndarray
    mean: np.ndarray       # raw Weyl density <|psi|^2>, shape (T, n)
    err: np.ndarray        # standard error of the mean
    n_traj: int


class DensityReducer:
    name = "density"

    def batch_partial(self, times, slabs, valid):
        dens = np.abs(slabs[:, valid, :]) ** 2
        return {
            "times": times,
            "sum": dens.sum(axis=1),
            "sumsq": (dens**2).sum(axis=1),
            "count": int(valid.sum()),
        }

    def merge(self, partials):
        count = sum(p["count"] for p in partials)
        s = sum(p["sum"] for p in partials)
        s2 = sum(p["sumsq"] for p in partials)
        mean = s / count
        var = np.maximum(s2 / count - mean**2, 0.0)
        err = np.sqrt(var / max(count - 1, 1))
        return DensityStats(times=partials[0]["times"], mean=mean, err=err, n_traj=count)


@dataclass
class PhaseStats:
    times: np.ndarray
    mean: np.ndarray
    err: np.ndarray
    unreliable: np.ndarray   # fraction of trajectories with near-zero density
    n_traj: int


class PhaseReducer:
    """Per-trajectory phase: complex argument, unwrapped from the reference
    edge site inward, gauge-fixed to zero there, then ensemble averaged.
    Sites whose density drops below min_density are counted as unreliable
    rather than trusted through the 2 pi branch choice."""

    name = "phase"

    def __init__(self, ref_index: int = 0, min_density: float = 0.0):
        self.ref_index = ref_index
        self.min_density = min_density

    def batch_partial(self, times, slabs, valid):
        sl = slabs[:, valid, :]
        phi = np.unwrap(np.angle(sl), axis=-1)
        phi -= phi[..., self.ref_index:self.ref_index + 1]
        bad = (np.abs(sl) ** 2 < self.min_density)
        return {
            "times": times,
            "sum": phi.sum(axis=1),
            "sumsq": (phi**2).sum(axis=1),
            "bad": bad.sum(axis=1),
            "count": int(valid.sum()),
        }

    def merge(self, partials):
        count = sum(p["count"] for p in partials)
        s = sum(p["sum"] for p in partials)
        s2 = sum(p["sumsq"] for p in partials)
        bad = sum(p["bad"] for p in partials)
        mean = s / count
        var = np.maximum(s2 / count - mean**2, 0.0)
        err = np.sqrt(var / max(count - 1, 1))
        return PhaseStats(times=partials[0]["times"], mean=mean, err=err,
                          unreliable=bad / count, n_traj=count)


@dataclass
class FluctStats:
    times: np.ndarray
    mean_density: np.ndarray      # <|psi|^2>, (T, n)
    mean_density_err: np.ndarray
    condensate: np.ndarray        # |<psi>|^2 after phase alignment, (T, n)
    condensate_err: np.ndarray
    n_traj: int


class FluctuationReducer:
    """Condensate/fluctuation split of the ensemble.

    Each trajectory is rotated by the mean phase of a reference band far
    outside the causal cone before averaging, so the condensate estimate
    <psi> is not washed out by ensemble phase diffusion of the global mode.
    The fluctuation density is then <|psi|^2> - |<psi>|^2 (Weyl ordered;
    constants cancel in the t = 0 baseline subtraction).
    """

    name = "fluct"

    def __init__(self, grid, ref_fraction: float = 0.08):
        x = grid.positions
        edge = x.min() + ref_fraction * grid.length
        self.ref_sel = x <= edge

    def batch_partial(self, times, slabs, valid):
        sl = slabs[:, valid, :]
        ref = sl[:, :, self.ref_sel].sum(axis=-1)
        phase = ref / np.maximum(np.abs(ref), 1e-300)
        aligned = sl * np.conj(phase)[:, :, None]
        dens = np.abs(sl) ** 2
        return {
            "times": times,
            "sum_psi": aligned.sum(axis=1),
            "sumsq_psi": (np.abs(aligned) ** 2).sum(axis=1),  # = sum dens
            "sum_dens": dens.sum(axis=1),
            "sumsq_dens": (dens**2).sum(axis=1),
            "count": int(valid.sum()),
        }

    def merge(self, partials):
        count = sum(p["count"] for p in partials)
        mean_psi = sum(p["sum_psi"] for p in partials) / count
        mean_d = sum(p["sum_dens"] for p in partials) / count
        var_d = np.maximum(sum(p["sumsq_dens"] for p in partials) / count - mean_d**2, 0.0)
        derr = np.sqrt(var_d / max(count - 1, 1))
        # |<psi>|^2 error: propagate the complex-mean scatter
        var_psi = np.maximum(sum(p["sumsq_psi"] for p in partials) / count
                             - np.abs(mean_psi) ** 2, 0.0)
        cerr = 2.0 * np.abs(mean_psi) * np.sqrt(var_psi / max(count - 1, 1))
        return FluctStats(times=partials[0]["times"], mean_density=mean_d,
                          mean_density_err=derr, condensate=np.abs(mean_psi) ** 2,
                          condensate_err=cerr, n_traj=count)


@dataclass
class PairedFluctStats:
    times: np.ndarray
    pathwise_excess: np.ndarray   # <|psi|^2 - |psi_ctl|^2>, (T, n)
    pathwise_err: np.ndarray
    condensate_excess: np.ndarray  # |<psi>|^2 - |<psi_ctl>|^2 (phase aligned)
    condensate_err: np.ndarray
    n_traj: int


class PairedFluctuationReducer:
    """Fluctuation density relative to a drainless control twin.

    Each trajectory is co-evolved with a gamma = 0, noiseless control from
    the same Wigner sample (EnsembleSpec.paired_control), so the intrinsic
    classical-field dephasing of the interacting ensemble cancels pathwise
    and only drain-induced fluctuations remain:

        n_out = <|psi|^2 - |psi_c|^2> - (|<psi>|^2 - |<psi_c>|^2)

    with both means phase-aligned on a reference band far outside the
    causal cone.  n_out(x, 0) = 0 identically (psi = psi_c at t = 0).
    """

    name = "paired_fluct"
    needs_control = True

    def __init__(self, grid, ref_fraction: float = 0.08):
        x = grid.positions
        edge = x.min() + ref_fraction * grid.length
        self.ref_sel = x <= edge

    def _aligned(self, sl):
        ref = sl[:, :, self.ref_sel].sum(axis=-1)
        phase = ref / np.maximum(np.abs(ref), 1e-300)
        return sl * np.conj(phase)[:, :, None]

    def batch_partial(self, times, slabs, valid, slabs_ctl):
        if slabs_ctl is None:
            raise ValueError("PairedFluctuationReducer needs paired_control=True")
        sl, sc = slabs[:, valid, :], slabs_ctl[:, valid, :]
        ddens = np.abs(sl) ** 2 - np.abs(sc) ** 2
        al, alc = self._aligned(sl), self._aligned(sc)
        return {
            "times": times,
            "sum_ddens": ddens.sum(axis=1),
            "sumsq_ddens": (ddens**2).sum(axis=1),
            "sum_psi": al.sum(axis=1),
            "sum_psic": alc.sum(axis=1),
            "sumsq_dpsi": (np.abs(al - alc) ** 2).sum(axis=1),
            "count": int(valid.sum()),
        }

    def merge(self, partials):
        count = sum(p["count"] for p in partials)
        mean_dd = sum(p["sum_ddens"] for p in partials) / count
        var_dd = np.maximum(sum(p["sumsq_ddens"] for p in partials) / count - mean_dd**2, 0.0)
        mean_psi = sum(p["sum_psi"] for p in partials) / count
        mean_psic = sum(p["sum_psic"] for p in partials) / count
        var_dpsi = np.maximum(sum(p["sumsq_dpsi"] for p in partials) / count
                              - np.abs(mean_psi - mean_psic) ** 2, 0.0)
        scale = np.maximum(np.abs(mean_psi), np.abs(mean_psic))
        cerr = 2.0 * scale * np.sqrt(var_dpsi / max(count - 1, 1))
        return PairedFluctStats(
            times=partials[0]["times"],
            pathwise_excess=mean_dd,
            pathwise_err=np.sqrt(var_dd / max(count - 1, 1)),
            condensate_excess=np.abs(mean_psi) ** 2 - np.abs(mean_psic) ** 2,
            condensate_err=cerr,
            n_traj=count,
        )


@dataclass
class G2Stats:
    times: np.ndarray
    mean_n: np.ndarray       # (T, n)
    second: np.ndarray       # (T, n, n), <n_i n_j>
    n_traj: int


class G2Reducer:
    """Accumulates first and second moments of the density per snapshot.

    smooth_sigma > 0 convolves each trajectory's density with a periodic
    Gaussian of that width (in xi) before correlating: an imaging
    resolution, which removes lattice-scale (near-Nyquist) interference
    fringes from the maps without touching the t = 0 baseline exactness.
    """

    name = "g2"

    def __init__(self, smooth_sigma: float = 0.0, dx: float = 1.0):
        self.smooth_sigma = smooth_sigma   # in xi
        self.dx = dx

    def _smooth(self, dens, n_sites):
        if self.smooth_sigma <= 0:
            return dens
        k = 2 * np.pi * np.fft.fftfreq(n_sites, d=self.dx)
        kern = np.exp(-0.5 * (k * self.smooth_sigma) ** 2)
        return np.fft.ifft(np.fft.fft(dens, axis=-1) * kern, axis=-1).real

    def batch_partial(self, times, slabs, valid):
        dens = np.abs(slabs[:, valid, :]) ** 2
        dens = self._smooth(dens, slabs.shape[-1])
        outer = np.einsum("tbi,tbj->tij", dens, dens)
        return {
            "times": times,
            "sum": dens.sum(axis=1),
            "outer": outer,
            "count": int(valid.sum()),
        }

    def merge(self, partials):
        count = sum(p["count"] for p in partials)
        s = sum(p["sum"] for p in partials)
        o = sum(p["outer"] for p in partials)
        return G2Stats(times=partials[0]["times"], mean_n=s / count,
                       second=o / count, n_traj=count)

    @staticmethod
    def connected(stats: G2Stats, t_index: int) -> np.ndarray:
        m = stats.mean_n[t_index]
        c = stats.second[t_index] - np.outer(m, m)
        return 0.5 * (c + c.T)


# --------------------------------------------------------------------------
# derived observables


@dataclass
class ProfileSeries:
    times: np.ndarray
    density: np.ndarray
    density_err: np.ndarray
    phase: np.ndarray
    phase_err: np.ndarray
    velocity: np.ndarray
    unreliable: np.ndarray


@dataclass
class CorrelationMap:
    g2: np.ndarray
    reference_subtracted: bool
    normalization: float
    n_traj: int


@dataclass
class FluctuationWedge:
    times: np.ndarray
    n_out: np.ndarray
    reference: str = "matched t=0 ensemble"
    n_out_err: np.ndarray | None = None


def density_profile(stats: DensityStats, grid) -> tuple[np.ndarray, np.ndarray]:
    """Condensate density estimate: <|psi|^2> minus the half-quantum 1/(2dx)."""
    if stats.n_traj < 2:
        raise ValueError("density_profile needs at least 2 trajectories")
    return stats.mean - 0.5 / grid.dx, stats.err


def phase_profile(stats: PhaseStats) -> tuple[np.ndarray, np.ndarray]:
    return stats.mean, stats.err


def flow_velocity(phase: np.ndarray, grid) -> np.ndarray:
    """v = dS/dx (m = 1), centered differences."""
    return np.gradient(phase, grid.dx, axis=-1)


def profile_series(dens: DensityStats, phas: PhaseStats, grid) -> ProfileSeries:
    d, derr = density_profile(dens, grid)
    return ProfileSeries(
        times=dens.times, density=d, density_err=derr,
        phase=phas.mean, phase_err=phas.err,
        velocity=flow_velocity(phas.mean, grid),
        unreliable=phas.unreliable,
    )


def fluctuation_wedge(stats) -> FluctuationWedge:
    """Reservoir-induced fluctuation density above the initial level.

    Total Weyl density minus the measured condensate density |<psi>|^2,
    minus the matched baseline: for PairedFluctStats the baseline is the
    drainless control twin of every trajectory; for plain FluctStats it is
    the t = 0 level of the same ensemble.  Either way the Weyl ordering
    half-quanta and the initial depletion cancel and n_out(x, 0) = 0.
    """
    if isinstance(stats, PairedFluctStats):
        excess = stats.pathwise_excess - stats.condensate_excess
        err = np.sqrt(stats.pathwise_err**2 + stats.condensate_err**2)
        return FluctuationWedge(times=stats.times, n_out=excess - excess[0],
                                reference="paired drainless control ensemble",
                                n_out_err=err)
    excess = stats.mean_density - stats.condensate
    return FluctuationWedge(times=stats.times, n_out=excess - excess[0])


def _deflate_number_mode(c: np.ndarray, mean_n: np.ndarray) -> np.ndarray:
    """Project the per-shot total-number fluctuation out of a covariance.

    Equivalent to normalizing each shot's density by its total atom number
    before correlating (standard in density-correlation analysis); removes
    the loss-induced global number mode that otherwise lifts the whole map.
    """
    m = np.asarray(mean_n, dtype=float)
    p = np.eye(len(m)) - np.outer(m, np.ones_like(m)) / m.sum()
    return p @ c @ p.T


def g2_map(stats: G2Stats, t_index: int = -1, baseline_index: int = 0,
           remove_global: bool = False) -> CorrelationMap:
    """Reference-subtracted, normalized density-density correlation change.

    Returns (C_t - C_0) / N_0 with C the connected <n n> correlator and
    N_0 the spatial mean of the initial diagonal, so the result is O(gamma)
    and the Weyl ordering constants cancel.  remove_global applies per-shot
    total-number normalization to each time's covariance first.
    """
    if stats.n_traj < 2:
        raise ValueError("g2_map needs at least 2 trajectories")
    c_t = G2Reducer.connected(stats, t_index)
    c_0 = G2Reducer.connected(stats, baseline_index)
    if remove_global:
        c_t = _deflate_number_mode(c_t, stats.mean_n[t_index])
        c_0 = _deflate_number_mode(c_0, stats.mean_n[baseline_index])
    norm = float(np.mean(np.diag(c_0)))
    return CorrelationMap(g2=(c_t - c_0) / norm, reference_subtracted=True,
                          normalization=norm, n_traj=stats.n_traj)


def band_mean(g2: np.ndarray, mask: np.ndarray) -> float:
    return float(g2[mask].mean())


# --------------------------------------------------------------------------
# fitting and detection helpers


def fit_wedge_profile(x: np.ndarray, n_out: np.ndarray, inner_cut: float = 5.0):
    """Fit n_out(|x|) = a*(K - |x|) (zero outside) to a measured profile.

    Folds +-x, scans the kink position K on the grid and solves the slope
    analytically at each candidate; returns (slope a, kink K).
    The drain region |x| < inner_cut is excluded from the fit.
    """
    ax = np.abs(x)
    order = np.argsort(ax)
    r, y = ax[order], n_out[order]
    keep = r >= inner_cut
    r, y = r[keep], y[keep]

    best = (np.inf, 0.0, 0.0)
    for K in np.linspace(r.min() + 1.0, r.max(), 400):
        ramp = np.clip(K - r, 0.0, None)
        denom = (ramp**2).sum()
        if denom == 0:
            continue
        a = (ramp * y).sum() / denom
        sse = ((y - a * ramp) ** 2).sum()
        if sse < best[0]:
            best = (sse, a, K)
    return best[1], best[2]


def count_solitons(x: np.ndarray, density: np.ndarray, x_range, depth: float = 0.3,
                   bg_window: float = 12.0, exclude: tuple = (), core: float = 3.0):
    """Count solitonic minima: local density minima deeper than `depth` of
    the local background (running maximum over +-bg_window)."""
    from scipy.ndimage import maximum_filter1d

    dx = x[1] - x[0]
    w = max(3, int(round(bg_window / dx)))
    bg = maximum_filter1d(density, size=2 * w + 1, mode="nearest")

    sel = (x > x_range[0]) & (x < x_range[1])
    for x0 in exclude:
        sel &= np.abs(x - x0) > core
    idx = np.nonzero(sel)[0]
    hits = []
    for i in idx[1:-1]:
        if density[i] <= density[i - 1] and density[i] <= density[i + 1]:
            if density[i] < (1.0 - depth) * bg[i]:
                if not hits or (x[i] - x[hits[-1]]) > 2.0:
                    hits.append(i)
    return len(hits), [float(x[i]) for i in hits]


def region_flow(values: np.ndarray, grid, x_range, exclude: tuple = (), core: float = 3.0,
                mask_dips: float = 0.0):
    """Median |j/n| over a region: robust local flow speed of a single field.

    mask_dips > 0 excludes sites whose density is below that fraction of
    the local background (running maximum), so moving soliton cores do not
    contaminate the background-flow estimate."""
    x = grid.positions
    j = np.imag(np.conj(values) * np.gradient(values, grid.dx, axis=-1))
    n = np.abs(values) ** 2
    sel = (x > x_range[0]) & (x < x_range[1]) & (n > 1e-12)
    for x0 in exclude:
        sel &= np.abs(x - x0) > core
    if mask_dips > 0:
        from scipy.ndimage import maximum_filter1d
        w = max(3, int(round(12.0 / grid.dx)))
        bg = maximum_filter1d(n, size=2 * w + 1, mode="nearest")
        sel &= n > mask_dips * bg
    return float(np.median(np.abs(j[sel] / n[sel])))

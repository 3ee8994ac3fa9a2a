"""Render persisted simulation datasets into the figure set.

Each recipe names a figure kind, the dataset files it draws from, optional
overlay datasets (persisted analytic curves; never recomputed here), and
the output path.  Rendering is deterministic: fixed hash salt, no embedded
timestamps, so identical inputs produce byte-identical SVG.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .dataio import load  # noqa: E402

import numpy as np  # noqa: E402

FIGURE_KINDS = (
    "density_current",        # local c^2 and v^2 profiles, horizon crossings
    "phase_profiles",         # condensate phase with stationary-fit overlay
    "drain_response",         # steady drain/plateau observables vs gamma (cusp)
    "critical_collapse",      # rescaled critical profiles over the analytic law
    "dispersion_branches",    # propagating and evanescent wavevectors vs omega
    "smatrix_scan",           # in-channel scattering coefficients vs omega
    "smatrix_noise",          # reservoir-noise couplings vs omega
    "wedge_fluctuations",     # fluctuation density wedge with prediction
    "g2_map",                 # density-density correlation heatmap
    "two_drain_evolution",    # density snapshots between two drains
    "g2_map_two_drain",       # correlation heatmap in the two-drain regime
    "smatrix_scan_strong",    # same as smatrix_scan, strong-loss dataset
)

plt.rcParams["svg.hashsalt"] = "becfigs"


@dataclass
class FigureRecipe:
    kind: str
    datasets: dict
    output: str
    overlays: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    image_format: str = "svg"

    @staticmethod
    def from_file(path) -> "FigureRecipe":
        spec = json.loads(Path(path).read_text())
        kind = spec.get("kind")
        if kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {kind!r}; choose from {FIGURE_KINDS}")
        return FigureRecipe(
            kind=kind,
            datasets=spec["datasets"],
            output=spec["output"],
            overlays=spec.get("overlays", []),
            params=spec.get("params", {}),
            image_format=spec.get("format", "svg"),
        )


def _final(arr):
    """Last snapshot of a (T, n) series; 1-D arrays pass through."""
    a = np.asarray(arr)
    return a[-1] if a.ndim == 2 else a


def _save(fig, recipe):
    out = Path(recipe.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format=recipe.image_format, metadata={"Date": None})
    plt.close(fig)
    return out


def render(recipe: FigureRecipe) -> Path:
    """Render one recipe; returns the output path."""
    fn = _RENDERERS.get(recipe.kind)
    if fn is None:
        raise ValueError(f"unknown figure kind {recipe.kind!r}")
    data = {role: load(path) for role, path in recipe.datasets.items()}
    overlays = [load(p) for p in recipe.overlays]
    return fn(recipe, data, overlays)


def _render_density_current(recipe, data, overlays):
    ps = data["profile"]
    n0 = float(recipe.params.get("n0_xi", 10.0))
    x, dens, vel = ps["x"], _final(ps["density"]), _final(ps["velocity"])
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(x, dens / n0, "k-", lw=1.2, label="$c^2$ (local)")
    ax.plot(x, vel**2, "-", color="tab:green", lw=1.2, label="$v^2$")
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$c^2,\ v^2$  [$c_0^2$]")
    ax.legend(loc="upper right")
    return _save(fig, recipe)


def _render_phase_profiles(recipe, data, overlays):
    ps = data["profile"]
    x, phase = ps["x"], _final(ps["phase"])
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(x, phase, "k-", lw=1.0, label="measured")
    for ov in overlays:
        if "phase_fit" in ov:
            ax.plot(ov["x"], ov["phase_fit"], "r-", lw=1.0, alpha=0.8,
                    label="stationary fit")
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$S(x)$")
    ax.legend(loc="lower right")
    return _save(fig, recipe)


def _render_drain_response(recipe, data, overlays):
    tab = data["sweep"]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(tab["gamma"], tab["v_plateau"], "o-", color="grey", label="flow speed")
    ax.plot(tab["gamma"], tab["n_drain"], "s-", color="k", label="drain density")
    ax.plot(tab["gamma"], tab["v_sub_branch"], ":", color="tab:blue", lw=1,
            label="subcritical branch")
    ax.plot(tab["gamma"], tab["v_super_branch"], "--", color="tab:orange", lw=1,
            label="supercritical branch")
    ax.set_xlabel(r"$\gamma / c_0$")
    ax.set_ylabel(r"steady values  [$c_0$, $n_0$]")
    ax.set_ylim(0, 1.1)
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, recipe)


def _render_critical_collapse(recipe, data, overlays):
    fig, axes = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True)
    for role in sorted(data):
        d = data[role]
        axes[0].plot(d["x_over_ct"], d["density_scaled"], lw=0.9, label=role)
        axes[1].plot(d["x_over_ct"], d["phase_scaled"], lw=0.9)
    ref = data[sorted(data)[0]]
    axes[0].plot(ref["x_over_ct"], ref["density_analytic"], "k--", lw=1.4,
                 label="analytic")
    axes[1].plot(ref["x_over_ct"], ref["phase_analytic"], "k--", lw=1.4)
    axes[0].set_ylabel(r"$n/n_0$")
    axes[1].set_ylabel(r"$S/(c_0^2 t)$")
    axes[1].set_xlabel(r"$x/(c_0 t)$")
    axes[0].set_xlim(-1.2, 1.2)
    axes[0].legend(fontsize=8)
    return _save(fig, recipe)


def _render_dispersion_branches(recipe, data, overlays):
    scan = data["scan"]
    om = scan["omega"]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(scan["re_k_out"], om, "k-", lw=1.2, label="outgoing branch")
    ax.plot(scan["re_k_in"], om, "k--", lw=1.2, label="incoming branch")
    ax.plot(scan["re_k_evan"], om, "r-", lw=1.2, label="evanescent Re $k$")
    ax.plot(scan["im_k_evan"], om, "r--", lw=1.2, label="evanescent Im $k$")
    ax.set_xlabel(r"$k \xi$")
    ax.set_ylabel(r"$\omega/\mu$")
    ax.legend(fontsize=8)
    return _save(fig, recipe)


def _mod2(scan, out, inch):
    return scan[f"re_{out}_{inch}"] ** 2 + scan[f"im_{out}_{inch}"] ** 2


def _render_smatrix_scan(recipe, data, overlays):
    scan = data["scan"]
    om = scan["omega"]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.loglog(om, _mod2(scan, "B_out", "A_in"), "r-", label=r"$|t|^2$")
    ax.loglog(om, _mod2(scan, "A_out", "A_in"), "b-", label=r"$|r|^2$")
    ax.loglog(om, scan["loc_intensity_in"], "-", color="purple",
              label="localized intensity")
    ax.set_xlabel(r"$\omega/\mu$")
    ax.set_ylabel("scattering intensities")
    ax.legend(fontsize=8)
    return _save(fig, recipe)


def _render_smatrix_noise(recipe, data, overlays):
    scan = data["scan"]
    om = scan["omega"]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.loglog(om, _mod2(scan, "B_out", "eta") + _mod2(scan, "B_out", "eta_star"),
              "b-", label="outgoing channel")
    ax.loglog(om, scan["loc_intensity_eta"], "-", color="purple",
              label="localized mode")
    ax.set_xlabel(r"$\omega/\mu$")
    ax.set_ylabel("noise-coupling intensity")
    ax.legend(fontsize=8)
    return _save(fig, recipe)


def _render_wedge(recipe, data, overlays):
    w = data["wedge"]
    x, prof = w["x"], _final(w["n_out"])
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(x, prof, "-", color="tab:blue", lw=0.9, label="measured")
    for ov in overlays:
        if "wedge_prediction" in ov:
            ax.plot(ov["x"], ov["wedge_prediction"], "k--", lw=1.3,
                    label="scattering prediction")
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$n_{\mathrm{out}}\,\xi$")
    ax.legend(fontsize=8)
    return _save(fig, recipe)


def _render_g2(recipe, data, overlays):
    d = data["g2"]
    x, m = d["x"], d["g2"]
    lim = float(recipe.params.get("extent", np.abs(x).max()))
    sel = np.abs(x) <= lim
    mm = m[np.ix_(sel, sel)]
    scale = float(recipe.params.get("scale", np.percentile(np.abs(mm), 99)))
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.imshow(mm, origin="lower", cmap="RdBu_r", vmin=-scale, vmax=scale,
                   extent=[x[sel][0], x[sel][-1], x[sel][0], x[sel][-1]])
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$x'/\xi$")
    fig.colorbar(im, ax=ax, label=r"$\Delta g^{(2)}$ (normalized)")
    return _save(fig, recipe)


def _render_two_drain(recipe, data, overlays):
    ps = data["profile"]
    x, dens, times = ps["x"], ps["density"], ps["times"]
    n0 = float(recipe.params.get("n0_xi", 10.0))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    dens = np.atleast_2d(dens)
    for i, t in enumerate(np.atleast_1d(times)):
        ax.plot(x, dens[i] / n0, lw=0.9, label=f"t = {t:g}")
    ax.set_xlabel(r"$x/\xi$")
    ax.set_ylabel(r"$n/n_0$")
    ax.legend(fontsize=7)
    return _save(fig, recipe)


_RENDERERS = {
    "density_current": _render_density_current,
    "phase_profiles": _render_phase_profiles,
    "drain_response": _render_drain_response,
    "critical_collapse": _render_critical_collapse,
    "dispersion_branches": _render_dispersion_branches,
    "smatrix_scan": _render_smatrix_scan,
    "smatrix_noise": _render_smatrix_noise,
    "smatrix_scan_strong": _render_smatrix_scan,
    "wedge_fluctuations": _render_wedge,
    "g2_map": _render_g2,
    "two_drain_evolution": _render_two_drain,
    "g2_map_two_drain": _render_g2,
}

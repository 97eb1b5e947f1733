"""Command-line front end.

Every subcommand reads one JSON config (section per subcommand, defaults
for anything omitted), writes CSV files with a ``#`` metadata header and
exits 0 on success, 2 on an invalid config and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alphadecay import AlphaSystem, mass_number_scan, potential_components, transition_estimate
from .bloch3 import BlochDrive, TunnelRate, survival_under_drive
from .decayprofile import WavePacket, combined_profile, transition_numbers
from .phys import UNITS, EffectiveMass
from .potentials import PartiallyLinearPotential, SmoothDoubleBarrier, barrier_top, harmonic_fit
from .schrod1d import (
    FitError,
    bound_states,
    default_grid,
    fit_resonance,
    linear_ramp_late_time,
    refine_scan,
    resonance_poles,
)
from .wkb import bohr_sommerfeld_levels, exact_to_modified_ratio, width_semiclassical

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- configuration


@dataclass
class PotentialConfig:
    a: float = 5.0
    delta: float = 4.0
    v_w: float = 10.0
    b: float | None = None
    mass_ratio: float = 0.1

    def build(self) -> SmoothDoubleBarrier:
        return SmoothDoubleBarrier(a=self.a, delta=self.delta, v_w=self.v_w, b=self.b, mass=EffectiveMass(self.mass_ratio))


@dataclass
class LevelsConfig:
    E_window: list | None = None
    grid_h: float | None = None
    coarse_points: int = 400


@dataclass
class ProfileConfig:
    source: str = "exact"
    resonance_n: int = 6
    E_star: float | None = None
    Gamma_star: float | None = None
    x_offset: float = 1.0
    delta_nu: float = 1e9
    power: bool = True
    t_min_over_tp: float = 1e-3
    t_max_over_tp: float = 1e3
    n_times: int = 301


@dataclass
class BlochScenario:
    name: str
    mode: str = "cw"
    intensity: float = 1.0
    pulse_ns: float = 1.0
    power_enabled: bool = True


def _default_scenarios():
    return [
        BlochScenario("cw_10W", "cw", 10.0),
        BlochScenario("cw_1W", "cw", 1.0),
        BlochScenario("cw_1W_no_power", "cw", 1.0, power_enabled=False),
        BlochScenario("no_laser", "cw", 0.0),
        BlochScenario("pulse_1ns", "pulse", 1.0, 1.0),
        BlochScenario("pulse_10ns", "pulse", 1.0, 10.0),
    ]


@dataclass
class BlochConfig:
    Gamma_star: float = 1.3e-5
    dipole: float = 0.0124
    gamma12: float = 2.55e5
    detuning: float = 0.0
    switch_ns: float = 0.1
    prefactor: float = 0.02105
    t_min: float = 1e-12
    t_max: float = 1e-6
    n_times: int = 301
    tol: float = 1e-9
    tunnel_dephasing: bool = True
    scenarios: list = field(default_factory=_default_scenarios)


@dataclass
class DesignConfig:
    a_values: list = field(default_factory=lambda: [3.0, 4.0, 5.0, 6.0])
    delta_values: list = field(default_factory=lambda: [3.0, 4.0, 5.0])
    v_w_values: list = field(default_factory=lambda: [5.0, 10.0, 20.0])
    lifetime_min: float = 1e-9
    lifetime_max: float = 1e-3
    remnant_floor: float = 1e-10
    delta_nu: float = 1e9
    x_offset: float = 1.0
    width_method: str = "parabolic"
    level: int | None = None
    refine: bool = False
    refine_steps: int = 12


@dataclass
class WeberConfig:
    a_u: float = 2.0
    u_max: float = 10.0
    n_points: int = 161


@dataclass
class AlphaConfig:
    A: int = 212
    Z: int = 84
    Q: float = 8.78
    distance_m: float = 1.0
    delta_E: float | None = None
    r_values: list = field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0])
    A_values: list = field(default_factory=lambda: [100, 140, 180, 212, 240, 260])
    r_min_fm: float = 0.5
    r_max_fm: float = 40.0
    n_radii: int = 200


@dataclass
class RampConfig:
    a: float = 5.0
    v0: float = 20.0
    v1: float = 20.0
    slope: float = 10.0
    b: float | None = 7.0
    t_min: float = 1e-14
    t_max: float = 1e-12
    n_times: int = 21


@dataclass
class RunConfig:
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    levels: LevelsConfig = field(default_factory=LevelsConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    bloch: BlochConfig = field(default_factory=BlochConfig)
    design_search: DesignConfig = field(default_factory=DesignConfig)
    weber: WeberConfig = field(default_factory=WeberConfig)
    alpha: AlphaConfig = field(default_factory=AlphaConfig)
    ramp: RampConfig = field(default_factory=RampConfig)
    output_dir: str = "out"
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return _from_dict(cls, data, "config")

    def validate(self) -> None:
        """Build every model once so constructor invariants are checked up front."""
        try:
            self.potential.build()
            PartiallyLinearPotential(a=self.ramp.a, v0=self.ramp.v0, v1=self.ramp.v1, slope=self.ramp.slope, b=self.ramp.b)
            AlphaSystem(A=self.alpha.A, Z=self.alpha.Z, Q=self.alpha.Q, detection_r=self.alpha.distance_m)
            for s in self.bloch.scenarios:
                _drive(self.bloch, s)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        pr = self.profile
        if pr.source not in ("exact", "semiclassical", "given"):
            raise ConfigError("profile.source must be exact, semiclassical or given")
        if pr.source == "given" and (pr.E_star is None or pr.Gamma_star is None):
            raise ConfigError("profile.source = given needs E_star and Gamma_star")
        if not 0 < pr.t_min_over_tp < pr.t_max_over_tp or pr.n_times < 2:
            raise ConfigError("profile time window is invalid")
        if self.design_search.width_method not in ("parabolic", "quadrature"):
            raise ConfigError("design_search.width_method must be parabolic or quadrature")
        if self.levels.E_window is not None and len(self.levels.E_window) != 2:
            raise ConfigError("levels.E_window must be [lo, hi]")
        if not 0 < self.bloch.t_min < self.bloch.t_max:
            raise ConfigError("bloch time window is invalid")
        if not 0 < self.ramp.t_min < self.ramp.t_max:
            raise ConfigError("ramp time window is invalid")


def _from_dict(cls, data: dict, where: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    kwargs = {}
    defaults = cls() if cls is not BlochScenario else None
    for name, value in data.items():
        default = getattr(defaults, name) if defaults is not None else None
        if dataclasses.is_dataclass(default):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}.{name} must be an object")
            value = _from_dict(type(default), value, f"{where}.{name}")
        elif name == "scenarios":
            if not isinstance(value, list):
                raise ConfigError(f"{where}.scenarios must be a list")
            value = [_from_dict(BlochScenario, s, f"{where}.scenarios[{i}]") for i, s in enumerate(value)]
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return f"{float(v):.12g}"


def write_csv(path: Path, columns: list[str], rows, meta: dict) -> Path:
    """CSV with a metadata header; only the ``# generated`` line carries a timestamp."""
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"# generated: {stamp}", f"# dotdecay {__version__}"]
    lines += [f"# {k}: {json.dumps(v, sort_keys=True, default=str)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------- subcommands


def _exact_resonances(p: SmoothDoubleBarrier, cfg: RunConfig, window=None):
    """Poles refined by Breit-Wigner fits on a dense transmission scan."""
    h = cfg.levels.grid_h
    poles = resonance_poles(p, window, h)
    if not poles:
        return []
    bt = barrier_top(p)
    coarse = np.linspace(1e-3, bt.v_max, cfg.levels.coarse_points)
    h_scan = h if h is not None else default_grid(p, e_max=max(3.0, bt.v_max)).h
    scan = refine_scan(p, poles, coarse, h=h_scan)
    rng = np.random.default_rng(cfg.seed)
    out = []
    for pole in poles:
        half = 3.0 * pole.width
        fit = None
        for _ in range(4):
            try:
                fit = fit_resonance(scan, (pole.energy - half, pole.energy + half))
                break
            except FitError:
                half *= 1.0 + rng.uniform(0.2, 0.6)
        out.append((pole, fit))
    return out


def cmd_levels(cfg: RunConfig, out: Path) -> list[Path]:
    p = cfg.potential.build()
    bt = barrier_top(p)
    hf = harmonic_fit(p)
    window = cfg.levels.E_window
    lo, hi = (-math.inf, bt.v_max) if window is None else (float(window[0]), float(window[1]))
    rows = []
    if hi > lo:
        grid = default_grid(p, cfg.levels.grid_h)
        bound = [s for s in bound_states(p, grid) if lo <= s.energy <= hi]
        pole_window = (max(lo, 1e-6), min(hi, bt.v_max))
        exact = _exact_resonances(p, cfg, pole_window) if pole_window[1] > pole_window[0] else []
        entries = [(s.n, s.energy, 0.0, math.nan) for s in bound]
        for pole, fit in exact:
            entries.append((pole.n, pole.energy, pole.width, fit.gamma if fit else math.nan))
        ns = [e[0] for e in entries]
        bs = {r.n: r for r in bohr_sommerfeld_levels(p, ns)} if ns else {}
        for n, E, G, G_fit in entries:
            e_ho = float(hf.level(n))
            g_ho = 0.0
            if 0 < e_ho < bt.v_max:
                g_ho = width_semiclassical(p, e_ho, "parabolic", omega=hf.omega0)
            elif e_ho >= bt.v_max:
                g_ho = math.nan
            r = bs[n]
            rows.append((n, E, G, G_fit, e_ho, g_ho, r.energy, r.width, r.above_barrier))
    cols = ["n", "E_exact_eV", "Gamma_exact_eV", "Gamma_fit_eV", "E_HO_eV", "Gamma_HO_eV", "E_BS_eV", "Gamma_BS_eV", "BS_above_barrier"]
    meta = {"potential": dataclasses.asdict(cfg.potential), "window": window, "omega0": hf.omega0, "n0": hf.n0}
    return [write_csv(out / "levels.csv", cols, rows, meta)]


def _profile_source(cfg: RunConfig, p: SmoothDoubleBarrier):
    pr = cfg.profile
    if pr.source == "given":
        return pr.E_star, pr.Gamma_star
    if pr.source == "semiclassical":
        level = bohr_sommerfeld_levels(p, [pr.resonance_n])[0]
        if level.above_barrier or level.width <= 0:
            raise ValueError(f"level {pr.resonance_n} is not a sub-barrier resonance")
        return level.energy, level.width
    for pole in resonance_poles(p, None, cfg.levels.grid_h):
        if pole.n == pr.resonance_n:
            return pole.energy, pole.width
    raise ValueError(f"no resonance pole with n = {pr.resonance_n}")


def cmd_profile(cfg: RunConfig, out: Path) -> list[Path]:
    p = cfg.potential.build()
    pr = cfg.profile
    E_star, Gamma_star = _profile_source(cfg, p)
    params = transition_numbers(p, E_star, Gamma_star, WavePacket(delta_nu=pr.delta_nu), x_offset=pr.x_offset)
    t = params.t_p * np.logspace(math.log10(pr.t_min_over_tp), math.log10(pr.t_max_over_tp), pr.n_times)
    P, exp2, pow2 = combined_profile(params, t, power_enabled=pr.power)
    report = {
        "source": pr.source,
        "E_star_eV": E_star,
        "Gamma_star_eV": Gamma_star,
        "lifetime_s": params.lifetime,
        "X": params.X,
        "X_over_2": params.X / 2.0,
        "Y": params.Y,
        "xi": params.xi,
        "t_p_s": params.t_p * 1.0,
        "remnant": params.remnant,
        "power_coefficient": params.power_coefficient,
    }
    rep_rows = [(k, v) for k, v in report.items()]
    paths = [write_csv(out / "transition_report.csv", ["quantity", "value"], rep_rows, {"profile": dataclasses.asdict(pr)})]
    if pr.power:
        cols, rows = ["t_s", "P", "exp_part", "power_part"], zip(t, P, exp2, pow2)
    else:
        cols, rows = ["t_s", "P_exponential"], zip(t, exp2)
    paths.append(write_csv(out / "profile.csv", cols, rows, {"source": pr.source, "t_p_s": params.t_p}))
    return paths


def _drive(bc: BlochConfig, s: BlochScenario) -> BlochDrive:
    return BlochDrive(
        mode=s.mode,
        intensity=s.intensity,
        dipole=bc.dipole,
        detuning=bc.detuning,
        gamma12=bc.gamma12,
        T1=s.pulse_ns * 1e-9,
        Delta=bc.switch_ns * 1e-9,
    )


def _run_scenario(args):
    bc, s = args
    tr = TunnelRate(Gamma_star=bc.Gamma_star / UNITS.hbar, power_enabled=s.power_enabled, prefactor=bc.prefactor)
    t = np.logspace(math.log10(bc.t_min), math.log10(bc.t_max), bc.n_times)
    series = survival_under_drive(_drive(bc, s), tr, t, tol=bc.tol, tunnel_dephasing=bc.tunnel_dephasing)
    return s.name, t, series


def _parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_bloch(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    bc = cfg.bloch
    results = _parallel_map(_run_scenario, [(bc, s) for s in bc.scenarios], workers)
    paths = []
    cols = ["t_s", "s11", "s22", "s33", "re_s12", "im_s12", "survival"]
    for (name, t, se), s in zip(results, bc.scenarios):
        rows = zip(t, se.s11, se.s22, se.s33, se.s12.real, se.s12.imag, se.survival)
        meta = {"scenario": dataclasses.asdict(s), "Gamma_star_eV": bc.Gamma_star, "trace_error": se.trace_error}
        paths.append(write_csv(out / f"bloch_{name}.csv", cols, rows, meta))
    return paths


@dataclass(frozen=True)
class SweepResult:
    a: float
    delta: float
    v_w: float
    n: int
    E_star: float
    lifetime: float
    xi: float
    remnant: float
    omega_gamma: float
    feasible: bool


def _design_point(args) -> SweepResult:
    dc, a, delta, v_w, mass_ratio = args
    nan = math.nan
    try:
        p = SmoothDoubleBarrier(a=a, delta=delta, v_w=v_w, mass=EffectiveMass(mass_ratio))
        bt = barrier_top(p)
        hf = harmonic_fit(p)
    except ValueError:
        return SweepResult(a, delta, v_w, -1, nan, nan, nan, nan, nan, False)
    levels = [dc.level] if dc.level is not None else range(0, 200)
    best = None
    top_bound = None
    for n in levels:
        E = float(hf.level(n))
        if E >= bt.v_max:
            break
        if E <= 0:
            top_bound = E
            continue
        G = width_semiclassical(p, E, dc.width_method, omega=hf.omega0)
        try:
            tn = transition_numbers(p, E, G, WavePacket(delta_nu=dc.delta_nu), x_offset=dc.x_offset, omega0=hf.omega0)
            xi, rem = tn.xi, tn.remnant
        except ValueError:
            xi, rem = nan, nan
        life = UNITS.hbar / G if G > 0 else math.inf
        feasible = dc.lifetime_min <= life <= dc.lifetime_max and rem > dc.remnant_floor
        photon = E - top_bound if top_bound is not None else nan
        cand = SweepResult(a, delta, v_w, n, E, life, xi, rem, photon, bool(feasible))
        key = (cand.feasible, cand.remnant if math.isfinite(cand.remnant) else -1.0)
        if best is None or key > (best.feasible, best.remnant if math.isfinite(best.remnant) else -1.0):
            best = cand
    if best is None:
        return SweepResult(a, delta, v_w, -1, nan, nan, nan, nan, nan, False)
    return best


def design_point(dc: DesignConfig, a: float, delta: float, v_w: float, mass_ratio: float = 0.1) -> SweepResult:
    """Harmonic-level pipeline for one (a, delta, V_w) cell."""
    return _design_point((dc, a, delta, v_w, mass_ratio))


def _refine(dc: DesignConfig, start: SweepResult, mass_ratio: float) -> SweepResult:
    """Coordinate descent on (a, delta, V_w) maximising the remnant among feasible points."""
    best = start
    steps = [0.25 * start.a, 0.25 * start.delta, 0.25 * start.v_w]
    for _ in range(dc.refine_steps):
        improved = False
        for k in range(3):
            for sign in (1.0, -1.0):
                x = [best.a, best.delta, best.v_w]
                x[k] += sign * steps[k]
                if min(x) <= 0:
                    continue
                cand = design_point(dc, *x, mass_ratio)
                if cand.feasible and cand.remnant > best.remnant:
                    best, improved = cand, True
        if not improved:
            steps = [0.5 * s for s in steps]
    return best


def cmd_design_search(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    dc = cfg.design_search
    cells = [(dc, a, d, v, cfg.potential.mass_ratio) for a in dc.a_values for d in dc.delta_values for v in dc.v_w_values]
    results = _parallel_map(_design_point, cells, workers)
    cols = [f.name for f in dataclasses.fields(SweepResult)]
    paths = [write_csv(out / "design_search.csv", cols, [dataclasses.astuple(r) for r in results], {"design_search": dataclasses.asdict(dc)})]
    if dc.refine:
        refined = [_refine(dc, r, cfg.potential.mass_ratio) for r in results if r.feasible]
        paths.append(write_csv(out / "design_refined.csv", cols, [dataclasses.astuple(r) for r in refined], {"refine_steps": dc.refine_steps}))
    return paths


def cmd_weber(cfg: RunConfig, out: Path) -> list[Path]:
    wc = cfg.weber
    u = np.linspace(1.05 * wc.a_u, wc.u_max, wc.n_points)
    with_ln = exact_to_modified_ratio(wc.a_u, u, ln_term=True)
    without = exact_to_modified_ratio(wc.a_u, u, ln_term=False)
    rows = zip(u, with_ln.real, with_ln.imag, np.abs(with_ln), without.real, without.imag, np.abs(without))
    cols = ["u", "re_ratio", "im_ratio", "abs_ratio", "re_ratio_no_ln", "im_ratio_no_ln", "abs_ratio_no_ln"]
    return [write_csv(out / "weber_ratio.csv", cols, rows, {"a_u": wc.a_u})]


def cmd_alpha(cfg: RunConfig, out: Path) -> list[Path]:
    ac = cfg.alpha
    sys_ = AlphaSystem(A=ac.A, Z=ac.Z, Q=ac.Q, detection_r=ac.distance_m)
    r = np.linspace(ac.r_min_fm, ac.r_max_fm, ac.n_radii)
    comp = potential_components(sys_, r)
    paths = [write_csv(out / "alpha_potential.csv", ["r_fm", "woods_saxon_MeV", "coulomb_MeV", "total_MeV"], comp, {"A": ac.A, "Z": ac.Z})]
    rows = []
    for dist in ac.r_values:
        tr = transition_estimate(sys_, ac.delta_E, r=dist)
        rows.append((dist, tr.rhs, tr.xi, tr.remnant, tr.delta_E, tr.calibrated))
    paths.append(write_csv(out / "alpha_xi_r.csv", ["r_m", "rhs", "xi", "remnant", "delta_E_MeV", "delta_E_calibrated"], rows, {"Q_MeV": ac.Q}))
    scan, term_slope, xi_slope = mass_number_scan(ac.A_values, sys_, ac.delta_E)
    cols = ["A", "Z", "R_fm", "mr2_term", "xi_mr2", "V_m_MeV", "xi_full"]
    paths.append(write_csv(out / "alpha_xi_A.csv", cols, [dataclasses.astuple(row) for row in scan], {"term_slope": term_slope, "xi_slope": xi_slope}))
    return paths


def cmd_ramp(cfg: RunConfig, out: Path) -> list[Path]:
    rc = cfg.ramp
    p = PartiallyLinearPotential(a=rc.a, v0=rc.v0, v1=rc.v1, slope=rc.slope, b=rc.b)
    t = np.logspace(math.log10(rc.t_min), math.log10(rc.t_max), rc.n_times)
    late = linear_ramp_late_time(p, t_grid=t)
    rows = zip(late.t, late.probability, late.saddle_energy, late.gaussian_width)
    return [write_csv(out / "ramp_late_time.csv", ["t_s", "probability", "saddle_energy_eV", "gaussian_width"], rows, {"ramp": dataclasses.asdict(rc)})]


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dotdecay", description="Resonance decay and power-law tails in quantum dots.")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("levels", help="exact, harmonic and Bohr-Sommerfeld levels")
    prof = sub.add_parser("profile", help="transition numbers and decay profile")
    prof.add_argument("--source", choices=["exact", "semiclassical", "given"])
    prof.add_argument("--no-power", action="store_true", help="exponential part only")
    bl = sub.add_parser("bloch", help="laser-driven three-level survival")
    bl.add_argument("--intensity", type=float, help="run a single scenario at this intensity (W/cm^2)")
    bl.add_argument("--pulse-ns", type=float, help="pulse duration for the single scenario; CW when omitted")
    bl.add_argument("--no-power", action="store_true")
    sub.add_parser("design-search", help="feasibility sweep over dot parameters")
    sub.add_parser("weber", help="exact versus modified barrier wave")
    al = sub.add_parser("alpha", help="alpha-decay potential and transition estimate")
    al.add_argument("--distance-m", type=float)
    sub.add_parser("ramp", help="late-time probability beyond a linear ramp")
    sub.add_parser("dump-config", help="write the default config as JSON")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> None:
    if args.out:
        cfg.output_dir = args.out
    if args.command == "profile":
        if args.source:
            cfg.profile.source = args.source
        if args.no_power:
            cfg.profile.power = False
    if args.command == "bloch" and (args.intensity is not None or args.pulse_ns is not None or args.no_power):
        intensity = args.intensity if args.intensity is not None else 1.0
        mode = "pulse" if args.pulse_ns is not None else "cw"
        pulse = args.pulse_ns if args.pulse_ns is not None else 1.0
        cfg.bloch.scenarios = [BlochScenario("custom", mode, intensity, pulse, not args.no_power)]
    if args.command == "alpha" and args.distance_m is not None:
        cfg.alpha.distance_m = args.distance_m


COMMANDS = {
    "levels": lambda cfg, out, w: cmd_levels(cfg, out),
    "profile": lambda cfg, out, w: cmd_profile(cfg, out),
    "bloch": cmd_bloch,
    "design-search": cmd_design_search,
    "weber": lambda cfg, out, w: cmd_weber(cfg, out),
    "alpha": lambda cfg, out, w: cmd_alpha(cfg, out),
    "ramp": lambda cfg, out, w: cmd_ramp(cfg, out),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    if args.command == "dump-config":
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    try:
        paths = COMMANDS[args.command](cfg, out, args.workers)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    return EXIT_OK

"""Command-line front end: runs, sweeps, fits, collapse, temporal, rg, oracle.

Every data-producing subcommand writes atomically into --out and emits a
manifest echoing the fully resolved configuration, so any artifact can be
regenerated from its manifest alone.  Exit codes: 0 ok, 2 bad config or
usage, 3 numerical failure, 4 i/o failure.

Precedence for seed/out/workers/quiet: flag > HITLAB_* env var > config
file > default.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys

import numpy as np

from . import __version__
from . import presets
from .errors import ConfigError, HitlabError
from .config import load_config, resolved_defaults
from .spectra import SpectralState, initial_spectrum, diagnostics
from .closure import ClosureParams, transfer_spectrum
from .evolve import ForcingSpec, run_decay, run_forced
from .flux import flux_profile
from .dissipation import (SweepBase, SweepRecord, SweepRow, fit_asymptote,
                          fit_line, ladder_grid, run_sweep)
from .scaling import collapse_error, k62_rescale, kolmogorov_rescale
from .realspace import default_r_nodes, khe_residual, structure_functions
from .temporal import ensemble_spectrum, inertial_band_modes, slope_fit
from .rg import RgConfig, iterate_to_fixed_point
from .rg import sweep as rg_sweep
from .reference import (ChannelFlowCase, batchelor_limit_table,
                        poiseuille_dissipation, poiseuille_profile,
                        pressure_work)
from .io import read_csv_columns, write_csv, write_json, write_manifest

# DNS reference constants for the dissipation law, printed next to our fit
DNS_C_INF = (0.468, 0.006)
DNS_C = (18.9, 1.3)


def _grid_hash(grid) -> str:
    return hashlib.sha256(grid.nodes.tobytes()).hexdigest()[:16]


def _env(name, cast, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name}={raw!r} is not a valid {cast.__name__}")


def _settings(args, cfg):
    """Resolve seed/out/workers/quiet with flag > env > config precedence."""
    seed = args.seed if args.seed is not None else _env("HITLAB_SEED", int, cfg["seed"])
    out = args.out if args.out is not None else _env("HITLAB_OUT", str, cfg["out"])
    workers = (args.workers if args.workers is not None
               else _env("HITLAB_WORKERS", int, cfg["workers"]))
    quiet = args.quiet or _env("HITLAB_QUIET", bool, cfg["quiet"])
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    cfg = dict(cfg)
    cfg.update(seed=int(seed), out=str(out), workers=int(workers), quiet=bool(quiet))
    return cfg


def _load(args):
    cfg = load_config(args.config) if args.config else resolved_defaults()
    return _settings(args, cfg)


def _say(cfg, text):
    if not cfg["quiet"]:
        print(text)


def _run_grid(cfg, nu, eps_guess):
    g = cfg["grid"]
    if g["k_max"] > 0.0:
        k_top = g["k_max"]
    else:
        k_top = g["kmax_over_kd"] * (eps_guess / nu ** 3) ** 0.25
    return ladder_grid(g["k_min"], g["nodes_per_decade"], k_top)


def _forcing(cfg) -> ForcingSpec | None:
    f = cfg["forcing"]
    if f["mode"] == "none" or f["injection_rate"] == 0.0:
        return None
    band_bottom = 0.0
    if f["band_bottom"] > 0.0:
        band_bottom = f["band_bottom"]
    return ForcingSpec(band_top=f["band_top"], injection_rate=f["injection_rate"],
                       band_bottom=band_bottom)


def _write_run(cfg, out_dir, record, extras=()):
    os.makedirs(out_dir, exist_ok=True)
    st = record.final_state
    ts_path = os.path.join(out_dir, "timeseries.csv")
    write_csv(ts_path, ["t", "E_tot", "eps", "Pi_max", "R_lambda", "C_eps"],
              [(s.t, s.total_energy, s.dissipation, s.flux_max,
                s.taylor_reynolds, s.c_epsilon) for s in record.samples])
    sp_path = os.path.join(out_dir, "spectrum.csv")
    write_csv(sp_path, ["k", "E", "nu", "t"],
              [(k, e, st.nu, st.t) for k, e in zip(st.grid.nodes, st.E)])
    outputs = [ts_path, sp_path] + list(extras)
    man_path = os.path.join(out_dir, "manifest.json")
    write_manifest(man_path, cfg, outputs + [man_path], seed=cfg["seed"],
                   extra={"grid_sha256": _grid_hash(st.grid),
                          "stationary": record.stationarity_flag,
                          "t_end": st.t, "n_steps": record.n_steps})
    return outputs + [man_path]


def _flux_csv(path, state, params):
    """Per-node-cutoff flux table; kappa is the interface above each node."""
    fl = flux_profile(transfer_spectrum(state, params))
    star_idx = None
    if fl.k_star is not None:
        star_idx = state.grid.nearest_index(fl.k_star)
    rows = []
    for i in range(state.grid.n_bins):
        rows.append((fl.kappa[i + 1], fl.Pi[i + 1], fl.Pi_minus_plus[i + 1],
                     fl.T[i], 1 if i == star_idx else 0))
    return write_csv(path, ["kappa", "Pi", "Pi_minus_plus", "T", "k_star_flag"], rows)


def _khe_csv(out_dir, record, params, forcing, r_per_decade):
    """Structure-function and KHE-balance tables from the last two snapshots."""
    if len(record.spectra) < 2:
        raise ConfigError("khe output needs keep_spectra = true and >= 2 samples")
    s_a, s_b = record.spectra[-2], record.spectra[-1]
    mid = s_a.with_spectrum(0.5 * (s_a.E + s_b.E), t=0.5 * (s_a.t + s_b.t))
    tr = transfer_spectrum(mid, params)
    d = diagnostics(mid)
    r = default_r_nodes(mid.grid, per_decade=r_per_decade)
    resolved = (r >= 2.0 * np.pi / mid.grid.k_max) & (r <= 2.0 * np.pi / mid.grid.k_min)
    r = r[resolved]
    rep = khe_residual(s_a, s_b, tr, r, forcing=forcing)
    sf = structure_functions(mid, transfer=tr, r_nodes=r)
    U, L = d.rms_velocity, d.integral_scale
    sf_path = os.path.join(out_dir, "structure.csv")
    write_csv(sf_path, ["r", "S2", "S3", "x", "f2", "f3"],
              [(ri, s2, s3, ri / L, s2 / U ** 2, s3 / U ** 3)
               for ri, s2, s3 in zip(sf.r, sf.S2, sf.S3)])
    khe_path = os.path.join(out_dir, "khe.csv")
    write_csv(khe_path,
              ["r", "term_E", "term_dS2dt", "term_S3", "term_visc", "residual"],
              list(zip(rep.r, rep.term_energy, rep.term_ds2dt, rep.term_s3,
                       rep.term_viscous, rep.residual)))
    return [sf_path, khe_path]


def cmd_forced(args) -> int:
    cfg = _load(args)
    run = cfg["run"]
    nu = run["nu"]
    grid = _run_grid(cfg, nu, max(cfg["forcing"]["injection_rate"], 1e-30))
    state = initial_spectrum(grid, peak_wavenumber=cfg["initial"]["peak_wavenumber"],
                             energy=cfg["initial"]["energy"], nu=nu)
    params = ClosureParams(damping_constant=cfg["closure"]["damping_constant"])
    forcing = _forcing(cfg)
    if forcing is None:
        raise ConfigError("forcing.mode: forced run requires a forcing band")
    keep = run["keep_spectra"] or args.khe
    record = run_forced(state, params, forcing, max_time=run["max_time"],
                        safety=run["safety"], sample_every=run["sample_every"],
                        stationarity_rtol=run["stationarity_rtol"],
                        keep_spectra=keep)
    extras = []
    if args.flux:
        extras.append(_flux_csv(os.path.join(cfg["out"], "flux.csv"),
                                record.final_state, params))
    if args.khe:
        extras.extend(_khe_csv(cfg["out"], record, params, forcing,
                               cfg["khe"]["r_per_decade"]))
    files = _write_run(cfg, cfg["out"], record, extras)
    d = diagnostics(record.final_state)
    _say(cfg, f"forced run: stationary={record.stationarity_flag} "
              f"t_end={record.final_state.t:.4g} R_lambda={d.taylor_reynolds:.4g}")
    _say(cfg, "wrote: " + ", ".join(files))
    return 0


def cmd_decay(args) -> int:
    cfg = _load(args)
    run = cfg["run"]
    nu = run["nu"]
    # size the grid from the peak dissipation estimate of the initial state
    U0 = np.sqrt(2.0 * cfg["initial"]["energy"] / 3.0)
    eps_guess = 0.5 * U0 ** 3 * cfg["initial"]["peak_wavenumber"]
    grid = _run_grid(cfg, nu, eps_guess)
    state = initial_spectrum(grid, peak_wavenumber=cfg["initial"]["peak_wavenumber"],
                             energy=cfg["initial"]["energy"], nu=nu)
    params = ClosureParams(damping_constant=cfg["closure"]["damping_constant"])
    keep = run["keep_spectra"] or args.khe
    record = run_decay(state, params, run["t_end"], safety=run["safety"],
                       sample_every=run["sample_every"], keep_spectra=keep)
    extras = []
    if args.flux:
        extras.append(_flux_csv(os.path.join(cfg["out"], "flux.csv"),
                                record.final_state, params))
    if args.khe:
        extras.extend(_khe_csv(cfg["out"], record, params, None,
                               cfg["khe"]["r_per_decade"]))
    files = _write_run(cfg, cfg["out"], record, extras)
    d = diagnostics(record.final_state)
    _say(cfg, f"decay run: t_end={record.final_state.t:.4g} "
              f"R_lambda={d.taylor_reynolds:.4g} eps={d.dissipation:.4g}")
    _say(cfg, "wrote: " + ", ".join(files))
    return 0


def _sweep_base(cfg) -> SweepBase:
    return SweepBase(k_min=cfg["grid"]["k_min"],
                     band_top=cfg["forcing"]["band_top"],
                     band_bottom=cfg["forcing"]["band_bottom"],
                     injection_rate=cfg["forcing"]["injection_rate"],
                     nodes_per_decade=cfg["grid"]["nodes_per_decade"],
                     kmax_over_kd=cfg["grid"]["kmax_over_kd"],
                     initial_energy=cfg["initial"]["energy"],
                     initial_peak=cfg["initial"]["peak_wavenumber"],
                     damping_constant=cfg["closure"]["damping_constant"],
                     safety=cfg["run"]["safety"],
                     max_time=cfg["sweep"]["max_time"],
                     stationarity_rtol=cfg["run"]["stationarity_rtol"],
                     sample_every=cfg["run"]["sample_every"])


def cmd_sweep(args) -> int:
    cfg = _load(args)
    nu_list = cfg["sweep"]["nu_list"]
    if not nu_list:
        raise ConfigError("sweep.nu_list: a sweep needs at least one viscosity")
    record = run_sweep(_sweep_base(cfg), nu_list, workers=cfg["workers"])
    os.makedirs(cfg["out"], exist_ok=True)
    sweep_path = os.path.join(cfg["out"], "sweep.csv")
    write_csv(sweep_path, ["nu", "eps_W", "R_L", "R_lambda", "C_eps", "Pi_ratio"],
              [(r.nu, r.eps_w, r.R_L, r.R_lambda, r.C_eps, r.Pi_max_over_eps)
               for r in record.rows])
    spectra = []
    for row, st in zip(record.rows, record.states):
        p = os.path.join(cfg["out"], f"spectrum_nu{row.nu:g}.csv")
        write_csv(p, ["k", "E", "nu", "t"],
                  [(k, e, st.nu, st.t) for k, e in zip(st.grid.nodes, st.E)])
        spectra.append(p)
    man = os.path.join(cfg["out"], "manifest.json")
    write_manifest(man, cfg, [sweep_path] + spectra + [man], seed=cfg["seed"])
    _say(cfg, f"sweep: {len(record.rows)} stationary rows, "
              f"R_L {record.rows[0].R_L:.3g}..{record.rows[-1].R_L:.3g}")
    _say(cfg, "wrote: " + ", ".join([sweep_path] + spectra + [man]))
    return 0


def cmd_fit(args) -> int:
    cfg = _load(args)
    sweep_path = args.sweep_csv or os.path.join(cfg["out"], "sweep.csv")
    cols = read_csv_columns(sweep_path)
    rows = tuple(SweepRow(nu=n, eps_w=w, R_L=rl, R_lambda=rlam, C_eps=c,
                          Pi_max_over_eps=p, stationarity_flag=True,
                          n_bins=0, k_max=0.0, t_end=0.0)
                 for n, w, rl, rlam, c, p in zip(cols["nu"], cols["eps_W"],
                                                 cols["R_L"], cols["R_lambda"],
                                                 cols["C_eps"], cols["Pi_ratio"]))
    record = SweepRecord(base=_sweep_base(cfg), rows=rows, states=())
    fit = fit_asymptote(record, quadratic=args.quadratic)
    os.makedirs(cfg["out"], exist_ok=True)
    fit_path = os.path.join(cfg["out"], "fit.json")
    write_json(fit_path, {
        "C_eps_inf": fit.C_eps_inf, "C": fit.C_slope,
        "stderrs": list(fit.stderr), "r2": fit.r_squared,
        "n_points": fit.n_points, "quadratic": fit.quadratic,
        "dns_reference": {"C_eps_inf": DNS_C_INF, "C": DNS_C},
    })
    R = [r.R_L for r in rows]
    xs, ys = fit_line(fit, min(R), max(R), n=100)
    line_path = os.path.join(cfg["out"], "fitline.csv")
    write_csv(line_path, ["inv_R_L", "C_eps_fit"],
              list(zip(1.0 / xs, ys)))
    man = os.path.join(cfg["out"], "fit_manifest.json")
    write_manifest(man, cfg, [fit_path, line_path, man], seed=cfg["seed"],
                   extra={"sweep_csv": str(sweep_path)})
    _say(cfg, f"fit: C_eps = {fit.C_eps_inf:.4g} + {fit.C_slope:.4g}/R_L "
              f"(r^2 = {fit.r_squared:.4f}, n = {fit.n_points})")
    _say(cfg, f"DNS reference: C_eps_inf = {DNS_C_INF[0]} +- {DNS_C_INF[1]}, "
              f"C = {DNS_C[0]} +- {DNS_C[1]}")
    _say(cfg, "wrote: " + ", ".join([fit_path, line_path, man]))
    return 0


def _load_spectrum_csv(path) -> SpectralState:
    from .grid import make_grid

    cols = read_csv_columns(path)
    k = cols["k"]
    grid = make_grid(float(k[0]), float(k[-1]), len(k))
    if not np.allclose(grid.nodes, k, rtol=1e-9):
        raise ConfigError(f"{path}: nodes are not log-uniform")
    return SpectralState(grid=grid, E=cols["E"], nu=float(cols["nu"][0]),
                         t=float(cols["t"][0]))


def cmd_collapse(args) -> int:
    cfg = _load(args)
    mode = args.mode or cfg["collapse"]["mode"]
    mu = args.mu if args.mu is not None else cfg["collapse"]["mu"]
    states = [_load_spectrum_csv(p) for p in args.spectra]
    if len(states) < 2:
        raise ConfigError("collapse needs at least two spectrum files")
    labels = [os.path.splitext(os.path.basename(p))[0] for p in args.spectra]
    factor = cfg["collapse"]["external_scale_factor"]
    ext = None
    if mode == "k62":
        ext = [factor * 2.0 * np.pi / s.grid.k_min for s in states]
    report = collapse_error(states, mode=mode.upper(), mu=mu,
                            external_scales=ext, labels=labels)
    os.makedirs(cfg["out"], exist_ok=True)
    rows = []
    for label, st in zip(labels, states):
        resc = (kolmogorov_rescale(st) if mode == "k41"
                else k62_rescale(st, mu=mu,
                                 external_scale=factor * 2.0 * np.pi / st.grid.k_min))
        rows.extend((label, kh, eh) for kh, eh in zip(resc.k_hat, resc.E_hat))
    csv_path = os.path.join(cfg["out"], "collapse.csv")
    write_csv(csv_path, ["run_id", "k_hat", "E_hat"], rows)
    json_path = os.path.join(cfg["out"], "collapse.json")
    write_json(json_path, report.as_dict())
    man = os.path.join(cfg["out"], "collapse_manifest.json")
    write_manifest(man, cfg, [csv_path, json_path, man], seed=cfg["seed"],
                   extra={"inputs": [str(p) for p in args.spectra]})
    _say(cfg, f"collapse[{mode}]: error = {report.collapse_error:.4f} over "
              f"window [{report.window[0]:.3g}, {report.window[1]:.3g}]")
    _say(cfg, "wrote: " + ", ".join([csv_path, json_path, man]))
    return 0


def cmd_temporal(args) -> int:
    cfg = _load(args)
    t = cfg["temporal"]
    config = inertial_band_modes(mode=t["mode"], k_lo=t["k_lo"], k_hi=t["k_hi"],
                                 n_modes=t["n_modes"], epsilon=t["epsilon"],
                                 sweep_velocity=t["sweep_velocity"],
                                 n_realizations=t["n_realizations"],
                                 seed=cfg["seed"], broadening=t["broadening"])
    spectrum = ensemble_spectrum(config, window=t["window"],
                                 workers=cfg["workers"])
    window = presets.temporal_window(t["mode"], config.mode_rates())
    fit = slope_fit(spectrum, window)
    os.makedirs(cfg["out"], exist_ok=True)
    csv_path = os.path.join(cfg["out"], "temporal.csv")
    write_csv(csv_path, ["omega", "phi"], list(zip(spectrum.omega, spectrum.phi)))
    json_path = os.path.join(cfg["out"], "temporal.json")
    write_json(json_path, {
        "mode": t["mode"], "slope": fit.slope, "stderr": fit.stderr,
        "window": list(fit.window), "n_realizations": t["n_realizations"],
        "seed": cfg["seed"],
        "variance_integral": spectrum.variance_integral,
        "variance_target": spectrum.variance_target,
    })
    man = os.path.join(cfg["out"], "temporal_manifest.json")
    write_manifest(man, cfg, [csv_path, json_path, man], seed=cfg["seed"])
    _say(cfg, f"temporal[{t['mode']}]: slope = {fit.slope:.3f} +- {fit.stderr:.3f}")
    _say(cfg, "wrote: " + ", ".join([csv_path, json_path, man]))
    return 0


def cmd_rg(args) -> int:
    cfg = _load(args)
    r = cfg["rg"]
    base = RgConfig(h=r["h"], nu0=r["nu0"], amplitude=r["amplitude"],
                    tolerance=r["tolerance"])
    os.makedirs(cfg["out"], exist_ok=True)
    state, report = iterate_to_fixed_point(base)
    trace_path = os.path.join(cfg["out"], "rg_trace.csv")
    write_csv(trace_path, ["n", "k_n", "nu_n", "nu_tilde"], list(state.history))
    files = [trace_path]
    doc = {"h": report.h, "eta": report.eta, "nu_tilde_star": report.nu_tilde_star,
           "alpha": report.alpha, "iterations": report.iterations}
    if r["h_list"]:
        rows = rg_sweep(base, r["h_list"])
        sweep_path = os.path.join(cfg["out"], "rg_sweep.csv")
        write_csv(sweep_path, ["h", "eta", "nu_tilde_star", "alpha", "iterations"],
                  [(x["h"], x["eta"], x["nu_tilde_star"], x["alpha"], x["iterations"])
                   for x in rows])
        files.append(sweep_path)
        doc["sweep"] = rows
    json_path = os.path.join(cfg["out"], "rg.json")
    write_json(json_path, doc)
    files.append(json_path)
    man = os.path.join(cfg["out"], "rg_manifest.json")
    write_manifest(man, cfg, files + [man], seed=cfg["seed"])
    _say(cfg, f"rg: h={report.h} nu_tilde*={report.nu_tilde_star:.6f} "
              f"alpha={report.alpha:.3f} ({report.iterations} iterations)")
    _say(cfg, "wrote: " + ", ".join(files + [man]))
    return 0


def cmd_oracle(args) -> int:
    if args.which == "poiseuille":
        case = ChannelFlowCase.from_bulk_velocity(args.U, args.mu, args.h)
        eps = poiseuille_dissipation(case)
        work = pressure_work(case, case.flow_rate)
        print(f"plane channel: P = {case.pressure_gradient:.12g}, "
              f"mu = {case.dynamic_viscosity:.12g}, h = {case.half_height:.12g}, "
              f"U = {case.bulk_velocity:.12g}")
        print(f"u(0) centerline = {poiseuille_profile(case, 0.0):.12g} (= 1.5 U)")
        print(f"u(+-h) walls    = {poiseuille_profile(case, case.half_height):.12g}")
        print(f"dissipation eps = 6 mu U^2 / h = {eps:.12g}")
        print(f"pressure work QP = {work:.12g} (QP/eps = {work / eps:.12g})")
    else:
        nus = [args.nu_start / args.step ** i for i in range(args.n)]
        table = batchelor_limit_table(args.eps, nus)
        print("fixed eps = %g; k_d = (eps/nu^3)^(1/4)" % args.eps)
        for nu, kd in table:
            print(f"nu = {nu:.6g}   k_d = {kd:.6g}")
        lg = np.polyfit(np.log([r[0] for r in table]),
                        np.log([r[1] for r in table]), 1)[0]
        print(f"log-log slope d ln k_d / d ln nu = {lg:.12g} (exact -3/4)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hitlab",
                                description="spectral closure laboratory for "
                                            "homogeneous isotropic turbulence")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML config file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--workers", type=int, help="parallel worker count")
        sp.add_argument("--quiet", action="store_true", help="suppress chatter")

    sp = sub.add_parser("forced", help="forced run to stationarity")
    common(sp)
    sp.add_argument("--flux", action="store_true", help="also write flux.csv")
    sp.add_argument("--khe", action="store_true",
                    help="also write structure.csv and khe.csv")
    sp.set_defaults(func=cmd_forced)

    sp = sub.add_parser("decay", help="freely decaying run")
    common(sp)
    sp.add_argument("--flux", action="store_true", help="also write flux.csv")
    sp.add_argument("--khe", action="store_true",
                    help="also write structure.csv and khe.csv")
    sp.set_defaults(func=cmd_decay)

    sp = sub.add_parser("sweep", help="viscosity sweep of stationary runs")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("fit", help="fit C_eps = C_inf + C/R_L to a sweep")
    common(sp)
    sp.add_argument("--sweep-csv", help="sweep table (default: <out>/sweep.csv)")
    sp.add_argument("--quadratic", action="store_true",
                    help="add a 1/R_L^2 term")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("collapse", help="rescaled-spectrum collapse report")
    common(sp)
    sp.add_argument("spectra", nargs="+", help="spectrum CSV files")
    sp.add_argument("--mode", choices=["k41", "k62"])
    sp.add_argument("--mu", type=float, help="intermittency exponent for k62")
    sp.set_defaults(func=cmd_collapse)

    sp = sub.add_parser("temporal", help="kinematic frequency-spectrum ensemble")
    common(sp)
    sp.set_defaults(func=cmd_temporal)

    sp = sub.add_parser("rg", help="recursive viscosity elimination")
    common(sp)
    sp.set_defaults(func=cmd_rg)

    sp = sub.add_parser("oracle", help="closed-form reference identities")
    orc = sp.add_subparsers(dest="which", required=True)
    po = orc.add_parser("poiseuille", help="plane channel identities")
    po.add_argument("--mu", type=float, default=1.0)
    po.add_argument("--U", type=float, default=1.0)
    po.add_argument("--h", type=float, default=1.0)
    ba = orc.add_parser("batchelor", help="dissipation-wavenumber table")
    ba.add_argument("--eps", type=float, default=1.0)
    ba.add_argument("--nu-start", type=float, default=1.0)
    ba.add_argument("--step", type=float, default=4.0)
    ba.add_argument("--n", type=int, default=6)
    sp.set_defaults(func=cmd_oracle)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HitlabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

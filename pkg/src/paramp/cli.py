"""Command-line front end: ``paramp <task> --config FILE --out DIR``.

Exit codes: 0 success, 2 configuration error, 3 solver failure (partial
output with flagged rows is still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__
from . import circuits
from . import config as cfgmod
from .depletion import compression_line, compression_point, solve_rho, sweep_signal
from .errors import ConfigError, MarginallyStable, ParampError
from .fluctuations import (
    assemble_fokker_planck,
    gaussian_wigner_grid,
    quadrature_coordinates,
    steady_covariance,
)
from .model import (
    TWO_PI,
    AmplifierModel,
    DriveConditions,
    ModeParams,
    dbm_to_flux,
    effective_coupling,
    flux_to_dbm,
    pump_amplitude_for_rho,
    reduced_coupling,
    rho_for_gain,
)
from .scattering import dpa_scattering, ndpa_scattering, quadrature_gains
from .semiclassical import (
    default_signal_phase,
    max_output_before_oscillation,
    np_threshold_photons,
    oscillation_threshold,
    steady_states,
)
from .wigner_mc import EnsembleConfig, histogram2d, output_flux_estimate, quadrature_kurtosis, sample_covariance, simulate

log = logging.getLogger("paramp")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


# --------------------------------------------------------------------------
# output


class Outputs:
    """Collects artifacts in memory; a single writer flushes them at the end."""

    def __init__(self):
        self.files = {}
        self.failures = 0

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        self.files[name] = buf.getvalue()

    def matrix(self, name, data, axes, comments=()):
        """Whitespace matrix with ``# axis`` headers (rows follow the y axis)."""
        lines = []
        for label, values in axes:
            values = np.asarray(values, dtype=float)
            lines.append(f"# axis {label} {_fmt(values[0])} {_fmt(values[-1])} {len(values)}")
        lines.extend(f"# {c}" for c in comments)
        for row in np.asarray(data, dtype=float):
            lines.append(" ".join(_fmt(v) for v in row))
        self.files[name] = "\n".join(lines) + "\n"

    def flush(self, out_dir, manifest):
        os.makedirs(out_dir, exist_ok=True)
        digests = {}
        for name in sorted(self.files):
            data = self.files[name].encode()
            digests[name] = hashlib.sha256(data).hexdigest()
            with open(os.path.join(out_dir, name), "wb") as fh:
                fh.write(data)
        manifest = dict(manifest, files=digests, failures=self.failures)
        with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return "" if v is None else v


# --------------------------------------------------------------------------
# configuration to domain objects


def build_model(cfg) -> AmplifierModel:
    m = cfg["model"]
    signal = ModeParams.from_hz(m["signal_frequency_hz"], m["signal_kappa_hz"])
    g = TWO_PI * m["coupling_hz"]
    if m["topology"] == "degenerate":
        f_pump = m["pump_frequency_hz"] or 2.0 * m["signal_frequency_hz"]
        return AmplifierModel("degenerate", signal, ModeParams.from_hz(f_pump, m["pump_kappa_hz"]), g)
    idler = ModeParams.from_hz(m["idler_frequency_hz"], m["idler_kappa_hz"])
    f_pump = m["pump_frequency_hz"] or m["signal_frequency_hz"] + m["idler_frequency_hz"]
    return AmplifierModel(
        "non-degenerate", signal, ModeParams.from_hz(f_pump, m["pump_kappa_hz"]), g, idler=idler
    )


def pump_amplitudes(cfg, model):
    """(label, value, |c_in|) for every configured pump setting."""
    d = cfg["drive"]
    out = []
    for v in d["pump_values"]:
        if d["pump_by"] == "gain_db":
            amp = pump_amplitude_for_rho(model, rho_for_gain(10.0 ** (v / 10.0)))
        elif d["pump_by"] == "rho0":
            amp = pump_amplitude_for_rho(model, v)
        else:
            amp = math.sqrt(float(dbm_to_flux(v, model.resonant_pump_frequency)))
        out.append((f"{d['pump_by']}_{v:g}", v, amp))
    return out


def signal_phase(cfg, model):
    p = cfg["drive"]["signal_phase"]
    return default_signal_phase(model) if p is None else p


def make_drive(cfg, model, amp, signal_flux=0.0):
    return DriveConditions.resonant(
        model, amp, signal_flux=signal_flux, pump_phase=cfg["drive"]["pump_phase"],
        signal_phase=signal_phase(cfg, model),
    )


def _pump_col(cfg):
    return "pump_" + cfg["drive"]["pump_by"]


def _signal_dbm(cfg):
    return cfgmod.sweep_values(cfg["drive"]["signal_power_dbm"])


# --------------------------------------------------------------------------
# tasks


def task_scatter(cfg, out: Outputs):
    model = build_model(cfg)
    detunings = cfgmod.sweep_values(cfg["drive"]["signal_detuning_hz"])
    header = [_pump_col(cfg), "detuning_hz", "gain_ss_db", "gain_si_db", "gain_is_db", "gain_ii_db", "abs_det"]
    if model.degenerate:
        header += ["quad_gain_par_db", "quad_gain_perp_db"]
    header.append("error")
    rows = []
    for _, value, amp in pump_amplitudes(cfg, model):
        drive = make_drive(cfg, model, amp)
        g_eff = effective_coupling(model, drive)
        for det in detunings:
            ws = model.signal.omega + TWO_PI * det
            try:
                if model.degenerate:
                    blk = dpa_scattering(model, g_eff, drive.pump_frequency, drive.pump_phase, ws)
                else:
                    blk = ndpa_scattering(model, g_eff, drive.pump_frequency, drive.pump_phase, ws)
            except ParampError as exc:
                out.failures += 1
                rows.append([value, det] + [None] * (len(header) - 3) + [type(exc).__name__])
                continue
            row = [value, det] + [10.0 * math.log10(abs(x) ** 2) for x in (blk.r_ss, blk.s_si, blk.s_is, blk.r_ii)]
            row.append(abs(blk.determinant()))
            if model.degenerate:
                gp, gq = quadrature_gains(blk)
                row += [10.0 * math.log10(gp), 10.0 * math.log10(gq)]
            rows.append(row + [""])
    out.csv("scatter.csv", header, rows)


def _depletion_kw(cfg):
    d = cfg["numerics"]["depletion"]
    return {"tol": d["tol"], "damping": d["damping"], "max_iter": d["max_iter"]}


def _curve_rows(cfg, model, amp, p_dbm, with_pout):
    rows = []
    failures = 0
    rho = None
    kw = _depletion_kw(cfg)
    for p in p_dbm:
        flux = float(dbm_to_flux(p, model.signal.omega))
        drive = make_drive(cfg, model, amp, flux)
        try:
            pt = solve_rho(model, drive, rho_init=rho, **kw)
        except ParampError as exc:
            failures += 1
            rows.append([p] + [None] * (4 if with_pout else 2) + [0, type(exc).__name__])
            continue
        rho = pt.rho
        gain_db = 10.0 * math.log10(pt.gain)
        if with_pout:
            rows.append([p, float(flux_to_dbm(pt.p_out_total, model.signal.omega)), pt.p_out_total, gain_db, pt.rho, 1, ""])
        else:
            rows.append([p, gain_db, pt.rho, 1, ""])
    return rows, failures


def task_gain_sweep(cfg, out: Outputs):
    model = build_model(cfg)
    p_dbm = _signal_dbm(cfg)
    comp = cfg["numerics"]["compression"]
    points, comp_rows = [], []
    for label, value, amp in pump_amplitudes(cfg, model):
        rows, nfail = _curve_rows(cfg, model, amp, p_dbm, with_pout=False)
        out.failures += nfail
        out.csv(f"gain_curve_{label}.csv", ["p_in_dbm", "gain_db", "rho", "converged", "error"], rows)
        try:
            cp = compression_point(
                model, make_drive(cfg, model, amp), target_drop_db=comp["drop_db"],
                reference=comp["reference"], window_dbm=tuple(comp["window_dbm"]),
                points_per_decade=comp["points_per_decade"], rtol=comp["rtol"],
            )
        except ParampError as exc:
            out.failures += 1
            comp_rows.append([value, None, None, None, type(exc).__name__])
            continue
        points.append(cp)
        comp_rows.append([value, 10.0 * math.log10(cp.reference_gain), cp.p_in_dbm, cp.gain_db, ""])
    out.csv(
        "compression_points.csv",
        [_pump_col(cfg), "reference_gain_db", "p_1db_dbm", "gain_at_p_1db_db", "error"],
        comp_rows,
    )
    if len(points) >= 2:
        slope, intercept = compression_line(points)
        out.csv("compression_fit.csv", ["slope_db_per_db", "intercept_db", "n_points"], [[slope, intercept, len(points)]])


def task_pout_sweep(cfg, out: Outputs):
    model = build_model(cfg)
    p_dbm = _signal_dbm(cfg)
    header = ["p_in_dbm", "p_out_dbm", "p_out_photons_per_s", "gain_db", "rho", "converged", "error"]
    for label, _, amp in pump_amplitudes(cfg, model):
        rows, nfail = _curve_rows(cfg, model, amp, p_dbm, with_pout=True)
        out.failures += nfail
        out.csv(f"pout_curve_{label}.csv", header, rows)
    # pump switched off: unity gain, no vacuum amplification
    off = [[p, p, float(dbm_to_flux(p, model.signal.omega)), 0.0, 0.0, 1, ""] for p in p_dbm]
    out.csv("pout_pump_off.csv", header, off)


def task_threshold_sweep(cfg, out: Outputs):
    model = build_model(cfg)
    th = cfg["numerics"]["threshold"]
    phase = signal_phase(cfg, model)
    p_dbm = np.concatenate([[-math.inf], _signal_dbm(cfg)])
    rows = []
    for p in p_dbm:
        flux = 0.0 if p == -math.inf else float(dbm_to_flux(p, model.signal.omega))
        kw = dict(signal_phase=phase, manifold=th["manifold"], cap_db=th["cap_db"], rtol=th["rtol"],
                  scan_step_db=th["scan_step_db"], seed=cfg["seed"])
        try:
            res = oscillation_threshold(model, flux, **kw)
            if not res.exists:
                rows.append([p, None, None, 0, None, res.evaluations, ""])
                continue
            pmax = max_output_before_oscillation(model, flux, grid_step_db=th["max_output_step_db"], threshold=res, **kw)
        except ParampError as exc:
            out.failures += 1
            rows.append([p, None, None, None, None, None, type(exc).__name__])
            continue
        rows.append([
            p,
            float(flux_to_dbm(res.pump_flux, model.resonant_pump_frequency)),
            res.rho0,
            1,
            float(flux_to_dbm(pmax, model.signal.omega)),
            res.evaluations,
            "",
        ])
    out.csv(
        "threshold.csv",
        ["p_in_dbm", "threshold_pump_dbm", "threshold_rho0", "exists", "max_output_dbm", "evaluations", "error"],
        rows,
    )


def _operating_points(cfg, model):
    for i, (label, value, amp) in enumerate(pump_amplitudes(cfg, model)):
        for k, p in enumerate(_signal_dbm(cfg)):
            flux = float(dbm_to_flux(p, model.signal.omega))
            yield f"{i:02d}_{k:03d}", value, p, make_drive(cfg, model, amp, flux)


def task_wigner(cfg, out: Outputs):
    model = build_model(cfg)
    npts = cfg["numerics"]["wigner"]["points"]
    hw = cfg["numerics"]["wigner"]["halfwidth_sigma"]
    scale = math.sqrt(np_threshold_photons(model))
    cov_rows, state_rows = [], []
    for tag, value, p, drive in _operating_points(cfg, model):
        try:
            states = [s for s in steady_states(model, drive, seed=cfg["seed"]) if s.stable]
        except ParampError as exc:
            out.failures += 1
            state_rows.append([tag, value, p, None, None, None, None, type(exc).__name__])
            continue
        if not states:
            out.failures += 1
            state_rows.append([tag, value, p, None, None, None, None, "NoStableState"])
        for j, s in enumerate(states):
            name = f"{tag}_{j}"
            try:
                fluc = assemble_fokker_planck(model, s)
                S = steady_covariance(fluc)
            except ParampError as exc:
                out.failures += 1
                state_rows.append([name, value, p, s.amplitudes[0].real, s.amplitudes[0].imag, None, None, type(exc).__name__])
                continue
            n = len(fluc.labels)
            # signal block back from the real frame to the lab frame
            idx = [0, n // 2]
            phi = float(fluc.phases[0])
            R = np.array([[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]])
            S_lab = R @ S[np.ix_(idx, idx)] @ R.T
            mu = np.array([s.amplitudes[0].real, s.amplitudes[0].imag])
            sx, sy = math.sqrt(S_lab[0, 0]), math.sqrt(S_lab[1, 1])
            x = np.linspace(mu[0] - hw * sx, mu[0] + hw * sx, npts)
            y = np.linspace(mu[1] - hw * sy, mu[1] + hw * sy, npts)
            W = gaussian_wigner_grid(S_lab, mu, (0, 1), (x, y))
            out.matrix(
                f"wigner_{name}.dat", W, [("re_a", x), ("im_a", y)],
                comments=[
                    "signal-mode Wigner density, rows follow im_a; raw quadrature units (vacuum variance 1/4), lab frame",
                    f"scale sqrt_n_thr {_fmt(scale)}",
                ],
            )
            state_rows.append([name, value, p, mu[0], mu[1], S_lab[0, 0], S_lab[1, 1], ""])
            for a in range(n):
                for b in range(a, n):
                    cov_rows.append([name, fluc.labels[a], fluc.labels[b], S[a, b]])
    out.csv(
        "wigner_states.csv",
        ["state", _pump_col(cfg), "p_in_dbm", "re_a_sqrt_photons", "im_a_sqrt_photons",
         "var_re_a_quanta", "var_im_a_quanta", "error"],
        state_rows,
    )
    out.csv("wigner_covariance.csv", ["state", "coord_i", "coord_j", "covariance_quanta"], cov_rows)


def task_mc(cfg, out: Outputs):
    model = build_model(cfg)
    mc = cfg["numerics"]["mc"]
    ka = model.signal.kappa
    rows, cmp_rows = [], []
    for tag, value, p, drive in _operating_points(cfg, model):
        ens_cfg = EnsembleConfig(
            n_traj=mc["n_traj"],
            burn_in=mc["burn_in_kappa"] / ka,
            n_samples=mc["n_samples"],
            sample_interval=mc["sample_interval_kappa"] / ka,
            dt=None if mc["dt_kappa"] is None else mc["dt_kappa"] / ka,
            master_seed=cfg["seed"],
            integrator=mc["integrator"],
            workers=mc["workers"],
        )
        try:
            ens = simulate(model, drive, ens_cfg)
        except (ParampError, ValueError) as exc:
            out.failures += 1
            rows.append([tag, value, p, None, None, None, None, None, None, type(exc).__name__])
            continue
        k_re, k_re_se = quadrature_kurtosis(ens, 0, "real")
        k_im, k_im_se = quadrature_kurtosis(ens, 0, "imag")
        flux = output_flux_estimate(ens, model)
        rows.append([tag, value, p, k_re, k_re_se, k_im, k_im_se, flux.flux, flux.standard_error, ""])
        H, xe, ye = histogram2d(ens, 0, bins=mc["bins"])
        xc, yc = 0.5 * (xe[1:] + xe[:-1]), 0.5 * (ye[1:] + ye[:-1])
        out.matrix(
            f"mc_histogram_{tag}.dat", H, [("re_a", xc), ("im_a", yc)],
            comments=["signal-mode sample density, rows follow im_a; raw quadrature units, lab frame",
                      f"scale sqrt_n_thr {_fmt(math.sqrt(np_threshold_photons(model)))}"],
        )
        cmp_rows.extend(_lyapunov_comparison(model, drive, ens, tag, cfg["seed"]))
    out.csv(
        "mc_summary.csv",
        ["point", _pump_col(cfg), "p_in_dbm", "kurtosis_re_a", "kurtosis_re_a_se", "kurtosis_im_a",
         "kurtosis_im_a_se", "output_flux_photons_per_s", "output_flux_se", "error"],
        rows,
    )
    out.csv(
        "mc_covariance.csv",
        ["point", "coord_i", "coord_j", "mc_quanta", "mc_se_quanta", "lyapunov_quanta", "z_score"],
        cmp_rows,
    )


def _lyapunov_comparison(model, drive, ens, tag, seed):
    """Covariance entries against the linearized theory when it applies."""
    try:
        states = [s for s in steady_states(model, drive, seed=seed) if s.stable]
        if len(states) != 1:
            return []
        fluc = assemble_fokker_planck(model, states[0])
        S = steady_covariance(fluc)
    except (ParampError, MarginallyStable):
        return []
    sc = sample_covariance(ens, transform=lambda z: quadrature_coordinates(fluc, z))
    rows = []
    n = S.shape[0]
    for a in range(n):
        for b in range(a, n):
            se = sc.standard_error[a, b]
            z = (sc.covariance[a, b] - S[a, b]) / se if se > 0 else math.nan
            rows.append([tag, fluc.labels[a], fluc.labels[b], sc.covariance[a, b], se, S[a, b], z])
    return rows


def task_circuit_params(cfg, out: Outputs):
    c = cfg["circuit"]
    rows = []

    def add(circuit, setting, quantity, value, unit, error=""):
        rows.append([circuit, setting, quantity, value, unit, error])

    d = c["duffing"]
    junction = circuits.JunctionParams.from_inductance(d["L_J_h"], d["C_sigma_f"])
    kappa = TWO_PI * d["kappa_hz"]
    add("duffing", "", "kerr_hz", junction.kerr / TWO_PI, "Hz")
    add("duffing", "", "omega_tilde_hz", junction.omega_tilde / TWO_PI, "Hz")
    add("duffing", "", "phi_zpf", junction.phi_zpf, "rad")
    drive_w = junction.omega_tilde + TWO_PI * d["drive_detuning_hz"]
    for p in d["drive_power_dbm"]:
        alpha_in = math.sqrt(float(dbm_to_flux(p, drive_w)))
        setting = f"drive_dbm={p:g}"
        try:
            op = circuits.duffing_effective(junction, alpha_in, drive_w, kappa)
        except ParampError as exc:
            out.failures += 1
            add("duffing", setting, "", None, "", type(exc).__name__)
            continue
        add("duffing", setting, "photons", op.photons, "quanta")
        add("duffing", setting, "omega_a_hz", op.omega_a / TWO_PI, "Hz")
        add("duffing", setting, "g_aa_hz", op.g_aa / TWO_PI, "Hz")
        add("duffing", setting, "theta", op.theta, "rad")
        add("duffing", setting, "pump_frequency_hz", op.pump_frequency / TWO_PI, "Hz")

    s = c["squid"]
    sq = circuits.SquidParams(
        s["L_J_h"], s["C_sigma_f"], s["flux_bias"], s["modulation_depth"],
        None if s["pump_frequency_hz"] is None else TWO_PI * s["pump_frequency_hz"],
    )
    try:
        se = circuits.squid_effective(sq)
        add("squid", "", "L_squid_h", se.L_squid, "H")
        add("squid", "", "omega0_hz", se.omega0 / TWO_PI, "Hz")
        add("squid", "", "mu_r", se.mu_r, "1")
        add("squid", "", "g_aa_hz", se.g_aa / TWO_PI, "Hz")
        add("squid", "", "pump_frequency_hz", se.pump_frequency / TWO_PI, "Hz")
    except ParampError as exc:
        out.failures += 1
        add("squid", "", "", None, "", type(exc).__name__)

    dp = c["double_pump"]
    from scipy.constants import h as PLANCK

    params = circuits.DoublePumpParams(
        dp["phi_a"], dp["phi_c"], dp["phi_q"], PLANCK * dp["E_J_hz"], TWO_PI * dp["omega_a_hz"],
        TWO_PI * dp["omega_c_hz"], TWO_PI * dp["kappa_c_hz"], TWO_PI * dp["eps_p_hz"], TWO_PI * dp["eps_c_hz"],
    )
    try:
        r = circuits.double_pump_effective(params)
        for q in ("chi_aa", "chi_cc", "chi_ac", "omega_p", "omega_d"):
            add("double_pump", "", q + "_hz", getattr(r, q) / TWO_PI, "Hz")
        add("double_pump", "", "g2_abs_hz", abs(r.g2) / TWO_PI, "Hz")
        add("double_pump", "", "g2_phase", float(np.angle(r.g2)), "rad")
        add("double_pump", "", "xi_p_abs", abs(r.xi_p), "sqrt_quanta")
    except ParampError as exc:
        out.failures += 1
        add("double_pump", "", "", None, "", type(exc).__name__)

    j = c["jrm"]
    w = TWO_PI * j["omega_c_hz"]
    alpha = math.sqrt(float(dbm_to_flux(j["pump_power_dbm"], TWO_PI * j["drive_frequency_hz"])))
    r = circuits.jrm_effective(
        TWO_PI * j["g3_hz"], alpha, TWO_PI * j["drive_frequency_hz"], w, TWO_PI * j["kappa_c_hz"],
        TWO_PI * j["omega_a_hz"], TWO_PI * j["omega_b_hz"], TWO_PI * j["kappa_a_hz"], TWO_PI * j["kappa_b_hz"],
    )
    add("jrm", "", "g_ab_hz", r.g_ab / TWO_PI, "Hz")
    add("jrm", "", "g_ab_input_output_hz", r.g_ab_input_output / TWO_PI, "Hz")
    add("jrm", "", "theta", r.theta, "rad")
    add("jrm", "", "pump_frequency_hz", r.pump_frequency / TWO_PI, "Hz")
    out.csv("circuit_params.csv", ["circuit", "setting", "quantity", "value", "unit", "error"], rows)


TASK_RUNNERS = {
    "scatter": task_scatter,
    "gain-sweep": task_gain_sweep,
    "pout-sweep": task_pout_sweep,
    "threshold-sweep": task_threshold_sweep,
    "wigner": task_wigner,
    "mc": task_mc,
    "circuit-params": task_circuit_params,
}


# --------------------------------------------------------------------------
# entry points


def resolve_config(task, config_path=None, seed=None):
    """Load, validate and normalize a configuration for ``task``.

    Raises
    ------
    ConfigError
        For schema violations or a task mismatch.
    OSError
        If the file cannot be read.
    """
    cfg = cfgmod.load(config_path) if config_path else cfgmod.defaults()
    if cfg["task"] is not None and cfg["task"] != task:
        raise ConfigError(f"config is for task {cfg['task']!r}, command line asks for {task!r}")
    cfg["task"] = task
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def run(task, cfg, out_dir) -> int:
    """Execute ``task`` and write its artifacts to ``out_dir``; returns the exit status."""
    out = Outputs()
    try:
        build_model(cfg)
    except ValueError as exc:
        log.error("invalid model: %s", exc)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            TASK_RUNNERS[task](cfg, out)
    except ParampError as exc:
        log.error("solver failure: %s: %s", type(exc).__name__, exc)
        out.failures += 1
    manifest = {
        "task": task,
        "seed": cfg["seed"],
        "version": __version__,
        "config_sha256": cfgmod.config_hash(cfg),
    }
    files = dict(out.files)
    files["config.resolved.yaml"] = cfgmod.dumps(cfg)
    out.files = files
    try:
        out.flush(out_dir, manifest)
    except OSError as exc:
        log.error("cannot write outputs: %s", exc)
        return EXIT_IO
    if out.failures:
        log.error("%d solver failure(s); partial output written to %s", out.failures, out_dir)
        return EXIT_SOLVER
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="paramp", description="Josephson parametric amplifier laboratory")
    p.add_argument("task", choices=cfgmod.TASKS)
    p.add_argument("--config", help="YAML experiment configuration")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the configured master seed")
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="paramp: %(message)s")
    try:
        cfg = resolve_config(args.task, args.config, args.seed)
    except ConfigError as exc:
        print(f"paramp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"paramp: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.print_config:
        sys.stdout.write(cfgmod.dumps(cfg))
        return EXIT_OK
    if not args.out:
        print("paramp: --out is required", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.task, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())

"""Batch front-end: parse a scenario config, run parameter sweeps, emit CSV
plot data plus a JSON manifest recording every default and calibration.

One CSV is written per (metric, method) pair with a fixed column order:

    sweep_value_dB,value,error_estimate,n_samples,scenario_fingerprint

Exit codes: 0 success, 1 configuration error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analytics, fso_link, montecarlo, rf_link, specfun, system, transponder

METRICS = ("outage", "ber", "capacity", "moments")
METHODS = ("exact", "asymptotic", "oracle", "monte-carlo")
SWEEPABLE = ("mu_r_db", "ibo_db", "gamma_th_db", "cn2", "xi")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: variable, grid, metric, methods, output path."""
    variable: str
    grid: tuple[float, ...]
    metric: str
    methods: tuple[str, ...]
    out_dir: str

    def __post_init__(self):
        if self.variable not in SWEEPABLE:
            raise ConfigError(f"sweep variable must be one of {SWEEPABLE}")
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------

DEFAULTS = {
    "atmosphere": {
        "altitude_sat_m": "35786e3",
        "altitude_ground_m": "0.0",
        "zenith_deg": "30.0",
        "wavelength_nm": "1550.0",
        "wind_rms_ms": "21.0",
        "cn2_ground": "1e-12",
        "beam_radius_tx_m": "0.02",
        "beam_wander": "true",
    },
    "pointing": {"xi": "1.1", "a0": "1.0"},
    "feeder": {"detection": "imdd", "path_loss_il": "1.0", "eta": "1.0",
               "sigma1_sq": "1.0"},
    "rf": {
        "carrier_ghz": "20.0",
        "gain_tx_dbi": "52.0",
        "gain_rx_dbi": "38.16",
        "bandwidth_mhz": "50.0",
        "noise_temp_k": "207.0",
        "theta_3db_deg": "0.4",
        "beam_radius_km": "250.0",
        "slant_range_km": "35786.0",
    },
    "shadowing": {"m": "19", "b": "0.158", "omega": "1.29"},
    "hpa": {"family": "twta", "ibo_db": "25.0", "p_r": "1.0"},
    "system": {"p_g": "1.0", "sigma2_sq": "1.0", "user_index": "0",
               "gain_mode": "power_constrained", "fixed_gain": "1.0",
               "gamma_bar2": ""},
    "sweep": {"variable": "mu_r_db", "start": "0", "stop": "80", "step": "5",
              "grid": ""},
}


def load_config(path: str | None) -> tuple[configparser.ConfigParser, dict]:
    """Read the INI config over the documented defaults.

    Returns the parser and a record of which keys fell back to defaults
    (for the manifest).
    """
    cp = configparser.ConfigParser()
    cp.read_dict(DEFAULTS)
    used_defaults = {f"{sec}.{key}": val for sec, kv in DEFAULTS.items()
                     for key, val in kv.items()}
    if path is not None:
        read = cp.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        user = configparser.ConfigParser()
        user.read(path)
        for sec in user.sections():
            if sec not in DEFAULTS:
                raise ConfigError(f"unknown config section [{sec}]")
            for key in user[sec]:
                if key not in DEFAULTS[sec]:
                    raise ConfigError(f"unknown key {key!r} in section [{sec}]")
                used_defaults.pop(f"{sec}.{key}", None)
    return cp, used_defaults


def _scenario_from_config(cp: configparser.ConfigParser, mu_r_db: float,
                          overrides: dict) -> system.ScenarioConfig:
    a = cp["atmosphere"]
    atmo = fso_link.AtmosphereConfig(
        altitude_sat=a.getfloat("altitude_sat_m"),
        altitude_ground=a.getfloat("altitude_ground_m"),
        zenith_rad=math.radians(a.getfloat("zenith_deg")),
        wavelength=a.getfloat("wavelength_nm") * 1e-9,
        wind_rms=a.getfloat("wind_rms_ms"),
        cn2_ground=overrides.get("cn2", a.getfloat("cn2_ground")),
        beam_radius_tx=a.getfloat("beam_radius_tx_m"),
        beam_wander=a.getboolean("beam_wander"),
    )
    p = cp["pointing"]
    pointing = fso_link.PointingConfig(
        xi=overrides.get("xi", p.getfloat("xi")), a0=p.getfloat("a0"))
    f = cp["feeder"]
    det = overrides.get("detection", f.get("detection")).lower()
    if det not in ("imdd", "heterodyne", "het"):
        raise ConfigError(f"unknown detection {det!r}")
    feeder = fso_link.FeederConfig(
        detection_r=2 if det == "imdd" else 1,
        atmosphere=atmo, pointing=pointing,
        path_loss_il=f.getfloat("path_loss_il"),
        eta=f.getfloat("eta"), sigma1_sq=f.getfloat("sigma1_sq"))
    r = cp["rf"]
    rf = rf_link.RfLinkParams(
        carrier_hz=r.getfloat("carrier_ghz") * 1e9,
        gain_tx=10.0 ** (r.getfloat("gain_tx_dbi") / 10.0),
        gain_rx=10.0 ** (r.getfloat("gain_rx_dbi") / 10.0),
        bandwidth_hz=r.getfloat("bandwidth_mhz") * 1e6,
        noise_temp_k=r.getfloat("noise_temp_k"),
        theta_3db_rad=math.radians(r.getfloat("theta_3db_deg")))
    layout = rf_link.BeamLayout(
        beam_radius=r.getfloat("beam_radius_km") * 1e3,
        slant_range=r.getfloat("slant_range_km") * 1e3)
    s = cp["shadowing"]
    shadow = rf_link.ShadowedRicianParams(
        m=s.getfloat("m"), b=s.getfloat("b"), omega=s.getfloat("omega"))
    h = cp["hpa"]
    family = overrides.get("hpa", h.get("family")).lower()
    ibo_db = overrides.get("ibo_db", h.getfloat("ibo_db"))
    hpa = transponder.hpa_state(family, ibo_db, p_r=h.getfloat("p_r"))
    sysc = cp["system"]
    g2_raw = sysc.get("gamma_bar2").strip()
    return system.build_scenario(
        feeder, layout, rf, shadow, hpa, mu_r_db,
        gamma_bar2=float(g2_raw) if g2_raw else None,
        p_g=sysc.getfloat("p_g"), sigma2_sq=sysc.getfloat("sigma2_sq"),
        user_index=sysc.getint("user_index"),
        gain_mode=sysc.get("gain_mode"),
        fixed_gain=sysc.getfloat("fixed_gain"))


def _sweep_grid(cp, args) -> tuple[str, list[float]]:
    sw = cp["sweep"]
    variable = args.sweep or sw.get("variable")
    if variable not in SWEEPABLE:
        raise ConfigError(f"sweep variable must be one of {SWEEPABLE}")
    raw = sw.get("grid").strip()
    if raw:
        grid = [float(tok) for tok in raw.replace(",", " ").split()]
    else:
        start, stop, step = (sw.getfloat(k) for k in ("start", "stop", "step"))
        n = int(round((stop - start) / step)) + 1
        grid = [start + i * step for i in range(n)]
    if not grid:
        raise ConfigError("sweep grid is empty")
    return variable, grid


# ---------------------------------------------------------------------------
# metric evaluation
# ---------------------------------------------------------------------------

def _evaluate(metric, method, scn, args) -> analytics.MetricResult:
    gamma_th = 10.0 ** (args.gamma_th_db / 10.0)
    fp = scn.fingerprint()
    mu_db = 10.0 * math.log10(scn.mu_r)
    if metric == "outage":
        if method == "exact":
            val, err, n = analytics.outage_exact(gamma_th, scn), 1e-9, 0
        elif method == "asymptotic":
            val, err, n = analytics.outage_asymptotic(gamma_th, scn), math.nan, 0
        elif method == "oracle":
            val, err, n = analytics.sndr_cdf_oracle(gamma_th, scn), 1e-8, 0
        else:
            est = montecarlo.empirical_outage(
                montecarlo.SimPlan(scn, args.samples, args.seed), gamma_th)
            val, err, n = est.value, est.half_width, est.n_samples
    elif metric == "ber":
        mod = _modulation(args, scn)
        if method == "exact":
            val, err, n = analytics.ber_exact(mod, scn), 1e-9, 0
        elif method == "asymptotic":
            val, err, n = analytics.ber_asymptotic(mod, scn), math.nan, 0
        elif method == "monte-carlo":
            est = montecarlo.empirical_ber(
                montecarlo.SimPlan(scn, args.samples, args.seed), mod)
            val, err, n = est.value, est.half_width, est.n_samples
        else:
            raise ConfigError("ber supports exact, asymptotic, monte-carlo")
    elif metric == "capacity":
        if method == "exact":
            val, err, n = analytics.capacity_exact(scn), 1e-9, 0
        elif method == "monte-carlo":
            est = montecarlo.empirical_capacity(
                montecarlo.SimPlan(scn, args.samples, args.seed))
            val, err, n = est.value, est.half_width, est.n_samples
        else:
            raise ConfigError("capacity supports exact, monte-carlo")
    elif metric == "moments":
        if method == "exact":
            val, err, n = analytics.sndr_moments(args.order, scn), 1e-9, 0
        elif method == "monte-carlo":
            est = montecarlo.empirical_moment(
                montecarlo.SimPlan(scn, args.samples, args.seed), args.order)
            val, err, n = est.value, est.half_width, est.n_samples
        else:
            raise ConfigError("moments supports exact, monte-carlo")
    else:
        raise ConfigError(f"unknown metric {metric!r}")
    return analytics.MetricResult(fp, metric, mu_db, float(val), method,
                                  float(err) if err == err else math.nan, n)


def _modulation(args, scn) -> analytics.ModulationSpec:
    name = args.modulation.lower()
    if name in ("mpsk", "mqam"):
        return analytics.modulation(name, args.mod_order)
    return analytics.modulation(name)


def run(args) -> int:
    cp, used_defaults = load_config(args.config)
    variable, grid = _sweep_grid(cp, args)
    spec = SweepSpec(variable, tuple(grid), args.metric,
                     tuple(m.strip() for m in args.method.split(",")), args.out)
    methods = list(spec.methods)
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    overrides = {}
    if args.detection:
        overrides["detection"] = {"imdd": "imdd", "het": "heterodyne",
                                  "heterodyne": "heterodyne"}[args.detection]
    if args.hpa:
        overrides["hpa"] = args.hpa
    if args.ibo_db is not None:
        overrides["ibo_db"] = args.ibo_db

    rows: dict[tuple[str, str], list[analytics.MetricResult]] = {
        (args.metric, m): [] for m in methods}
    for point in grid:
        point_over = dict(overrides)
        mu_db = args.mu_r_db
        if variable == "mu_r_db":
            mu_db = point
        elif variable == "gamma_th_db":
            pass   # handled through args below
        elif variable in ("cn2", "xi"):
            point_over[variable] = point
        elif variable == "ibo_db":
            point_over["ibo_db"] = point
        scn = _scenario_from_config(cp, mu_db, point_over)
        point_args = args
        if variable == "gamma_th_db":
            point_args = argparse.Namespace(**{**vars(args), "gamma_th_db": point})
        for m in methods:
            res = _evaluate(args.metric, m, scn, point_args)
            res = analytics.MetricResult(
                res.scenario_fingerprint, res.metric, float(point), res.value,
                res.method, res.error_estimate, res.n_samples)
            rows[(args.metric, m)].append(res)

    files = []
    for (metric, method), results in rows.items():
        fname = out_dir / f"{metric}_{method.replace('-', '_')}.csv"
        with open(fname, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sweep_value_dB", "value", "error_estimate",
                             "n_samples", "scenario_fingerprint"])
            for res in results:
                writer.writerow([f"{res.sweep_value_db:.6f}",
                                 f"{res.value:.12e}",
                                 f"{res.error_estimate:.6e}",
                                 res.n_samples,
                                 res.scenario_fingerprint])
        files.append(str(fname))

    scn0 = _scenario_from_config(cp, args.mu_r_db, overrides)
    manifest = {
        "version": __version__,
        "metric": args.metric,
        "methods": methods,
        "sweep_variable": variable,
        "grid": grid,
        "gamma_th_db": args.gamma_th_db,
        "modulation": args.modulation,
        "mod_order": args.mod_order,
        "samples": args.samples,
        "seed": args.seed,
        "defaults_used": used_defaults,
        "cli_overrides": overrides,
        "scenario": scn0.describe(),
        "files": files,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"wrote {len(files)} CSV file(s) and manifest.json to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------

def selftest() -> int:
    """Fast invariant bundle; returns 0 iff every check passes."""
    import scipy.special as sp

    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))
        print(f"  [{'ok' if ok else 'FAIL'}] {name}")

    r = specfun.meijer_g(specfun.GParams((), (0.0,), 1, 0, 3.0))
    check("meijer G exponential identity", abs(r.value - math.exp(-3.0)) < 1e-10)
    rng = np.random.Generator(np.random.Philox(key=1))
    ok = True
    for _ in range(20):
        b1 = rng.uniform(-1.0, 1.5)
        b2 = b1 - rng.uniform(-2.5, 2.5)
        z = rng.uniform(0.05, 8.0)
        got = specfun.meijer_g(specfun.GParams((), (b1, b2), 2, 0, z)).value
        ref = 2.0 * z ** (0.5 * (b1 + b2)) * sp.kv(b1 - b2, 2.0 * math.sqrt(z))
        ok &= abs(got - ref) <= 1e-7 * abs(ref)
    check("meijer G Bessel reduction (20 draws)", ok)

    k6, s6 = transponder.bussgang_twta(1e6)
    k6b, s6b = transponder.bussgang_sspa(1e6)
    check("Bussgang large back-off limits",
          0.999 <= k6 <= 1.0 and 0.999 <= k6b <= 1.0 and s6 < 1e-3 and s6b < 1e-3)

    rng = np.random.Generator(np.random.Philox(key=2))
    ok = True
    for _ in range(10):
        b = rng.standard_normal((5, 5)) + 5.0 * np.eye(5)
        t, c_zf = system.zf_precoder(b, 2.0)
        ok &= np.allclose(b @ t, math.sqrt(c_zf) * np.eye(5), atol=1e-10)
        ok &= abs(np.trace(t @ t.T) - 2.0) < 1e-10
    check("zero-forcing identities (10 draws)", ok)

    atmo = fso_link.AtmosphereConfig(35786e3, 0.0, math.radians(30), 1550e-9,
                                     21.0, 1e-12, 0.02)
    turb = fso_link.scintillation_params(atmo)
    check("scintillation shapes in band",
          abs(turb.alpha - 1.52) < 0.05 and abs(turb.beta - 3.29) < 0.11)

    feeder = fso_link.FeederConfig(2, atmo, fso_link.PointingConfig(1.1))
    layout = rf_link.BeamLayout(beam_radius=250e3, slant_range=35786e3)
    rf = rf_link.RfLinkParams(20e9, 10 ** 5.2, 10 ** 3.816, 50e6, 207.0,
                              math.radians(0.4))
    shadow = rf_link.ShadowedRicianParams(19, 0.158, 1.29)
    scn = system.build_scenario(feeder, layout, rf, shadow,
                                transponder.hpa_state("twta", 25.0),
                                mu_r_db=30.0, gamma_bar2=2.76e6)
    e = analytics.sndr_cdf_exact(2.0, scn)
    o = analytics.sndr_cdf_oracle(2.0, scn)
    check("closed form vs oracle CDF", abs(e - o) < 1e-6)
    est = montecarlo.empirical_cdf(montecarlo.SimPlan(scn, 100_000, seed=3), [2.0])[0]
    check("closed form vs Monte Carlo CDF", est.covers(e))

    failures = [name for name, ok in checks if not ok]
    if failures:
        print(f"selftest FAILED: {failures}")
        return 1
    print("selftest passed")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="optfeeder",
        description="Forward-link sweeps for an optical-feeder multibeam "
                    "satellite system (CSV output).")
    ap.add_argument("--config", help="INI scenario file (defaults documented in docs/)")
    ap.add_argument("--sweep", choices=SWEEPABLE, help="sweep variable")
    ap.add_argument("--metric", choices=METRICS, default="outage")
    ap.add_argument("--method", default="exact",
                    help="comma list from: " + ", ".join(METHODS))
    ap.add_argument("--detection", choices=("imdd", "het", "heterodyne"))
    ap.add_argument("--hpa", choices=transponder.HPA_FAMILIES)
    ap.add_argument("--ibo-db", type=float, dest="ibo_db")
    ap.add_argument("--gamma-th-db", type=float, default=5.0, dest="gamma_th_db")
    ap.add_argument("--mu-r-db", type=float, default=50.0, dest="mu_r_db",
                    help="operating point when mu_r is not the sweep variable")
    ap.add_argument("--modulation", default="ook",
                    choices=("ook", "bpsk", "mpsk", "mqam"))
    ap.add_argument("--mod-order", type=int, default=16, dest="mod_order")
    ap.add_argument("--order", type=int, default=1, help="moment order")
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="sweep_out")
    ap.add_argument("--selftest", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.selftest:
        return selftest()
    try:
        return run(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (specfun.ConvergenceError, specfun.PoleCollisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

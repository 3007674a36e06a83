"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION k: PASS|FAIL ...`` line (collected
again in the terminal summary) and then asserts.  Tolerances and runtime
limits are the contractual ones; nothing is relaxed here.
"""
import math
import time

import numpy as np
import pytest

import oracles
from conftest import random_state
from nmq import channels as ch
from nmq import cli
from nmq import decoherence as deco
from nmq import measures as ms
from nmq.errors import NoCrossing, PoleProximity
from nmq.numerics import TimeWindow, complex_erf
from nmq.qmath import binary_entropy, ket_to_dm, maximally_mixed, trace_distance, validate_density
from nmq.sampling import StateSampler, haar_unitary

RESULTS = []
W20 = TimeWindow(0.0, 20.0)
H2 = binary_entropy


def report(k, checks, elapsed, limit):
    """Print and record one line for criterion ``k``; return (ok, failure text)."""
    checks = list(checks) + [(f"runtime {elapsed:.1f}s < {limit}s", elapsed < limit)]
    failed = [name for name, ok in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = "all checks hold" if not failed else "failed: " + "; ".join(failed)
    line = f"CRITERION {k}: {status} ({len(checks) - len(failed)}/{len(checks)} checks, {elapsed:.1f}s) {detail}"
    RESULTS.append(line)
    print(line)
    return not failed, detail


def evaluate_all(model, window, budget=100, seed=0, analytic_tail=True):
    out = {}
    for name, fn in ms.MEASURES.items():
        if name in ms.SAMPLED:
            out[name] = fn(model, window, StateSampler(budget=budget, seed=seed), analytic_tail=analytic_tail)
        else:
            out[name] = fn(model, window, analytic_tail=analytic_tail)
    return out


def deph(s):
    return ch.Dephasing1Q(deco.OhmicSpectrum(s))


def test_criterion_1_dephasing_crossover():
    start = time.time()
    checks = []
    for s in (1.0, 1.5, 2.0):
        res = evaluate_all(deph(s), W20)
        for name, r in res.items():
            checks.append((f"s={s} {name}={r.value:.3g} zero", abs(r.value) < 1e-8))
    for s in (2.5, 3.0, 4.0):
        res = evaluate_all(deph(s), W20)
        for name, r in res.items():
            checks.append((f"s={s} {name}={r.value:.3g} > 1e-6", r.value > 1e-6))
    ok, detail = report(1, checks, time.time() - start, 30)
    assert ok, detail


def test_criterion_2_closed_form_spot_values():
    start = time.time()
    m = deph(3.0)
    rhp = ms.n_rhp(m, W20).value
    blp = ms.n_blp(m, W20, StateSampler(budget=100, seed=0)).value
    lfs = ms.n_lfs(m, W20, StateSampler(budget=100, seed=0)).value
    blp_ref = math.exp(-2) - math.exp(-2.25)
    lfs_ref = H2(0.5 + math.exp(-2.25) / 2) - H2(0.5 + math.exp(-2) / 2)
    checks = [
        (f"N_RHP {rhp:.10f} vs 0.25", abs(rhp - 0.25) <= 1e-4),
        (f"N_BLP {blp:.10f} vs {blp_ref:.10f}", abs(blp - blp_ref) <= 1e-5),
        (f"N_I {lfs:.10f} vs {lfs_ref:.10f}", abs(lfs - lfs_ref) <= 1e-5),
    ]
    ok, detail = report(2, checks, time.time() - start, 60)
    assert ok, detail


def test_criterion_3_capacity_identities():
    start = time.time()
    checks = []
    worst = 0.0
    for s in np.linspace(0.5, 5.5, 5):
        for t in np.linspace(0.1, 20.0, 10):
            m = deph(float(s))
            c, _ = ms.c_ea(m, float(t))
            q, _ = ms.q_cap(m, float(t))
            worst = max(worst, abs(c - (1 + q)))
    checks.append((f"max |C - 1 - Q| = {worst:.2e} on 50 points", worst <= 1e-9))
    for s in (2.5, 3.0, 4.0, 5.0):
        for model in (deph(s), ch.Dephasing2QIndependent(deco.OhmicSpectrum(s))):
            ni = ms.n_lfs(model, W20, StateSampler(budget=20, seed=0)).value
            nc = ms.n_c(model, W20).value
            nq = ms.n_q(model, W20).value
            checks.append((f"{model.label} s={s} |N_I-N_C|={abs(ni - nc):.1e}", abs(ni - nc) <= 1e-6))
            checks.append((f"{model.label} s={s} |N_I-N_Q|={abs(ni - nq):.1e}", abs(ni - nq) <= 1e-6))
    ok, detail = report(3, checks, time.time() - start, 60)
    assert ok, detail


def test_criterion_4_additivity():
    start = time.time()
    one = deph(3.0)
    two = ch.Dephasing2QIndependent(deco.OhmicSpectrum(3.0))
    sampler = StateSampler(budget=500, seed=0)
    r1, r2 = ms.n_rhp(one, W20).value, ms.n_rhp(two, W20).value
    i1, i2 = ms.n_lfs(one, W20, sampler).value, ms.n_lfs(two, W20, sampler).value
    b1, b2 = ms.n_blp(one, W20, sampler).value, ms.n_blp(two, W20, sampler).value
    checks = [
        (f"N_RHP 2Q {r2!r} = 2 x {r1!r}", r2 == 2 * r1),
        (f"N_I 2Q {i2:.8f} vs 2 x {i1:.8f}", abs(i2 - 2 * i1) <= 1e-4),
        (f"N_BLP 2Q {b2:.8f} vs {b1:.8f}", abs(b2 - b1) <= 1e-3),
    ]
    ok, detail = report(4, checks, time.time() - start, 300)
    assert ok, detail


def test_criterion_5_lorentzian_thresholds():
    start = time.time()
    lor = lambda r: ch.AmplitudeDamping1Q(deco.LorentzianSpec(r))
    w40 = TimeWindow(0.0, 40.0)
    checks = []
    for name, r in evaluate_all(lor(0.25), w40).items():
        checks.append((f"r=0.25 {name}={r.value:.3g} zero", abs(r.value) < 1e-8 and not r.diverged))
    rhp = ms.n_rhp(lor(1.0), w40)
    blp = ms.n_blp(lor(1.0), w40, StateSampler(budget=100, seed=0))
    q20 = ms.n_q(lor(20.0), w40).value
    q50 = ms.n_q(lor(50.0), w40).value
    checks += [
        ("r=1 N_RHP diverged flag", rhp.diverged),
        (f"r=1 N_BLP={blp.value:.4g} > 0", blp.value > 0),
        (f"r=20 N_Q={q20:.3g} = 0", q20 == 0),
        (f"r=50 N_Q={q50:.3g} > 0", q50 > 0),
    ]
    ok, detail = report(5, checks, time.time() - start, 120)
    assert ok, detail


def test_criterion_6_band_gap_crossover():
    start = time.time()
    cfg = {"model": {"family": "amplitude_damping_1q", "reservoir": "pbg"}, "sweep_parameter": "z",
           "values": [round(z, 2) for z in np.arange(0.5, 2.0001, 0.25)], "measures": ["rhp"],
           "window": {"t_end": 20.0}}
    try:
        z_crit = cli.detect_crossover(cfg, "rhp", threshold=1e-6)
        crossing = (f"z_crit = {z_crit:.3f} within 1.7 +- 0.1", abs(z_crit - 1.7) <= 0.1)
    except NoCrossing as exc:
        crossing = (f"z_crit: no crossing on [0.5, 2] ({exc})", False)
    zs = np.round(np.arange(0.5, 2.0001, 0.05), 3)
    vals = [ms.n_rhp(ch.AmplitudeDamping1Q(deco.PBGSpec(float(z))), W20).value for z in zs]
    z_max = float(zs[int(np.argmax(vals))])
    checks = [crossing, (f"N_RHP(z) peak at z = {z_max:.2f} within 1.0 +- 0.25", abs(z_max - 1.0) <= 0.25)]
    ok, detail = report(6, checks, time.time() - start, 300)
    assert ok, detail


def test_criterion_7_common_environment():
    start = time.time()
    cfg = {"model": {"family": "dephasing_2q_common", "t_s": 0.25}, "sweep_parameter": "s",
           "values": [0.01, 0.05, 0.1, 0.2, 0.5], "measures": ["rhp"], "window": {"t_end": 20.0},
           "analytic_tail": False}
    s_c = cli.detect_crossover(cfg, "rhp", threshold=1e-6)
    checks = [(f"t_s=0.25 s_c = {s_c:.4f} in [0.03, 0.13]", 0.03 <= s_c <= 0.13)]
    spec = deco.OhmicSpectrum(3.0)
    common = evaluate_all(ch.Dephasing2QCommon(deco.CommonEnvSpec(spec, 1000.0)), W20, analytic_tail=False)
    indep = evaluate_all(ch.Dephasing2QIndependent(spec), W20, analytic_tail=False)
    for name in ms.MEASURES:
        a, b = common[name].value, indep[name].value
        rel = abs(a - b) / abs(b) if b else abs(a)
        checks.append((f"t_s=1000 {name} {a:.6g} vs {b:.6g} rel {rel:.1e}", rel <= 1e-2))
    ok, detail = report(7, checks, time.time() - start, 600)
    assert ok, detail


def test_criterion_8_oracle_equivalence():
    start = time.time()
    checks = []
    worst = 0.0
    for s in (0.5, 1.5, 2.5, 3.0, 5.5):
        for t in (0.3, 1.0, 4.0, 12.0):
            ref = oracles.ohmic_gamma_quadrature(s, t)
            worst = max(worst, abs(deco.gamma_ohmic(deco.OhmicSpectrum(s), t) - ref) / abs(ref))
    checks.append((f"Gamma vs spectral quadrature rel {worst:.1e} on 20 points", worst <= 1e-6))
    for z in (-4.0, 0.0, 1.0):
        t, ref = oracles.pbg_volterra(z, 20.0, 1000)
        err = float(np.max(np.abs(deco.g_pbg(deco.PBGSpec(z), t) - ref)))
        checks.append((f"G band gap z={z} vs memory equation {err:.1e}", err <= 1e-4))
    models = [deph(3.0), ch.Dephasing2QIndependent(deco.OhmicSpectrum(4.0)),
              ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(3.0), 0.25)),
              ch.AmplitudeDamping1Q(deco.LorentzianSpec(3.0)),
              ch.AmplitudeDamping2QIndependent(deco.PBGSpec(0.5))]
    for m in models:
        worst = 0.0
        for t in np.linspace(0.35, 9.65, 10):
            try:
                ref = m.rhp_g_rates(float(t))
            except PoleProximity:
                continue
            worst = max(worst, abs(ch.rhp_g(m, float(t)) - ref))
        checks.append((f"rhp_g {m.label} vs rates {worst:.1e}", worst <= 1e-6))
    ok, detail = report(8, checks, time.time() - start, 300)
    assert ok, detail


def test_criterion_9_property_suites():
    start = time.time()
    rng = np.random.default_rng(2024)
    models = [deph(3.0), ch.Dephasing2QIndependent(deco.OhmicSpectrum(4.0)),
              ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(3.0), 0.25)),
              ch.AmplitudeDamping1Q(deco.LorentzianSpec(1.0)),
              ch.AmplitudeDamping2QIndependent(deco.PBGSpec(-2.0))]
    cptp = kraus = True
    for m in models:
        for _ in range(100):
            rho0 = random_state(rng, m.dim, int(rng.integers(1, m.dim + 1)))
            t = float(rng.uniform(0, 20))
            out = ch.apply(m, rho0, t)
            try:
                validate_density(out)
            except Exception:
                cptp = False
            ks = ch.kraus_at(m, t)
            if np.max(np.abs(sum(k @ rho0 @ k.conj().T for k in ks) - out)) > 1e-9:
                kraus = False
    contract = True
    tgrid = np.linspace(0, 20, 401)
    for m in (deph(1.5), ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))):
        for _ in range(20):
            u = haar_unitary(rng, 2)
            a = ch.apply(m, ket_to_dm(u[:, 0]), tgrid)
            b = ch.apply(m, ket_to_dm(u[:, 1]), tgrid)
            d = np.array([trace_distance(x, y) for x, y in zip(a, b)])
            contract &= bool(np.all(np.diff(d) <= 1e-10))
    z = rng.normal(size=200) * 3 + 1j * rng.normal(size=200) * 3
    refl = (np.max(np.abs(complex_erf(-z) + complex_erf(z))) <= 1e-12
            and np.max(np.abs(complex_erf(np.conj(z)) - np.conj(complex_erf(z)))) <= 1e-12)
    checks = [("CPTP sanity", cptp), ("Kraus/apply equivalence", kraus),
              ("trace-distance contractivity when divisible", contract), ("erf reflection identities", refl)]
    ok, detail = report(9, checks, time.time() - start, 300)
    assert ok, detail


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))

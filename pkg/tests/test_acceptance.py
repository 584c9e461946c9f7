"""Acceptance gate: ten end-to-end criteria, each printing one PASS/FAIL line.

Every expected number below is either a closed form of the catalog models
or a frozen regression value; tolerances are part of the contract.
Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
"""
import json
import math
import time

import numpy as np
import pytest

import tiplab as tl


def report(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] {name}{suffix}")


def test_criterion_01_critical_rate_moving_sn():
    ok, details = True, []
    for mu in (0.25, 0.5, 1.0):
        rstar = mu * mu / 4.0
        t0 = time.time()
        m = tl.make_model("moving-sn", mu=mu)
        rep = tl.find_critical_rate(m, r_range=(0.1 * rstar, 3.0 * rstar),
                                    resolution=1e-4)
        elapsed = time.time() - t0
        good = (
            len(rep.brackets) == 1
            and rep.brackets[0].lower <= rstar <= rep.brackets[0].upper
            and rep.brackets[0].width <= 1e-4
            and rep.brackets[0].classification == "saddle-node"
            and elapsed <= 60.0
        )
        ok &= good
        details.append(f"mu={mu}: width={rep.brackets[0].width:.2e} "
                       f"{elapsed:.1f}s" if rep.brackets else f"mu={mu}: none")
    report("criterion 1: moving-sn critical-rate recovery", ok, "; ".join(details))
    assert ok


def test_criterion_02_critical_rate_moving_cubic():
    ok, details = True, []
    for mu in (0.75, 1.0, 1.25):
        rstar = 2.0 * mu**3 / (3.0 * math.sqrt(3.0))
        m = tl.make_model("moving-cubic", mu=mu)
        rep = tl.find_critical_rate(m, r_range=(-3.0 * rstar, 3.0 * rstar),
                                    resolution=1e-3)
        pos = [b for b in rep.brackets if b.lower > 0]
        neg = [b for b in rep.brackets if b.upper < 0]
        good = (
            len(pos) == 1 and len(neg) == 1
            and pos[0].lower <= rstar <= pos[0].upper
            and neg[0].lower <= -rstar <= neg[0].upper
            and pos[0].width <= 1e-3 and neg[0].width <= 1e-3
            and pos[0].classification == "saddle-node"
            and neg[0].classification == "saddle-node"
        )
        ok &= good
        details.append(f"mu={mu}: +/-{rstar:.6f} "
                       f"widths {pos[0].width:.1e}/{neg[0].width:.1e}"
                       if pos and neg else f"mu={mu}: missing bracket")
    report("criterion 2: moving-cubic mirrored critical rates", ok, "; ".join(details))
    assert ok


def test_criterion_03_critical_rate_moving_pitchfork():
    ok, details = True, []
    for p in (1, 2):
        m = tl.make_model("moving-pitchfork", mu=1.0, p=p)
        rep = tl.find_critical_rate(m, r_range=(0.3, 3.0), resolution=1e-2)
        good = (
            len(rep.brackets) == 1
            and rep.brackets[0].lower <= 1.0 <= rep.brackets[0].upper
            and rep.brackets[0].width <= 1e-2
            and rep.brackets[0].classification == "pitchfork"
        )
        ok &= good
        details.append(
            f"p={p}: [{rep.brackets[0].lower:.4f}, {rep.brackets[0].upper:.4f}] "
            f"{rep.brackets[0].classification}" if rep.brackets else f"p={p}: none"
        )
    report("criterion 3: moving-pitchfork bracket and classification", ok,
           "; ".join(details))
    assert ok


def test_criterion_04_drift_never_tips():
    ok, details = True, []
    for r in (0.1, 0.5, 1.0, 2.0):
        m = tl.make_model("drift", r=r)
        horizon = min(15.0, 18.0 / max(r, 1.0))  # keep e^{rt} in range
        est = tl.estimate_pullback(m, window=(0.0, horizon + 1.0))
        fwd = tl.forward_attraction_test(
            m, candidate=est, offsets=[0.01, -0.01], horizon=horizon, eps=0.01
        )
        trk = tl.endpoint_tracking_test(
            m, curve=est, branch=lambda t: tl.oracle_curve(m, "qse_stable+", t),
            horizon=horizon, eps=0.01,
        )
        good = fwd.verdict == "holds" and trk.verdict == "fails"
        ok &= good
        details.append(f"r={r}: fwd={fwd.verdict} trk={trk.verdict}")
    t0 = time.time()
    rep = tl.find_critical_rate(tl.make_model("drift"), r_range=(1e-3, 10.0),
                                resolution=1e-4, window=(0.0, 1.0))
    elapsed = time.time() - t0
    scan_ok = len(rep.brackets) == 0 and not rep.flagged and elapsed <= 30.0
    ok &= scan_ok
    details.append(f"scan: {len(rep.brackets)} brackets {elapsed:.1f}s")
    report("criterion 4: drift holds forward attraction, never tips", ok,
           "; ".join(details))
    assert ok


def test_criterion_05_oracle_equivalence():
    ok, details = True, []
    cases = [
        ("drift", dict(r=0.5), "attractor+", "attracting"),
        ("moving-sn", dict(mu=0.5, r=1.0 / 32.0), "attractor+", "attracting"),
        ("moving-pitchfork", dict(mu=1.0, r=0.5), "attractor+", "attracting"),
        ("moving-sn", dict(mu=0.5, r=1.0 / 32.0), "repeller", "repelling"),
    ]
    for name, kw, key, sense in cases:
        m = tl.make_model(name, **kw)
        est = tl.estimate_pullback(m, window=(0.0, 4.0), sense=sense)
        oracle = np.vstack([tl.oracle_curve(m, key, t) for t in est.times])
        err = float(np.max(np.abs(est.states - oracle)))
        good = est.status == "converged" and err < 1e-6
        ok &= good
        details.append(f"{name}/{key}: {err:.1e}")
    report("criterion 5: pullback estimates match closed forms", ok,
           "; ".join(details))
    assert ok


def test_criterion_06_tracking_distance_formulas():
    ok, details = True, []

    mu, r = 0.5, 1.0 / 32.0
    m = tl.make_model("moving-sn", mu=mu, r=r)
    est = tl.estimate_pullback(m, window=(0.0, 10.0))
    grid = np.linspace(0.0, 10.0, 201)
    d = np.linalg.norm(
        est.eval(grid) - np.vstack([tl.oracle_curve(m, "qse_stable+", t)
                                    for t in grid]), axis=1)
    form = mu / 2.0 - math.sqrt(mu * mu / 4.0 - r)
    sn_ok = float(np.max(np.abs(d - form))) < 1e-6 and float(np.var(d)) < 1e-12
    ok &= sn_ok
    details.append(f"sn: |d-{form:.6f}|<1e-6 var={np.var(d):.1e}")

    mu, r = 1.0, 0.5
    m = tl.make_model("moving-pitchfork", mu=mu, r=r, p=1)
    est = tl.estimate_pullback(m, window=(0.0, 10.0))
    d = np.linalg.norm(
        est.eval(grid) - np.vstack([tl.oracle_curve(m, "qse_stable+", t)
                                    for t in grid]), axis=1)
    form = math.sqrt(r * r - r + 2.0 * mu - 2.0 * math.sqrt(mu * (mu - r)))
    pf_ok = (
        abs(form - 0.579471) < 1e-6
        and float(np.max(np.abs(d - form))) < 1e-6
        and float(np.var(d)) < 1e-12
    )
    ok &= pf_ok
    details.append(f"pf p=1: d={form:.6f} var={np.var(d):.1e}")

    m2 = tl.make_model("moving-pitchfork", mu=1.0, r=0.5, p=2)
    est2 = tl.estimate_pullback(m2, window=(1.0, 10.0))
    g2 = np.linspace(1.0, 10.0, 181)
    d2 = np.linalg.norm(
        est2.eval(g2) - np.vstack([tl.oracle_curve(m2, "qse_stable+", t)
                                   for t in g2]), axis=1)
    inc_ok = bool(np.all(np.diff(d2) > 0))
    ok &= inc_ok
    details.append(f"pf p=2 strictly increasing: {inc_ok}")

    report("criterion 6: tracking-distance formulas", ok, "; ".join(details))
    assert ok


def test_criterion_07_blow_up_time():
    m = tl.make_model("moving-sn", mu=0.5, r=3.0 / 32.0)
    traj = tl.integrate(m.field, [0.25], 0.0, 20.0,
                        tl.IntegratorConfig(escape_norm=m.escape_norm))
    t_sing = math.pi / (2.0 * math.sqrt(1.0 / 32.0))
    ok = traj.status == "escaped"
    if ok:
        lo, hi = traj.escape_bracket
        ok = lo <= t_sing <= hi and hi - lo <= 1e-3
        detail = f"bracket [{lo:.6f}, {hi:.6f}] contains {t_sing:.6f}"
    else:
        detail = f"status {traj.status}"
    report("criterion 7: blow-up time bracket", ok, detail)
    assert ok


def test_criterion_08_comoving_correspondence():
    rng = np.random.default_rng(2026)
    ok, details = True, []
    for name in ("moving-sn", "moving-cubic"):
        mu = float(rng.uniform(0.3, 1.5))
        r = float(rng.uniform(-0.25, 0.25))
        rep = tl.comoving_consistency_check(tl.make_model(name, mu=mu, r=r),
                                            seed=11)
        good = (rep["algebraic"]["max_residual"] <= 1e-12
                and rep["dynamic"]["passed"] and rep["passed"])
        ok &= good
        details.append(f"{name}(mu={mu:.3f},r={r:.3f}): {good}")
    for p in (1, 2, 3):
        mu = float(rng.uniform(0.5, 1.5))
        r = float(rng.uniform(-0.5, 1.5))
        rep = tl.comoving_consistency_check(
            tl.make_model("moving-pitchfork", mu=mu, r=r, p=p), seed=p)
        good = (rep["algebraic"]["max_residual"] <= 1e-12
                and rep["dynamic"]["passed"] and rep["passed"])
        ok &= good
        details.append(f"pf p={p}: {good}")
    report("criterion 8: co-moving correspondence checks", ok, "; ".join(details))
    assert ok


def test_criterion_09_cubic_tipping_is_local():
    mu = 1.0
    rstar = 2.0 * mu**3 / (3.0 * math.sqrt(3.0))
    r = rstar + 0.1
    m = tl.make_model("moving-cubic", mu=mu, r=r)

    probe = tl.locality_probe(m)
    est = tl.estimate_pullback(m, anchor=[-1.5 * mu])
    # independent root oracle for the surviving branch offset
    roots = np.sort(np.roots([-1.0, 0.0, mu * mu, -r]).real)
    u = est.states[:, 0] - r * est.times
    root_err = float(np.max(np.abs(u - roots[0])))
    near_ref = abs(roots[0] - (-2.0 / math.sqrt(3.0))) < 0.05

    ok = (
        probe["tipping_is_local"]
        and probe["n_attractors"] == 1
        and probe["forward_verdicts"] == ["holds"]
        and est.status == "converged"
        and root_err < 1e-6
        and near_ref
    )
    report("criterion 9: moving-cubic tipping is local", ok,
           f"surviving u={roots[0]:.4f} (near -1.1547), err={root_err:.1e}")
    assert ok


def test_criterion_10_property_suites():
    ok, details = True, []

    # integrator error tracks the requested tolerance
    md = tl.make_model("drift", r=0.5)
    exact = math.exp(1.0) / 1.5 + (1.0 - 1.0 / 1.5) * math.exp(-2.0)
    errs = []
    for tol in (1e-5, 1e-7, 1e-9, 1e-11):
        cfg = tl.IntegratorConfig(abs_tol=tol, rel_tol=tol, max_step=5.0,
                                  escape_norm=1e9)
        traj = tl.integrate(md.field, [1.0], 0.0, 2.0, cfg)
        errs.append(abs(traj.final_state[0] - exact))
    order_ok = all(errs[i + 1] <= errs[i] * 1.5 for i in range(3)) \
        and errs[0] > errs[-1] and errs[-1] < 1e-10
    ok &= order_ok
    details.append(f"order: errs {errs[0]:.1e}->{errs[-1]:.1e}")

    # pitchfork antisymmetry of estimated curves
    mp = tl.make_model("moving-pitchfork", mu=1.0, r=0.5)
    up = tl.estimate_pullback(mp, anchor=[1.0, 1.0])
    dn = tl.estimate_pullback(mp, anchor=[1.0, -1.0])
    anti = float(np.max(np.abs(up.states[:, 1] + dn.states[:, 1])))
    sym_ok = anti <= 1e-8 and float(np.max(np.abs(up.states[:, 0] - dn.states[:, 0]))) <= 1e-8
    ok &= sym_ok
    details.append(f"antisymmetry: {anti:.1e}")

    # sandwich: trajectories started between repeller and attractor stay
    # between them and converge to the attractor
    mu, r = 0.5, 1.0 / 32.0
    ms = tl.make_model("moving-sn", mu=mu, r=r)
    rho = math.sqrt(mu * mu / 4.0 - r)
    rng = np.random.default_rng(99)
    grid = np.linspace(0.0, 40.0, 81)
    zeta = np.array([tl.oracle_curve(ms, "repeller", t)[0] for t in grid])
    gamma = np.array([tl.oracle_curve(ms, "attractor+", t)[0] for t in grid])
    sandwich_ok = True
    worst = 0.0
    for _ in range(100):
        pad = 0.01 * 2.0 * rho
        x0 = rng.uniform(mu / 2.0 - rho + pad, mu / 2.0 + rho - pad)
        traj = tl.integrate(ms.field, [x0], 0.0, 40.0)
        if traj.status != "completed":
            sandwich_ok = False
            break
        xs = traj.eval(grid)[:, 0]
        if not np.all((xs >= zeta - 1e-9) & (xs <= gamma + 1e-9)):
            sandwich_ok = False
            break
        worst = max(worst, abs(xs[-1] - gamma[-1]))
    sandwich_ok = sandwich_ok and worst < 1e-3
    ok &= sandwich_ok
    details.append(f"sandwich: 100 ICs, final dist<{worst:.1e}")

    # parallel and sequential sweeps emit bitwise-identical JSON
    rates = np.linspace(0.01, 0.05, 5).tolist()
    seq = json.dumps(tl.sweep(ms, rates, threads=1, window=(0.0, 2.0)))
    par = json.dumps(tl.sweep(ms, rates, threads=4, window=(0.0, 2.0)))
    par_ok = seq == par
    ok &= par_ok
    details.append(f"sweep bitwise equal: {par_ok}")

    report("criterion 10: property suites", ok, "; ".join(details))
    assert ok

"""Acceptance gate: one test per advertised guarantee.

Each test prints a single pass/fail line (collected in the terminal
summary) with the measured numbers, then asserts at the stated tolerance.
Criterion 10 is implemented exactly as stated and is expected to fail:
the measured deviation rate on round-sphere latitudes is quadratic in m,
not linear, so the required slope band [0.8, 1.2] cannot be met. The
analysis lives in the decisions ledger next to the repository notes.
"""
from __future__ import annotations

import time

import numpy as np

from magflow import contact, hopf
from magflow.cli import main
from magflow.cz import (
    cz_fiber,
    dynamical_convexity_report,
    latitude_cz,
    latitude_deviation,
)
from magflow.flow import band_state, compare_level, integrate
from magflow.profiles import (
    load_profile,
    make_ellipsoid,
    make_negative_action,
    make_sphere,
    validate,
)
from magflow.reduced import (
    action_scan,
    birkhoff_action,
    find_latitude,
    latitude_action,
    rational_closures,
    regular_levels,
)


def criterion(num: int, name: str):
    def deco(fn):
        def run(acceptance_log, tmp_path):
            try:
                ok, detail = fn(tmp_path)
            except Exception as e:
                acceptance_log(f"criterion {num:2d} [{name}]: FAIL - "
                               f"raised {type(e).__name__}: {e}")
                raise
            acceptance_log(f"criterion {num:2d} [{name}]: "
                           f"{'PASS' if ok else 'FAIL'} - {detail}")
            assert ok, f"criterion {num} [{name}]: {detail}"
        run.__name__ = fn.__name__
        return run
    return deco


@criterion(1, "sphere identities")
def test_criterion_01(tmp_path):
    start = time.monotonic()
    p = make_sphere()
    mg = contact.m_gamma(p)
    worst_lat = 0.0
    worst_grid = 0.0
    for m in (0.5, 1.0, 2.0, 5.0):
        want = m * m + 1.0
        lat = find_latitude(p, m, "upper")
        if abs(lat.t0 - np.arctan(m)) > 1e-9:
            return False, f"latitude at t={lat.t0}, not arctan(m)"
        worst_lat = max(worst_lat, abs(lat.action - want) / want)
        for I in regular_levels(p, m, 50):
            A = birkhoff_action(p, m, float(I)).action
            worst_grid = max(worst_grid, abs(A - want) / want)
    elapsed = time.monotonic() - start
    ok = (mg < 1e-8 and worst_lat < 1e-6 and worst_grid < 1e-4
          and elapsed < 5.0)
    return ok, (f"m_gamma={mg:.2e}, latitude rel<={worst_lat:.2e}, "
                f"grid rel<={worst_grid:.2e}, {elapsed:.1f}s")


@criterion(2, "ellipsoid action positivity")
def test_criterion_02(tmp_path):
    start = time.monotonic()
    pairs = 0
    min_action = np.inf
    for ratio in (0.5, 1.0, 2.0, 4.0):
        p = make_ellipsoid(ratio)
        for m in (0.25, 0.5, 1.0, 2.0):
            if not contact.km_positive(p, m):
                continue
            rows = action_scan(p, m, n_levels=100)
            min_action = min(min_action, min(r.action for r in rows))
            pairs += 1
    elapsed = time.monotonic() - start
    ok = pairs > 0 and min_action > 0.0 and elapsed < 120.0
    return ok, (f"{pairs} (ratio, m) pairs with K_m>0, "
                f"min action {min_action:.6g} > 0, {elapsed:.1f}s")


@criterion(3, "large primitive norm profile")
def test_criterion_03(tmp_path):
    start = time.monotonic()
    out = tmp_path / "bigm.json"
    rc = main(["repro", "bigm", "--target", "10", "--out", str(out)])
    p = load_profile(str(out))
    area_residual = abs(p.gamma_integral() - 2.0)
    kmin = contact.min_curvature(p)
    mg = contact.m_gamma(p)
    elapsed = time.monotonic() - start
    ok = (rc == 0 and kmin >= -1e-9 and area_residual < 1e-6 / (2 * np.pi)
          and mg > 10.0 and elapsed < 30.0)
    return ok, (f"exit={rc}, min curvature {kmin:.3g}, area residual "
                f"{2 * np.pi * area_residual:.2e}, m_gamma={mg:.2f}, "
                f"{elapsed:.1f}s")


@criterion(4, "negative latitude action")
def test_criterion_04(tmp_path):
    start = time.monotonic()
    rc = main(["repro", "noncon", "--delta", "0.1", "--eps", "0.9"])
    p, t_lat = make_negative_action(0.1, 0.9)
    act = latitude_action(p, t_lat).action
    elapsed = time.monotonic() - start
    ok = rc == 0 and act < -0.5 and elapsed < 30.0
    return ok, f"exit={rc}, latitude action {act:.4f} < -0.5, {elapsed:.1f}s"


@criterion(5, "invariant conservation")
def test_criterion_05(tmp_path):
    rng = np.random.default_rng(2026)
    worst = 0.0
    done = 0
    while done < 20:
        ratio = rng.uniform(0.5, 2.0)
        m = rng.uniform(0.25, 2.0)
        p = make_ellipsoid(ratio)
        if not contact.km_positive(p, m):
            continue
        t0 = rng.uniform(0.25, 0.75) * p.ell
        phi0 = rng.uniform(-np.pi, np.pi)
        traj = integrate(p, m, (t0, phi0, 0.0), 1000.0, n_out=101)
        worst = max(worst, traj.I_drift)
        done += 1
    ok = worst < 1e-8
    return ok, f"worst drift {worst:.2e} over T=1e3 on 20 K_m>0 triples"


@criterion(6, "quadrature vs ODE cross-check")
def test_criterion_06(tmp_path):
    rng = np.random.default_rng(7)
    worst = 0.0
    done = 0
    while done < 20:
        ratio = rng.uniform(0.6, 1.8)
        m = rng.uniform(0.3, 2.0)
        p = make_ellipsoid(ratio)
        if not contact.km_positive(p, m):
            continue
        levels = regular_levels(p, m, 51)
        I = float(rng.choice(levels))
        rel = compare_level(p, m, I)["action_rel"]
        worst = max(worst, rel)
        done += 1
    ok = worst < 1e-3
    return ok, f"worst action rel {worst:.2e} on 20 random interior levels"


@criterion(7, "index desk checks")
def test_criterion_07(tmp_path):
    sphere = make_sphere()
    fib = cz_fiber(sphere, covers=2)
    lat = latitude_cz(sphere, 0.05, covers=2)
    intervals = [fib.result.interval, lat.result.interval]
    defects = [fib.det_defect, lat.det_defect]
    fib_iv_ok = (abs(fib.result.interval.lo - 2.0) < 1e-6
                 and abs(fib.result.interval.hi - 2.0) < 1e-6)
    ok = (fib_iv_ok and fib.result.degenerate and fib.result.index == 3
          and lat.result.index == 3
          and all(iv.length < 0.5 for iv in intervals)
          and all(d < 1e-6 for d in defects))
    return ok, (f"fiber x2 interval [{fib.result.interval.lo:.8f}, "
                f"{fib.result.interval.hi:.8f}] index {fib.result.index}, "
                f"latitude x2 index {lat.result.index}, max det defect "
                f"{max(defects):.2e}")


@criterion(8, "dynamical convexity evidence")
def test_criterion_08(tmp_path):
    sphere = make_sphere()
    parts = []
    ok = True
    for m in (0.01, 0.05):
        rep = dynamical_convexity_report(sphere, m)
        ok = ok and rep.verdict and rep.lhs < 0.6 and rep.rhs > 0.9
        parts.append(f"m={m}: lhs={rep.lhs:.4f} rhs={rep.rhs:.4f} "
                     f"verdict={rep.verdict}")
    return ok, "; ".join(parts)


@criterion(9, "quaternionic identities")
def test_criterion_09(tmp_path):
    res = hopf.pullback_residual(1000)
    rng = np.random.default_rng(17)
    sign_exact = True
    for _ in range(20):
        U = rng.normal(size=4)
        U /= np.linalg.norm(U)
        a, b = hopf.p0(U)
        c, d = hopf.p0(-U)
        sign_exact = (sign_exact and np.array_equal(a, c)
                      and np.array_equal(b, d))

    s = np.linspace(0.0, 2.0 * np.pi, 513)
    circ = np.stack([np.cos(s), np.sin(s),
                     np.zeros_like(s), np.zeros_like(s)], axis=1)
    U1 = rng.normal(size=4)
    U1 /= np.linalg.norm(U1)
    lk = hopf.gauss_linking(hopf.KnotPolyline(circ),
                            hopf.KnotPolyline(hopf.quat_mul(circ, U1)))

    # lifts of prime contractible closed orbits against their antipodes
    even = 0
    checked = 0
    for ratio, m in [(2.0, 1.0), (4.0, 0.5), (4.0, 1.0), (3.0, 0.8)]:
        if checked >= 10:
            break
        p = make_ellipsoid(ratio)
        for lev, c in rational_closures(p, m, n_levels=41, q_max=6):
            if not c.contractible or c.q < 2 or checked >= 10:
                continue
            traj = integrate(p, m, band_state(p, m, lev.I),
                             c.q * lev.period, n_out=1600 * c.q + 1)
            x, v = hopf.sphere_frames(np.pi * traj.t / p.ell, traj.phi,
                                      traj.theta)
            mis = max(float(np.linalg.norm(x[-1] - x[0])),
                      float(np.linalg.norm(v[-1] - v[0])))
            if mis > 1e-4:
                continue
            x[-1] = x[0]
            v[-1] = v[0]
            lift = hopf.lift_path(x, v)
            if lift.closed_after_one is not True:
                continue
            rep = hopf.antipodal_link_parity(
                hopf.knot_from_samples(lift.U, n=max(1024, 512 * c.q)))
            checked += 1
            if rep.disjoint and rep.even:
                even += 1

    scan = hopf.hessian_convexity(lambda z: 2.0, 64)
    eig_err = abs(scan.min_eigenvalue - 1.0)
    ok = (res < 1e-10 and sign_exact and abs(lk) == 1
          and checked == 10 and even == 10 and eig_err < 1e-6)
    return ok, (f"pullback {res:.2e}, p0 signs exact={sign_exact}, "
                f"fiber lk={lk}, antipodal even {even}/{checked}, "
                f"Hessian eig err {eig_err:.2e}")


@criterion(10, "linear deviation scaling")
def test_criterion_10(tmp_path):
    # stated requirement: log-log slope of sup||B - J|| vs m equals 1 +- 0.2.
    # The measured rate is quadratic (deviation = m^2 / (1 + m^2)), so this
    # is expected to fail; the analysis is in the decisions ledger.
    sphere = make_sphere()
    ms = np.array([0.02, 0.04, 0.08, 0.16])
    devs = np.array([latitude_deviation(sphere, m) for m in ms])
    slope = float(np.polyfit(np.log(ms), np.log(devs), 1)[0])
    ok = abs(slope - 1.0) <= 0.2
    return ok, (f"measured slope {slope:.3f}, required 1.0 +- 0.2 "
                f"(deviation is quadratic in m; see decisions ledger)")

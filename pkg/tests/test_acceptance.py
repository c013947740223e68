"""Acceptance checks, one test each.  Every test prints one PASS/FAIL line tagged [1]..[9]."""

import time

import numpy as np
import pytest

from nlkg import Params, RadialGrid, State
from nlkg.core import scale_pair, scale_state, support_radius
from nlkg.evolution import EvolveConfig, Outcome, evolve
from nlkg.functionals import (
    action_decomposition,
    charge_Q,
    dilation_H,
    energy_E,
    kml,
    report,
    variational_suite,
)
from nlkg.groundstate import check_blowup2, polish, solve_scalar, solve_sp, standing_wave
from nlkg.variational import check_key_proposition, check_vc3, g_function, g_scan, membership
from nlkg.virial import check_virial_identity

from conftest import gaussian_mix, record_acceptance

CASES = {
    "N=2 (1,2,0.5)": Params(1.0, 2.0, 0.5, 2),
    "N=3 (1,2,0.4)": Params(1.0, 2.0, 0.4, 3),
}
NONRESONANT = Params(1.0, 2.3, 0.4, 3)


LABELS = {
    1: 'functional identities',
    2: 'scaling',
    3: 'ground state',
    4: 'symmetric oracle',
    5: 'g function',
    6: 'conservation',
    7: 'virial identity',
    8: 'instability',
    9: 'key inequality',
}


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  [{n}] {LABELS[n]}: {detail}"
    record_acceptance(line)
    assert ok, line


def rel(a, b, scale=None):
    scale = max(abs(a), abs(b)) if scale is None else scale
    return abs(a - b) / scale if scale else abs(a - b)


def dyn_standing_wave(p, npts=2048, rmax=60.0):
    gs = solve_sp(p, RadialGrid(p.dim, 20.0, 4096))
    gs_dyn = polish(gs, RadialGrid(p.dim, rmax, npts))
    return gs_dyn, standing_wave(gs_dyn)


def test_functional_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(20):
        dim = 2 + k % 2
        p = Params(1.0, 2.0, 0.5, 2) if dim == 2 else Params(1.0, 2.3, 0.4, 3)
        grid = RadialGrid(dim, 20.0, 2048)
        rng = np.random.default_rng(1000 + k)
        s = State.from_arrays(grid, *(gaussian_mix(grid, rng, terms=4) for _ in range(4)))
        r = report(s, p)
        a = p.alpha
        checks = [
            (r.E, r.K + r.M - r.L),
            (r.H, -a * r.K + a * r.M - (a + 2) * r.L),
            (r.Somega, r.E - p.omega * r.Q),
            ((a + 2) * r.Jomega - r.Pomega, 2 * r.Momega),
            (a * r.Jomega - r.Pomega, 2 * r.L),
            (r.Somega, action_decomposition(s, p)),
        ]
        scale = max(abs(r.K), abs(r.M), abs(r.L), abs(r.Q), abs(r.Momega))
        worst = max(worst, max(abs(x - y) / scale for x, y in checks))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-10 and dt < 5, f"max relative identity error {worst:.2e} (tol 1e-10), {dt:.2f} s")


def test_scaling():
    t0 = time.perf_counter()
    q_err = e_err = h_err = 0.0
    for dim, p in ((2, Params(1.0, 2.0, 0.5, 2)), (3, Params(1.0, 2.0, 0.4, 3))):
        grid = RadialGrid(dim, 20.0, 4096)
        rng = np.random.default_rng(7 + dim)
        s = State.from_arrays(grid, *(gaussian_mix(grid, rng, width=(0.5, 1.5)) for _ in range(4)))
        K, M, L = kml(s, p)
        a = p.alpha
        Q0 = charge_Q(s)
        for lam in (0.5, 0.9, 1.1, 2.0):
            sl = scale_state(s, lam)
            q_err = max(q_err, rel(charge_Q(sl), Q0, abs(Q0)))
            closed = lam**-a * K + lam**a * M - lam ** (a + 2) * L
            e_err = max(e_err, rel(energy_E(sl, p), closed, abs(closed)))
        eps = 1e-4
        fd = (energy_E(scale_state(s, 1 + eps), p) - energy_E(scale_state(s, 1 - eps), p)) / (2 * eps)
        H = dilation_H(s, p)
        h_err = max(h_err, rel(fd, H, abs(H)))
    dt = time.perf_counter() - t0
    ok = q_err <= 1e-6 and e_err <= 1e-4 and h_err <= 1e-5 and dt < 10
    verdict(2, ok, f"Q {q_err:.2e} (1e-6), E-expansion {e_err:.2e} (1e-4), H vs dE/dlam {h_err:.2e} (1e-5), {dt:.2f} s")


@pytest.mark.parametrize("name", list(CASES))
def test_ground_state(name):
    p = CASES[name]
    t0 = time.perf_counter()
    gs = solve_sp(p, RadialGrid(p.dim, 20.0, 4096))
    J, Mw, Kw, Pw = variational_suite(gs.u, p)
    b = check_blowup2(gs)
    sw = standing_wave(gs)
    e = 1e-3
    E = [energy_E(scale_state(sw, 1 + k * e), p) for k in (-2, -1, 0, 1, 2)]
    fd = (-E[0] + 16 * E[1] - 30 * E[2] + 16 * E[3] - E[4]) / (12 * e * e)
    fd_err = rel(fd, b.i, abs(b.i))
    dt = time.perf_counter() - t0
    ok = (
        gs.residual <= 1e-8
        and abs(Pw) <= 1e-6 * Mw
        and abs(Kw) <= 1e-6 * Mw
        and b.rel_gap_i_ii <= 1e-8
        and b.rel_gap_i_iii <= 1e-8
        and fd_err <= 1e-3
        and dt < 60
    )
    verdict(
        3,
        ok,
        f"{name}: residual {gs.residual:.1e}, |P|/M_w {abs(Pw) / Mw:.1e}, |K|/M_w {abs(Kw) / Mw:.1e}, "
        f"(i)+a(ii) {b.rel_gap_i_ii:.1e}, (i)+2(iii) {b.rel_gap_i_iii:.1e}, d2E fd {fd_err:.1e}, {dt:.2f} s",
    )


def test_symmetric_oracle():
    t0 = time.perf_counter()
    p = Params(1.0, np.sqrt(1.75), 0.5, 2)
    assert abs(p.mu1 - p.mu2) < 1e-14
    grid = RadialGrid(2, 20.0, 4096)
    gs = solve_sp(p, grid)
    a, b = gs.phi1.values.real, gs.phi2.values.real
    mask = a > 1e-8 * a.max()
    mask[-1] = False
    ratio_err = np.abs(a[mask] / b[mask] / np.sqrt(2) - 1).max()
    w = solve_scalar(p.mu1, grid)
    J_sym = variational_suite((w * (1 / np.sqrt(2)), w * 0.5), p)[0]
    J = variational_suite(gs.u, p)[0]
    j_err = rel(J, J_sym, abs(J_sym))
    dt = time.perf_counter() - t0
    verdict(4, ratio_err <= 1e-6 and j_err <= 1e-5 and dt < 60,
            f"phi1/phi2 vs sqrt2 {ratio_err:.1e} (1e-6), J vs scalar build {j_err:.1e} (1e-5), {dt:.2f} s")


def test_g_function():
    t0 = time.perf_counter()
    at_one = [g_function(1.0, beta) for beta in (1.0001, 2.0, 3.0)]
    scans = {beta: g_scan(beta, 999) for beta in (2.0, 3.0)}
    s = np.arange(1, 1000) / 1000
    closed = np.abs(g_function(s, 2.0) - (s - 1) ** 2 * (1 - s)).max()
    dt = time.perf_counter() - t0
    ok = all(v == 0.0 for v in at_one) and all(v[0] for v in scans.values()) and closed <= 1e-14 and dt < 1
    verdict(5, ok, f"g(1) = {at_one}, min g beta=2: {scans[2.0][1]:.3e}, beta=3: {scans[3.0][1]:.3e}, "
                   f"closed form {closed:.1e} (1e-14), {dt:.3f} s")


def _conservation_run(sw, p, dt_step):
    """E and Q drift over [0, 10] and the worst |u1(t,0)| deviation sampled every 0.5."""
    phi0 = abs(sw.u1.values[0])
    cfg = EvolveConfig(dt=dt_step, t_end=0.5, record_every=int(round(0.1 / dt_step)))
    E0, Q0 = report(sw, p).E, charge_Q(sw)
    dE = dQ = du = 0.0
    s = sw
    for _ in range(20):
        res = evolve(s, p, cfg)
        assert res.outcome is Outcome.COMPLETED
        for rec in res.records:
            dE = max(dE, abs(rec.E - E0) / abs(E0))
            dQ = max(dQ, abs(rec.Q - Q0) / abs(Q0))
        s = res.final_state
        du = max(du, abs(abs(s.u1.values[0]) - phi0) / phi0)
    return dE, dQ, du


def test_conservation():
    t0 = time.perf_counter()
    p = CASES["N=2 (1,2,0.5)"]
    _, sw = dyn_standing_wave(p)
    dE1, dQ1, du1 = _conservation_run(sw, p, 0.01)
    dE2, dQ2, du2 = _conservation_run(sw, p, 0.005)
    dt = time.perf_counter() - t0
    ratio = dE1 / dE2
    # the scheme conserves Q exactly up to rounding, so its drift has no dt dependence to measure
    q_floor = max(dQ1, dQ2) <= 1e-12
    ok = dE1 <= 1e-4 and dQ1 <= 1e-4 and du1 <= 1e-2 and ratio >= 3.5 and q_floor and dt < 120
    verdict(6, ok, f"dt=0.01: dE {dE1:.2e}, dQ {dQ1:.1e}, |u1(t,0)| {du1:.1e}; halving dt: dE ratio {ratio:.2f} (>=3.5), "
                   f"dQ {dQ2:.1e} (rounding floor), {dt:.2f} s")


def test_virial():
    t0 = time.perf_counter()
    p = CASES["N=2 (1,2,0.5)"]
    _, sw = dyn_standing_wave(p)
    s0 = scale_state(sw, 1.05)
    rho = 50.0
    res = evolve(s0, p, EvolveConfig(dt=0.005, t_end=5.0, record_every=10), rho=rho)
    rep = check_virial_identity(res, rho, support_radius(s0), t_window=5.0)
    # for information: the same check without the 1% energy gate, into the under-resolved collapse
    raw = check_virial_identity(res, rho, support_radius(s0), t_window=5.0, energy_gate=np.inf)
    dt = time.perf_counter() - t0
    verdict(7, rep.max_rel_deviation <= 1e-2 and dt < 120,
            f"max|-dI/dt - H|/max|H| = {rep.max_rel_deviation:.2e} (1e-2) over resolved t <= {rep.t_checked:g} "
            f"(run ends at {res.t_final:g}; ungated {raw.max_rel_deviation:.2g} to t={raw.t_checked:g}), "
            f"support {rep.support_radius:.1f} + t <= rho {rho:g}, {dt:.2f} s")


INSTABILITY = [
    ("N=2 (1,2,0.5)", CASES["N=2 (1,2,0.5)"], 0.01, 10),
    ("N=3 (1,2,0.4)", CASES["N=3 (1,2,0.4)"], 0.001, 50),
    ("N=3 (1,2.3,0.4) non-resonant", NONRESONANT, 0.001, 50),
]


@pytest.mark.parametrize("name,p,dt_step,rec", INSTABILITY, ids=[c[0] for c in INSTABILITY])
def test_instability(name, p, dt_step, rec):
    t0 = time.perf_counter()
    gs_dyn, sw = dyn_standing_wave(p)
    cfg = EvolveConfig(dt=dt_step, t_end=10.0, record_every=rec)

    s_up = scale_state(sw, 1.05)
    in_B = membership(s_up, gs_dyn).in_B
    up = evolve(s_up, p, cfg)
    recs = up.finite_records()
    H_neg = all(r.H < 0 for r in recs)
    P_neg = all(r.P_omega < 0 for r in recs)
    blew = up.outcome is Outcome.BLOWUP and np.isfinite(up.t_final) and up.t_final < cfg.t_end

    flat = evolve(sw, p, cfg)
    x = np.array([r.xnorm for r in flat.records])
    norm_dev = np.abs(x / x[0] - 1).max()
    dt = time.perf_counter() - t0
    ok = in_B and H_neg and P_neg and blew and flat.outcome is Outcome.COMPLETED and norm_dev <= 0.1 and dt < 600
    verdict(8, ok, f"{name}: lambda=1.05 in_B={in_B}, H<0 {H_neg}, P<0 {P_neg}, outcome {up.outcome.value} "
                   f"at t={up.t_final:g}; lambda=1 {flat.outcome.value}, norm deviation {norm_dev:.3f} (0.1), "
                   f"dt={dt_step:g}, {dt:.1f} s")


@pytest.mark.parametrize("name", list(CASES))
def test_key_proposition(name):
    t0 = time.perf_counter()
    p = CASES[name]
    gs = solve_sp(p, RadialGrid(p.dim, 20.0, 4096))
    sw = standing_wave(gs)
    slacks, vc3 = [], []
    ok = True
    for lam in (1.05, 1.1, 1.5):
        rep = check_key_proposition(scale_state(sw, lam), gs)
        slacks.append(rep.slack)
        ok &= rep.passed
        v = check_vc3(scale_pair(gs.u, lam), gs)
        vc3.append(min(v.dM, v.dL))
        ok &= v.passed
    dt = time.perf_counter() - t0
    verdict(9, ok and dt < 30,
            f"{name}: slacks {', '.join(f'{x:.3g}' for x in slacks)} (>= -1e-6 a E_ref = {-1e-6 * rep.alpha_E_ref:.1e}), "
            f"min VC3 difference {min(vc3):.3g} > 0, {dt:.2f} s")

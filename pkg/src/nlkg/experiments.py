"""End-to-end instability experiment for scaled standing waves.

Pipeline: ground state on a fine grid, consistency checks, transfer to the
dynamics grid, then for each lambda the scaled data
((phi)^lam, (psi)_lam) is classified and evolved.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import RadialGrid, scale_state, support_radius
from .evolution import EvolveConfig, Outcome, evolve
from .functionals import kml, report, variational_suite
from .groundstate import check_blowup2, polish, sc1_holds, solve_sp, standing_wave
from .variational import membership
from .virial import check_virial_identity

DEFAULT_LAMBDAS = (0.98, 1.0, 1.02, 1.05, 1.1)
CONSERVATION_GATE = 1e-2


@dataclass(frozen=True)
class ExperimentConfig:
    params: object
    gs_grid: RadialGrid
    dyn_grid: RadialGrid
    evolve: EvolveConfig
    lambda_list: tuple = DEFAULT_LAMBDAS
    rho: float = None
    gs_tol: float = 1e-10
    gs_max_iter: int = 2000
    polish: bool = True

    def __post_init__(self):
        from .errors import ParameterError

        if not self.lambda_list or any(not lam > 0 for lam in self.lambda_list):
            raise ParameterError("lambda_list values must be positive")
        for g in (self.gs_grid, self.dyn_grid):
            if g.dim != self.params.dim:
                raise ParameterError("grid dimension does not match params.dim")


@dataclass
class LambdaEntry:
    lam: float
    membership: dict
    outcome: str
    t_final: float
    H_min: float
    H_max: float
    P_min: float
    P_max: float
    drift_E: float
    drift_Q: float
    reliable: bool
    resolved_until: float
    xnorm_ratio_max: float
    virial_deviation: float = None
    error: str = None
    trajectory_csv: str = None

    @property
    def H_negative_throughout(self):
        return bool(self.H_max < 0)

    @property
    def P_negative_throughout(self):
        return bool(self.P_max < 0)

    def as_dict(self):
        d = dict(self.__dict__)
        d["lambda"] = d.pop("lam")
        d["H_negative_throughout"] = self.H_negative_throughout
        d["P_negative_throughout"] = self.P_negative_throughout
        return d


@dataclass
class ExperimentReport:
    params: dict
    ground_state: dict
    blowup2: dict
    sc1_satisfied: bool
    sc2_satisfied: bool
    entries: list = field(default_factory=list)
    virial_deviation: float = None

    def entry(self, lam):
        for e in self.entries:
            if abs(e.lam - lam) < 1e-12:
                return e
        raise KeyError(lam)

    def as_dict(self):
        return {
            "params": self.params,
            "ground_state": self.ground_state,
            "blowup2": self.blowup2,
            "sc1_satisfied": self.sc1_satisfied,
            "sc2_satisfied": self.sc2_satisfied,
            "virial_deviation": self.virial_deviation,
            "entries": [e.as_dict() for e in self.entries],
        }


def _resolved_until(records, gate):
    """Time of the last record before the energy drift first exceeds ``gate``."""
    E0 = records[0].E
    scale = abs(E0) if E0 != 0 else 1.0
    last = records[0].t
    for rec in records:
        if abs(rec.E - E0) > gate * scale:
            return last
        last = rec.t
    return last


def _run_one(lam, sw, gs_dyn, cfg, out_dir):
    p = cfg.params
    s0 = scale_state(sw, lam)
    mem = membership(s0, gs_dyn)
    path = None
    sink = None
    writer = None
    if out_dir is not None:
        from .io import TrajectoryWriter

        path = os.path.join(out_dir, f"trajectory_lambda_{lam:g}.csv")
        writer = TrajectoryWriter(path)
        sink = writer
    rho = cfg.rho
    try:
        res = evolve(s0, p, cfg.evolve, rho=rho, sink=sink)
    except Exception as exc:  # per-entry failures are reported, not raised
        if writer is not None:
            writer.close(exc)
        return LambdaEntry(
            lam=lam, membership=mem.as_dict(), outcome=Outcome.FAILURE.value,
            t_final=float("nan"), H_min=float("nan"), H_max=float("nan"),
            P_min=float("nan"), P_max=float("nan"), drift_E=float("nan"),
            drift_Q=float("nan"), reliable=False, resolved_until=float("nan"),
            xnorm_ratio_max=float("nan"), error=f"{type(exc).__name__}: {exc}",
        )
    if writer is not None:
        writer.close()
    recs = res.finite_records()
    H = np.array([r.H for r in recs])
    P = np.array([r.P_omega for r in recs])
    x0 = recs[0].xnorm
    # drifts before the record that crossed the blow-up threshold
    pre = recs[:-1] if res.outcome is Outcome.BLOWUP and len(recs) > 1 else recs
    E0, Q0 = pre[0].E, pre[0].Q
    dE = max(abs(r.E - E0) for r in pre) / (abs(E0) if E0 else 1.0)
    dQ = max(abs(r.Q - Q0) for r in pre) / (abs(Q0) if Q0 else 1.0)
    vdev = None
    if rho is not None:
        try:
            rep = check_virial_identity(
                res, rho, support_radius(s0), t_window=cfg.evolve.t_end
            )
            vdev = rep.max_rel_deviation
        except ValueError:
            vdev = None
    return LambdaEntry(
        lam=lam,
        membership=mem.as_dict(),
        outcome=res.outcome.value,
        t_final=res.t_final,
        H_min=float(H.min()),
        H_max=float(H.max()),
        P_min=float(P.min()),
        P_max=float(P.max()),
        drift_E=float(dE),
        drift_Q=float(dQ),
        reliable=bool(dE <= CONSERVATION_GATE and dQ <= CONSERVATION_GATE),
        resolved_until=_resolved_until(recs, CONSERVATION_GATE),
        xnorm_ratio_max=float(max(r.xnorm for r in recs) / x0) if x0 > 0 else float("nan"),
        virial_deviation=vdev,
        trajectory_csv=path,
    )


def thread_cap(n_tasks):
    env = os.environ.get("NLKG_THREADS", "").strip()
    if env:
        try:
            return max(1, min(int(env), n_tasks))
        except ValueError:
            pass
    return max(1, n_tasks)


def prepare_ground_states(cfg):
    """(ground state on the fine grid, ground state on the dynamics grid)."""
    gs = solve_sp(cfg.params, cfg.gs_grid, tol=cfg.gs_tol, max_iter=cfg.gs_max_iter)
    if cfg.polish:
        gs_dyn = polish(gs, cfg.dyn_grid, tol=cfg.gs_tol, max_iter=cfg.gs_max_iter)
    else:
        from .core import resample
        from .groundstate import GroundState, sp_residual

        f1 = resample(gs.phi1, cfg.dyn_grid)
        f2 = resample(gs.phi2, cfg.dyn_grid)
        res = sp_residual(cfg.dyn_grid, cfg.params, f1.values.real, f2.values.real)
        gs_dyn = GroundState(f1, f2, cfg.params, res, 0)
    return gs, gs_dyn


def run_instability(cfg, out_dir=None, workers=None):
    """Run the full experiment; returns an ExperimentReport.

    Ground-state failures propagate (ConvergenceError); failures of
    individual runs are recorded in their entries.
    """
    p = cfg.params
    gs, gs_dyn = prepare_ground_states(cfg)
    b2 = check_blowup2(gs)
    J, Mw, Kw, Pw = variational_suite(gs.u, p)
    sw = standing_wave(gs_dyn)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    lams = [float(x) for x in cfg.lambda_list]
    n = workers or thread_cap(len(lams))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            entries = list(pool.map(lambda lam: _run_one(lam, sw, gs_dyn, cfg, out_dir), lams))
    else:
        entries = [_run_one(lam, sw, gs_dyn, cfg, out_dir) for lam in lams]
    devs = [e.virial_deviation for e in entries if e.membership["in_B"] and e.virial_deviation is not None]
    return ExperimentReport(
        params={"m1": p.m1, "m2": p.m2, "omega": p.omega, "dim": p.dim},
        ground_state={
            "residual": gs.residual,
            "iterations": gs.iterations,
            "J_omega": J,
            "M_omega": Mw,
            "K_omega": Kw,
            "P_omega": Pw,
            "dynamics_grid_residual": gs_dyn.residual,
        },
        blowup2=b2.as_dict(),
        sc1_satisfied=bool(sc1_holds(p)),
        sc2_satisfied=bool(b2.ii >= 0),
        entries=entries,
        virial_deviation=max(devs) if devs else None,
    )


def scan_lambda_energy(gs, lambdas):
    """E, H, P_omega and Q along the scaling curve of the standing wave.

    Closed forms use K(psi), M(phi), L(phi), M_omega(phi) only; the
    ``*_interp`` columns evaluate the interpolated scaled state directly.
    """
    p = gs.params
    a = p.alpha
    sw = standing_wave(gs)
    K, M, L = kml(sw, p)
    Mw = variational_suite(gs.u, p)[1]
    base = report(sw, p)
    rows = []
    for lam in lambdas:
        lam = float(lam)
        rep = report(scale_state(sw, lam), p)
        rows.append(
            {
                "lambda": lam,
                "E": lam**-a * K + lam**a * M - lam ** (a + 2) * L,
                "H": -a * lam**-a * K + a * lam**a * M - (a + 2) * lam ** (a + 2) * L,
                "P_omega": a * lam**a * Mw - (a + 2) * lam ** (a + 2) * L,
                "Q": base.Q,
                "E_interp": rep.E,
                "H_interp": rep.H,
                "P_omega_interp": rep.Pomega,
                "Q_interp": rep.Q,
            }
        )
    return rows

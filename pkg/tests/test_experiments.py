import numpy as np
import pytest

from nlkg import Params, RadialGrid
from nlkg import experiments as ex
from nlkg.evolution import EvolveConfig
from nlkg.errors import ParameterError
from nlkg.experiments import ExperimentConfig, run_instability, scan_lambda_energy, thread_cap
from nlkg.groundstate import check_blowup2

from conftest import P2

LAMS = [0.5, 0.9, 0.98, 1.0, 1.02, 1.05, 1.1, 1.5, 2.0]


@pytest.fixture(scope="module")
def table(gs2):
    return scan_lambda_energy(gs2, LAMS)


class TestScan:
    def test_unit_row(self, table):
        row = table[LAMS.index(1.0)]
        scale = abs(row["E"])
        assert abs(row["H"]) <= 1e-6 * scale
        assert abs(row["P_omega"]) <= 1e-6 * scale

    def test_energy_drops_above_one(self, table, gs2):
        assert check_blowup2(gs2).ii >= 0
        E1 = table[LAMS.index(1.0)]["E"]
        for row in table:
            if row["lambda"] > 1:
                assert row["E"] < E1
                assert row["H"] < 0
                assert row["P_omega"] < 0

    def test_charge_constant(self, table):
        Q = table[0]["Q"]
        for row in table:
            assert row["Q"] == Q
            assert row["Q_interp"] == pytest.approx(Q, rel=1e-6)

    def test_closed_form_matches_interpolated(self, table):
        for row in table:
            assert row["E_interp"] == pytest.approx(row["E"], rel=1e-4)


class TestConfig:
    def _cfg(self, **kw):
        args = dict(
            params=P2,
            gs_grid=RadialGrid(2, 20.0, 1024),
            dyn_grid=RadialGrid(2, 60.0, 1024),
            evolve=EvolveConfig(dt=0.01, t_end=10.0, record_every=10),
        )
        args.update(kw)
        return ExperimentConfig(**args)

    def test_defaults(self):
        assert self._cfg().lambda_list == (0.98, 1.0, 1.02, 1.05, 1.1)

    @pytest.mark.parametrize("lams", [(), (1.0, 0.0), (-1.0,)])
    def test_bad_lambdas(self, lams):
        with pytest.raises(ParameterError):
            self._cfg(lambda_list=lams)

    def test_dimension_check(self):
        with pytest.raises(ParameterError):
            self._cfg(dyn_grid=RadialGrid(3, 60.0, 1024))

    def test_thread_cap(self, monkeypatch):
        monkeypatch.delenv("NLKG_THREADS", raising=False)
        assert thread_cap(5) == 5
        monkeypatch.setenv("NLKG_THREADS", "2")
        assert thread_cap(5) == 2
        monkeypatch.setenv("NLKG_THREADS", "junk")
        assert thread_cap(3) == 3


@pytest.fixture(scope="module")
def small_report(tmp_path_factory):
    cfg = ExperimentConfig(
        params=P2,
        gs_grid=RadialGrid(2, 20.0, 2048),
        dyn_grid=RadialGrid(2, 60.0, 2048),
        evolve=EvolveConfig(dt=0.01, t_end=10.0, record_every=10),
        rho=50.0,
    )
    out = tmp_path_factory.mktemp("exp")
    return run_instability(cfg, out_dir=str(out)), out


class TestRun:
    def test_one_entry_per_lambda(self, small_report):
        rep, _ = small_report
        assert [e.lam for e in rep.entries] == [0.98, 1.0, 1.02, 1.05, 1.1]

    def test_below_one(self, small_report):
        rep, _ = small_report
        e = rep.entry(0.98)
        assert not e.membership["in_B"]
        assert e.membership["minus_P_omega"] < 0

    def test_above_one(self, small_report):
        rep, _ = small_report
        for lam in (1.02, 1.05, 1.1):
            e = rep.entry(lam)
            assert e.membership["in_B"]
            assert e.outcome == "blowup_detected"
            assert e.H_negative_throughout and e.P_negative_throughout

    def test_unit(self, small_report):
        rep, _ = small_report
        e = rep.entry(1.0)
        assert e.outcome == "completed"
        assert e.reliable
        assert e.xnorm_ratio_max <= 1.1

    def test_global_fields(self, small_report):
        rep, out = small_report
        assert rep.sc1_satisfied and rep.sc2_satisfied
        assert rep.virial_deviation is not None and rep.virial_deviation <= 1e-2
        d = rep.as_dict()
        assert len(d["entries"]) == 5
        assert sorted(p.name for p in out.iterdir()) == sorted(
            f"trajectory_lambda_{lam:g}.csv" for lam in (0.98, 1.0, 1.02, 1.05, 1.1)
        )

    def test_gate_is_literal(self, small_report):
        rep, _ = small_report
        for e in rep.entries:
            assert e.reliable == (e.drift_E <= ex.CONSERVATION_GATE and e.drift_Q <= ex.CONSERVATION_GATE)
            assert e.resolved_until <= e.t_final

    def test_entry_failure_recorded(self, monkeypatch):
        def boom(*a, **k):
            raise FloatingPointError("synthetic")

        monkeypatch.setattr(ex, "evolve", boom)
        cfg = ExperimentConfig(
            params=P2,
            gs_grid=RadialGrid(2, 20.0, 512),
            dyn_grid=RadialGrid(2, 60.0, 512),
            evolve=EvolveConfig(dt=0.01, t_end=1.0),
            lambda_list=(1.0,),
        )
        rep = run_instability(cfg, workers=1)
        e = rep.entry(1.0)
        assert e.outcome == "numerical_failure" and "synthetic" in e.error
        assert np.isnan(e.t_final)

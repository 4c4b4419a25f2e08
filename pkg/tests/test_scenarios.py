import math

import numpy as np
import pytest


from cdmlfc.scenarios import (
    Composite,
    Metrics,
    Sine,
    Step,
    SweepSpec,
    UniformRandom,
    case1_load,
    evaluate,
    indices,
    profile_from_json,
    profile_to_json,
    realize,
    run_case,
    sensitivity_sweep,
    table6_specs,
    transient_measures,
    tuning_objective,
)
from cdmlfc.sim import Trajectory


def make_traj(t, df1, df2=None, dptie=None):
    n = len(t)
    z = np.zeros(n)
    return Trajectory(
        t=np.asarray(t, dtype=float),
        df1=np.asarray(df1, dtype=float),
        df2=z if df2 is None else np.asarray(df2, dtype=float),
        dptie=z if dptie is None else np.asarray(dptie, dtype=float),
        ace1=z.copy(),
        ace2=z.copy(),
        u1=z.copy(),
        u2=z.copy(),
        dpl1=z.copy(),
        dpl2=z.copy(),
    )


class TestLoadProfiles:
    def test_step(self):
        fn = realize(Step(0.01, 1.0), 10.0)
        assert fn(0.99) == 0.0
        assert fn(1.0) == 0.01

    def test_sine(self):
        fn = realize(Sine(0.01, 0.05, 0.0), 40.0)
        assert fn(5.0) == pytest.approx(0.01)  # quarter period of 20 s
        assert fn(10.0) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_random_deterministic_and_bounded(self):
        a = realize(UniformRandom(0.01, 10.0, 7), 100.0)
        b = realize(UniformRandom(0.01, 10.0, 7), 100.0)
        ts = np.linspace(0, 100, 333)
        va = [a(float(t)) for t in ts]
        assert va == [b(float(t)) for t in ts]
        assert all(abs(v) <= 0.01 for v in va)
        assert a(0.0) == a(9.99) != a(10.01)

    def test_composite_case1(self):
        fn = realize(case1_load(), 60.0)
        assert fn(0.5) == 0.0
        assert fn(1.5) == pytest.approx(0.01)
        assert fn(30.5) == pytest.approx(0.02)

    def test_json_roundtrip(self):
        for p in (Step(0.01, 1.0), Sine(0.01, 0.05, 2.0), UniformRandom(0.02, 5.0, 3), case1_load(), None):
            assert profile_from_json(profile_to_json(p)) == p


class TestIndices:
    def test_constant_df1(self):
        t = np.linspace(0.0, 10.0, 1001)
        traj = make_traj(t, np.full_like(t, 0.5))
        m = indices(traj)
        assert m.iae == pytest.approx(5.0, rel=1e-12)
        assert m.itae == pytest.approx(0.5 * 100.0 / 2.0, rel=1e-6)
        assert m.ise == pytest.approx(2.5, rel=1e-12)
        assert m.itse == pytest.approx(0.25 * 50.0, rel=1e-6)

    def test_both_areas_summed(self):
        t = np.linspace(0.0, 2.0, 201)
        traj = make_traj(t, np.full_like(t, 1.0), df2=np.full_like(t, -1.0))
        m = indices(traj)
        assert m.iae == pytest.approx(4.0, rel=1e-12)
        assert m.ise == pytest.approx(4.0, rel=1e-12)

    def test_exponential_against_rectangle_oracle(self):
        # independent oracle: left-rectangle rule on |e^-t|; IAE_exact = 1 - e^-T
        dt = 0.002
        t = np.arange(0.0, 8.0 + dt / 2, dt)
        sig = np.exp(-t)
        traj = make_traj(t, sig)
        exact = 1.0 - math.exp(-8.0)
        assert abs(indices(traj).iae - exact) < 2.0 * dt

    def test_nonnegative_and_monotone_in_horizon(self):
        rng = np.random.default_rng(3)
        t = np.linspace(0.0, 20.0, 2001)
        sig = rng.normal(size=t.size)
        short = indices(make_traj(t[:1001], sig[:1001]))
        full = indices(make_traj(t, sig))
        for name in ("iae", "ise", "itse", "itae"):
            assert 0.0 <= getattr(short, name) <= getattr(full, name)


class TestTransientMeasures:
    def test_zero_signal(self):
        t = np.linspace(0.0, 5.0, 501)
        t_s, os_, us, settled = transient_measures(np.zeros_like(t), t, band=1e-4)
        assert (t_s, os_, us, settled) == (0.0, 0.0, 0.0, True)

    def test_decaying_exponential_crossing(self):
        dt = 0.001
        t = np.arange(0.0, 10.0 + dt / 2, dt)
        sig = -5e-3 * np.exp(-t)
        t_s, os_, us, settled = transient_measures(sig, t, band=1e-4)
        assert settled
        assert t_s == pytest.approx(math.log(50.0), abs=2e-3)
        assert us == pytest.approx(-5e-3)

    def test_not_settled(self):
        t = np.linspace(0.0, 30.0, 3001)
        sig = np.full_like(t, 2e-4)
        t_s, _, _, settled = transient_measures(sig, t, band=1e-4)
        assert not settled
        assert t_s is None

    def test_disturbance_offset(self):
        t = np.linspace(0.0, 10.0, 1001)
        sig = np.where((t >= 1.0) & (t <= 4.0), 1.0, 0.0)
        t_s, _, _, settled = transient_measures(sig, t, band=1e-4, t0=1.0)
        assert settled
        assert t_s == pytest.approx(3.0, abs=0.02)


class TestTuningObjective:
    def test_reference_gains_finite_and_stable(self):
        obj = tuning_objective()
        j = obj(obj.reference_vector())
        assert math.isfinite(j)
        assert j < 1.0

    def test_totality_at_bounds(self):
        obj = tuning_objective()
        lows = np.array([b[0] for b in obj.bounds])
        highs = np.array([b[1] for b in obj.bounds])
        for x in (lows, highs):
            j = obj(x)
            assert math.isfinite(j)

    def test_penalty_for_hopeless_vectors(self):
        obj = tuning_objective()
        # gamma all at the tiny lower bound: unstable target
        x = np.array([0.01, 0.01, 0.01, 0.01, 0.01, 0.1, 1.0, 1.0])
        assert obj(x) >= 1e6

    def test_kb0_invariance(self):
        # the closed loop is invariant to K_B0 (it only scales Ac and Bc
        # together), so J must not depend on the last two coordinates
        obj = tuning_objective()
        ref = obj.reference_vector()
        alt = ref.copy()
        alt[6] *= 3.0
        alt[7] *= 0.25
        assert obj(alt) == pytest.approx(obj(ref), rel=1e-9)

    def test_batch_matches_pointwise(self):
        obj = tuning_objective()
        rng = np.random.default_rng(5)
        lb = np.array([b[0] for b in obj.bounds])
        ub = np.array([b[1] for b in obj.bounds])
        xs = lb + rng.random((6, 8)) * (ub - lb)
        batch = obj.batch(xs)
        for i in range(6):
            assert batch[i] == pytest.approx(obj(xs[i]), rel=1e-12)


class TestRunCase:
    def test_case2_ranking(self):
        report = run_case(2, ("cdm_opt", "pid", "pi"))
        assert report.ranking == ["cdm_opt", "pid", "pi"]

    def test_case2_cdm_against_benchmark_row(self):
        report = run_case(2, ("cdm_opt",))
        s = report.results[0].metrics.signals["df1"]
        assert s.undershoot == pytest.approx(-4.508e-3, rel=0.5)
        assert s.settled and s.t_s < 10.0

    def test_case2_pi_not_settled_at_30s(self):
        report = run_case(2, ("pi",), horizon=30.0)
        assert not report.results[0].metrics.signals["df1"].settled

    def test_case5_overrides_snapshot(self):
        report = run_case(5, ("cdm_opt",))
        assert report.model_snapshot["area1"]["Tt"] == pytest.approx(0.785)
        assert report.model_snapshot["area1"]["Tg"] == pytest.approx(0.105)
        assert report.model_snapshot["area2"]["Tt"] == pytest.approx(0.6)

    def test_case4_deterministic(self):
        a = run_case(4, ("cdm_opt",))
        b = run_case(4, ("cdm_opt",))
        assert a.to_json() == b.to_json()
        assert np.array_equal(a.results[0].trajectory.df1, b.results[0].trajectory.df1)

    def test_case3_runs_and_reports(self):
        report = run_case(3, ("cdm_opt", "pi"))
        assert report.ranking[0] == "cdm_opt"
        for res in report.results:
            assert math.isfinite(res.metrics.iae)

    def test_case2_ranking_stable_across_dt(self):
        for dt in (0.01, 0.005):
            report = run_case(2, ("cdm_opt", "pid", "pi"), dt=dt, horizon=30.0)
            assert report.ranking == ["cdm_opt", "pid", "pi"]

    def test_case4_ranking_stable_across_seeds(self):
        for seed in (1, 2, 3, 4, 5):
            report = run_case(4, ("cdm_opt", "pid", "pi"), seed=seed)
            assert report.ranking == ["cdm_opt", "pid", "pi"]


class TestSensitivitySweep:
    def test_nominal_row_matches_case2(self):
        sweep = sensitivity_sweep(SweepSpec("area1.Tt", (0.25,)), ("cdm_opt",), horizon=30.0)
        nominal = sweep.rows[0].metrics["cdm_opt"]
        case = run_case(2, ("cdm_opt",), horizon=30.0)
        assert nominal.iae == pytest.approx(case.results[0].metrics.iae, rel=1e-12)

    def test_table6_cardinality(self):
        sweep = sensitivity_sweep(table6_specs(), ("cdm_opt",))
        assert len(sweep.rows) == 17
        assert sum(1 for r in sweep.rows if r.parameter == "nominal") == 1

    def test_tt1_monotone_ise(self):
        sweep = sensitivity_sweep(SweepSpec("area1.Tt"), ("cdm_opt",))
        rows = sorted(sweep.rows, key=lambda r: r.delta)
        ises = [r.metrics["cdm_opt"].ise for r in rows]
        assert all(b > a for a, b in zip(ises, ises[1:]))

    def test_all_cells_stable_and_settled(self):
        sweep = sensitivity_sweep(table6_specs(), ("cdm_opt",))
        for row in sweep.rows:
            m = row.metrics["cdm_opt"]
            assert m is not None
            assert m.signals["df1"].settled and m.signals["df2"].settled

    def test_invalid_parameter_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("area3.Tg")
        with pytest.raises(ValueError):
            SweepSpec("area1.Tg", (-1.0,))

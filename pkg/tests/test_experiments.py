import math
import os
from dataclasses import replace

import numpy as np
import pytest

from chiralpump.core import outer, trace_distance
from chiralpump.dynamics import evolve_to_steady, steady_state
from chiralpump.errors import (
    DegenerateSteadyStateError,
    EliminationUndefinedError,
    InvalidArgumentError,
    UndefinedObservableError,
)
from chiralpump.experiments import (
    BASE_KNOBS,
    FIGURES,
    Dataset,
    InitialStateSpec,
    SweepSpec,
    make_initial,
    run_figure,
    scenario_from_knobs,
    steady,
    sweep,
    write_atomic,
)
from chiralpump.model import L, R, RL, RR, mhz
from chiralpump.observables import enantiomeric_excess, excess_from_populations, populations


class TestInitialStates:
    def test_racemic(self):
        rho = make_initial(InitialStateSpec("chiralMix", 0.5))
        assert np.array_equal(rho, np.diag([0.5, 0.5, 0, 0]).astype(complex))

    def test_plus_state(self):
        rho = make_initial(InitialStateSpec("pmMix", 1.0))
        plus = (outer(L, L, 4) + outer(L, R, 4) + outer(R, L, 4) + outer(R, R, 4)) / 2
        assert np.array_equal(rho, plus)
        assert rho[L, R] == 0.5

    def test_balanced_pm_mixture_is_diagonal(self):
        assert np.array_equal(make_initial(InitialStateSpec("pmMix", 0.5)), np.diag([0.5, 0.5, 0, 0]).astype(complex))

    def test_reduced_embedding(self):
        rho = make_initial(InitialStateSpec("chiralMix", 0.3), 3)
        assert rho.shape == (3, 3)
        assert rho[RL, RL] == 0.3 and rho[RR, RR] == pytest.approx(0.7)

    @pytest.mark.parametrize("x", [-0.1, 1.5])
    def test_x_out_of_range(self, x):
        with pytest.raises(InvalidArgumentError):
            InitialStateSpec("chiralMix", x)

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            InitialStateSpec("thermal", 0.5)


class TestExcess:
    def test_pure_left(self):
        assert enantiomeric_excess(outer(L, L, 4)) == 1.0

    def test_racemic(self):
        assert enantiomeric_excess(make_initial(InitialStateSpec())) == 0.0

    def test_undefined_without_ground_population(self):
        with pytest.raises(UndefinedObservableError):
            enantiomeric_excess(np.diag([0.0, 0.0, 0.5, 0.5]))

    def test_vectorised_form_marks_undefined(self):
        eps = excess_from_populations(np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=float))
        assert eps[0] == 1.0 and math.isnan(eps[1])

    def test_strong_dephasing_point(self, fig5_point):
        rho, _ = steady(fig5_point)
        assert enantiomeric_excess(rho) == pytest.approx(0.916, abs=0.01)

    def test_populations_reduced(self):
        assert np.array_equal(populations(np.diag([0.2, 0.3, 0.5])), [0.2, 0.3, 0.0, 0.5])


class TestScenario:
    def test_omega_a_follows_detuning(self, fig3a):
        sc = fig3a.with_param("delta", mhz(40.0))
        m = sc.model
        assert m.omega_a == pytest.approx(m.omega_s * m.omega0 / m.delta)

    def test_uncoupled_keeps_omega_a(self, fig3a):
        sc = replace(fig3a, couple_omega_a=False).with_param("delta", mhz(40.0))
        assert sc.model.omega_a == fig3a.model.omega_a

    def test_zero_detuning_with_coupling(self, fig3a):
        with pytest.raises(EliminationUndefinedError):
            fig3a.with_param("delta", 0.0)

    def test_unknown_param(self, fig3a):
        with pytest.raises(InvalidArgumentError):
            fig3a.with_param("eta", 1.0)


class TestSteady:
    def test_methods_agree(self, fig3b):
        a, t_a = steady(fig3b, "nullspace")
        b, t_b = steady(fig3b, "integrate")
        assert trace_distance(a, b) <= 1e-6
        assert math.isnan(t_a) and 10 < t_b < 60

    def test_unknown_method(self, fig3a):
        with pytest.raises(InvalidArgumentError):
            steady(fig3a, "newton")

    def test_closed_system(self):
        with pytest.raises(DegenerateSteadyStateError):
            steady(scenario_from_knobs(FIGURES["fig2a"].knobs))

    def test_initial_state_independence(self, fig3a):
        states = [steady(replace(fig3a, initial=InitialStateSpec("chiralMix", x)), "integrate")[0] for x in (0.3, 0.7)]
        states.append(steady(replace(fig3a, initial=InitialStateSpec("pmMix", 0.0)), "integrate")[0])
        for s in states[1:]:
            assert trace_distance(states[0], s) <= 1e-6


class TestSweep:
    def test_single_point_matches_direct_solve(self, fig3a):
        ds = sweep(SweepSpec("delta", (fig3a.model.delta,), fig3a))
        rho = steady_state(fig3a.liouvillian())
        assert ds.data.shape == (1, 7)
        assert ds.column("epsilon")[0] == enantiomeric_excess(rho)
        assert math.isnan(ds.column("converged_time_us")[0])

    def test_integrate_method_reports_time(self, fig3b):
        ds = sweep(SweepSpec("initX", (0.2,), fig3b), method="integrate")
        run = evolve_to_steady(fig3b.hamiltonian(), fig3b.collapse(), make_initial(InitialStateSpec("chiralMix", 0.2)))
        assert ds.column("converged_time_us")[0] == run.settle_time

    def test_order_preserved_with_threads(self, fig3a):
        grid = tuple(np.linspace(mhz(40), mhz(60), 9))
        serial = sweep(SweepSpec("delta", grid, fig3a), threads=1)
        pooled = sweep(SweepSpec("delta", grid, fig3a), threads=4)
        assert np.array_equal(serial.data, pooled.data, equal_nan=True)
        assert np.array_equal(serial.column("delta"), grid)

    def test_thread_env(self, fig3a, monkeypatch):
        monkeypatch.setenv("CHIRALPUMP_THREADS", "0")
        with pytest.raises(InvalidArgumentError):
            sweep(SweepSpec("delta", (1.0, 2.0), fig3a))

    def test_detuning_peak(self, fig3a):
        ratios = np.linspace(0.6, 1.4, 17)
        d0 = fig3a.model.omega_s**2 / fig3a.model.eta
        ds = sweep(SweepSpec("delta", tuple(ratios * d0), fig3a))
        eps = ds.column("epsilon")
        assert ratios[np.argmax(eps)] == pytest.approx(1.0)
        k = int(np.argmax(eps))
        assert np.all(np.diff(eps[: k + 1]) > 0) and np.all(np.diff(eps[k:]) < 0)

    @pytest.mark.parametrize("ratio", [1.0, 5.0, 10.0, 20.0])
    def test_excess_falls_with_dephasing(self, ratio):
        sc = scenario_from_knobs({**BASE_KNOBS, "OmegaS": 2.0, "Omega0_ratio": ratio})
        grid = tuple(np.linspace(0, 30, 61) * sc.rates.gamma_s)
        eps = sweep(SweepSpec("gammaPhi", grid, sc)).column("epsilon")
        assert np.all(np.diff(eps) <= 0)

    def test_error_carries_grid_point(self, fig3a):
        with pytest.raises(EliminationUndefinedError, match="delta=0"):
            sweep(SweepSpec("delta", (0.0, 1.0), fig3a), threads=1)

    @pytest.mark.parametrize("grid", [(), (2.0, 1.0), (1.0, 1.0)])
    def test_bad_grid(self, fig3a, grid):
        with pytest.raises(InvalidArgumentError):
            SweepSpec("delta", grid, fig3a)


class TestFigures:
    def test_unknown_figure(self):
        with pytest.raises(InvalidArgumentError):
            run_figure("fig7")

    def test_unknown_override(self):
        with pytest.raises(InvalidArgumentError):
            run_figure("fig2a", {"temperature": 3})

    def test_bad_override_value(self):
        with pytest.raises(InvalidArgumentError):
            run_figure("fig2a", {"eta": "fast"})

    def test_list_override_on_plain_knob(self):
        with pytest.raises(InvalidArgumentError):
            run_figure("fig2a", {"eta": "0.01,0.02"})

    def test_closed_system_selectivity(self):
        for fig_id in ("fig2a", "fig2b"):
            ds = run_figure(fig_id).curves[fig_id]
            assert ds.columns == ("t_us", "P_L", "P_R", "P_S", "P_A", "epsilon")
            assert ds.data.shape == (2001, 6)
            assert np.max(np.abs(ds.column("P_L") - 0.5)) <= 0.05

    def test_detuning_override_lowers_final_excess(self):
        base = run_figure("fig3a", {"Delta_ratio": "1.0", "n_points": 301}).curves["Delta_ratio=1"]
        off = run_figure("fig3a", {"Delta_ratio": "0.9", "n_points": 301}).curves["Delta_ratio=0.9"]
        assert off.column("epsilon")[-1] < base.column("epsilon")[-1]

    def test_chiral_mixtures_share_steady_excess(self):
        res = run_figure("fig6a", {"t_end": 1500, "n_points": 301})
        final = [ds.column("epsilon")[-1] for ds in res.curves.values()]
        assert len(final) == 3
        assert max(final) - min(final) <= 1e-6

    def test_sweep_figure_grid_and_manifest(self):
        res = run_figure("fig4a", {"Delta_ratio": "0.9,1.0,1.1"})
        assert set(res.curves) == {"Omega0_ratio=1", "Omega0_ratio=5"}
        ds = res.curves["Omega0_ratio=5"]
        assert ds.columns[0] == "Delta_ratio"
        assert np.array_equal(ds.column("Delta_ratio"), [0.9, 1.0, 1.1])
        entry = res.manifest["curves"][1]
        assert entry["params"]["omega0"] == pytest.approx(mhz(5.0))
        assert entry["params"]["units"] == "rad/us"

    def test_strong_pump_peak_region(self):
        ds = run_figure("fig4b").curves["fig4b"]
        x, eps = ds.column("Omega0_ratio"), ds.column("epsilon")
        assert 1 < x[np.argmax(eps)] < 20

    def test_every_figure_declared(self):
        assert set(FIGURES) == {"fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6a", "fig6b"}


class TestDataset:
    def test_csv_format(self):
        ds = Dataset(("a", "b"), np.array([[1.0 / 3, float("nan")], [-0.0, 2.5e-13]]))
        assert ds.to_csv_string() == "a,b\n0.333333333333,nan\n0,2.5e-13\n"

    def test_deterministic_output(self):
        a = run_figure("fig4a", {"Delta_ratio": "0.8,1.0,1.2"})
        b = run_figure("fig4a", {"Delta_ratio": "0.8,1.0,1.2"})
        for label in a.curves:
            assert a.curves[label].to_csv_string() == b.curves[label].to_csv_string()

    def test_atomic_write(self, tmp_path):
        path = tmp_path / "sub" / "out.csv"
        write_atomic(path, "x\n")
        write_atomic(path, "y\n")
        assert path.read_text() == "y\n"
        assert os.listdir(path.parent) == ["out.csv"]

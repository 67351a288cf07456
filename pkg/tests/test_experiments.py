import numpy as np
import pytest

from qbattery import (
    ModelParams,
    PropagatorConfig,
    SweepResult,
    SweepRow,
    TimeGrid,
    build_basis,
    build_hq,
    build_total,
    charging_summary,
    convergence_study,
    fit_power_law,
    initial_state,
    oracle_check,
    propagate_to,
    run_trace,
    split_atoms,
    stored_energy,
    sweep_exchange,
    sweep_split,
    sweep_total_atoms,
)
from qbattery.errors import ValidationError

from _singlecavity import single_cavity_energy

# dense-oracle values for n_a=n_b=2, n_ph=6, default couplings (see
# test_observables for the t=1 point); frozen before the Krylov build
FIXTURE_TRACE = {
    0.5: 0.33902124730006244,
    1.0: 0.9591572717539567,
    2.0: 1.6076998937519467,
    3.0: 1.6704760283112994,
    5.0: 1.5303484532868759,
}

SMALL = ModelParams(n_a=2, n_b=2, n_ph=6)


class TestRunTrace:
    def test_zero_couplings_store_nothing(self):
        p = ModelParams(n_a=2, n_b=2, g=0.0, g1=0.0, g2=0.0, exchange=0.0, n_ph=4)
        trace = run_trace(p, TimeGrid(t_max=2.0, dt=0.25))
        assert np.abs(trace.energy).max() < 1e-12

    def test_energy_starts_at_exact_zero(self):
        trace = run_trace(SMALL, TimeGrid(t_max=1.0, dt=0.25))
        assert trace.energy[0] == 0.0
        assert trace.power[0] == 0.0

    def test_matches_dense_oracle_fixture(self):
        trace = run_trace(SMALL, TimeGrid(t_max=5.0, dt=0.5))
        for t, expected in FIXTURE_TRACE.items():
            k = int(round(t / 0.5))
            assert trace.energy[k] == pytest.approx(expected, abs=1e-8)

    def test_deterministic(self):
        grid = TimeGrid(t_max=1.0, dt=0.25)
        t1 = run_trace(SMALL, grid)
        t2 = run_trace(SMALL, grid)
        np.testing.assert_array_equal(t1.energy, t2.energy)

    def test_repulsion_increases_early_storage(self):
        # stronger intra-chain repulsion charges faster at a fixed early time
        energies = {}
        for g in (0.5, 1.0, 2.0):
            p = ModelParams(n_a=5, n_b=5, g=g)
            b = build_basis(p)
            h = build_total(b)
            psi0 = initial_state(b)
            psi = propagate_to(h, psi0, 1.0)
            energies[g] = stored_energy(psi, psi0, build_hq(b))
        assert energies[2.0] > energies[1.0] > energies[0.5]

    def test_energy_below_spectral_bound(self):
        # E(t) can never exceed the top of the atomic spectrum minus E(0)
        p = ModelParams(n_a=3, n_b=2, g=1.0, n_ph=6)
        trace = run_trace(p, TimeGrid(t_max=5.0, dt=0.1))
        hq_diag = build_hq(build_basis(p)).diagonal().real
        bound = hq_diag.max() - (-p.n_total / 2.0 * p.omega_q)
        assert trace.energy.max() <= bound + 1e-10

    def test_swap_leaves_energy_trace_unchanged(self):
        p = ModelParams(n_a=3, n_b=2, g1=0.4, g2=0.7, n_ph=5)
        grid = TimeGrid(t_max=2.0, dt=0.1)
        t1 = run_trace(p, grid)
        t2 = run_trace(p.swapped(), grid)
        np.testing.assert_allclose(t1.energy, t2.energy, atol=1e-10)

    def test_power_peaks_before_energy_peak(self):
        # the power maximum appears early in the charge
        p = ModelParams(n_a=5, n_b=5, g=2.0)
        s = charging_summary(p, TimeGrid(t_max=15.0, dt=0.05), refine=False)
        assert s.t_p < s.t_e


class TestSplitAtoms:
    def test_symmetric(self):
        assert [split_atoms(n, "symmetric") for n in (4, 6, 8, 10)] == [
            (2, 2), (3, 3), (4, 4), (5, 5),
        ]

    def test_symmetric_rejects_odd(self):
        with pytest.raises(ValidationError):
            split_atoms(7, "symmetric")

    def test_most_asymmetric(self):
        assert split_atoms(10, "most_asymmetric") == (2, 8)

    def test_fixed(self):
        assert split_atoms(10, "fixed:3") == (3, 7)
        with pytest.raises(ValidationError):
            split_atoms(10, "fixed:9")  # leaves one atom in cavity b
        with pytest.raises(ValidationError):
            split_atoms(10, "fixed:x")

    def test_minimum_total(self):
        with pytest.raises(ValidationError):
            split_atoms(3, "most_asymmetric")

    def test_unknown_rule(self):
        with pytest.raises(ValidationError):
            split_atoms(8, "thirds")


def _synthetic_sweep(n_values, p_of_n):
    rows = tuple(
        SweepRow(
            params=ModelParams(n_a=2, n_b=n - 2, n_ph=max(4, n)),
            e_max=1.0, t_e=1.0, p_max=p_of_n(n), t_p=1.0,
            e_boundary=False, p_boundary=False,
        )
        for n in n_values
    )
    return SweepResult(rows, TimeGrid(t_max=1.0, dt=0.5), PropagatorConfig(), {})


class TestFitPowerLaw:
    def test_exact_two_point_five(self):
        fit = fit_power_law(_synthetic_sweep([4, 6, 8, 10], lambda n: 7.0 * n**2.5))
        assert fit.exponent == pytest.approx(2.5, abs=1e-9)
        assert fit.max_residual < 1e-12

    def test_exact_cubic(self):
        fit = fit_power_law(_synthetic_sweep([4, 6, 8, 10], lambda n: 0.3 * n**3))
        assert fit.exponent == pytest.approx(3.0, abs=1e-9)

    def test_constant(self):
        fit = fit_power_law(_synthetic_sweep([4, 6, 8, 10], lambda n: 2.0))
        assert fit.exponent == pytest.approx(0.0, abs=1e-9)

    def test_needs_four_rows(self):
        with pytest.raises(ValidationError):
            fit_power_law(_synthetic_sweep([4, 6, 8], lambda n: n))

    def test_needs_positive_power(self):
        with pytest.raises(ValidationError):
            fit_power_law(_synthetic_sweep([4, 6, 8, 10], lambda n: n - 6.0))


class TestSweeps:
    GRID = TimeGrid(t_max=2.0, dt=0.1)

    def test_sweep_total_records_splits(self):
        tpl = ModelParams(n_a=2, n_b=2, n_ph=6)
        sw = sweep_total_atoms([4, 6], "most_asymmetric", tpl, self.GRID)
        assert [(r.params.n_a, r.params.n_b) for r in sw.rows] == [(2, 2), (2, 4)]
        assert sw.meta["split"] == "most_asymmetric"

    def test_sweep_total_rejects_duplicates(self):
        tpl = ModelParams(n_a=2, n_b=2, n_ph=6)
        with pytest.raises(ValidationError):
            sweep_total_atoms([4, 4, 6], "symmetric", tpl, self.GRID)

    def test_split_sweep_symmetric_pairs(self):
        # with g1 = g2 the battery cannot tell the cavities apart
        tpl = ModelParams(n_a=2, n_b=2, n_ph=8)
        sw = sweep_split(6, tpl, self.GRID)
        assert [r.params.n_a for r in sw.rows] == [2, 3, 4]
        first, _, last = sw.rows
        assert first.e_max == pytest.approx(last.e_max, abs=1e-8)
        assert first.p_max == pytest.approx(last.p_max, abs=1e-8)

    def test_row_rerunnable_from_snapshot(self):
        tpl = ModelParams(n_a=2, n_b=2, n_ph=6)
        sw = sweep_split(4, tpl, self.GRID)
        row = sw.rows[0]
        again = charging_summary(row.params, sw.grid, sw.propagator)
        assert again.e_max == pytest.approx(row.e_max, abs=1e-10)
        assert again.p_max == pytest.approx(row.p_max, abs=1e-10)
        assert again.t_e == row.t_e and again.t_p == row.t_p

    def test_workers_do_not_change_results(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=5)
        serial = sweep_exchange(p, [0.0, 0.5], self.GRID, workers=1)
        parallel = sweep_exchange(p, [0.0, 0.5], self.GRID, workers=2)
        for r1, r2 in zip(serial.rows, parallel.rows):
            assert r1.e_max == r2.e_max and r1.p_max == r2.p_max

    def test_dense_method_summary_agrees_with_krylov(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=6)
        grid = TimeGrid(t_max=3.0, dt=0.1)
        s_krylov = charging_summary(p, grid)
        s_dense = charging_summary(p, grid, PropagatorConfig(method="dense"))
        assert s_dense.e_max == pytest.approx(s_krylov.e_max, abs=1e-8)
        assert s_dense.p_max == pytest.approx(s_krylov.p_max, abs=1e-8)
        assert s_dense.t_e == pytest.approx(s_krylov.t_e, abs=1e-6)


class TestSweepExchange:
    def test_duplicate_values_identical(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=5)
        sw = sweep_exchange(p, [0.5, 0.5], TimeGrid(t_max=1.0, dt=0.25))
        assert sw.rows[0].e_max == sw.rows[1].e_max
        assert sw.rows[0].t_e == sw.rows[1].t_e

    def test_rejects_non_finite(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=5)
        with pytest.raises(ValidationError):
            sweep_exchange(p, [0.0, float("inf")], TimeGrid(t_max=1.0, dt=0.25))

    def test_decoupled_chains_factorize(self):
        # A = 0 and g = 0: the joint trace is the sum of two standalone
        # single-cavity problems, computed here with an independent dense model
        p = ModelParams(n_a=2, n_b=3, g=0.0, g1=0.4, g2=0.6, exchange=0.0, n_ph=8)
        grid = TimeGrid(t_max=3.0, dt=0.1)
        joint = run_trace(p, grid)
        e_a = single_cavity_energy(2, 8, p.omega_q, p.omega_a, 0.4, grid.times)
        e_b = single_cavity_energy(3, 8, p.omega_q, p.omega_b, 0.6, grid.times)
        np.testing.assert_allclose(joint.energy, e_a + e_b, atol=1e-8)


class TestConvergenceStudy:
    def test_switch_off_identical_at_every_cutoff(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=4)
        st = convergence_study(p, [4, 5, 6], TimeGrid(t_max=1.0, dt=0.25), theta=0)
        e_values = {r.e_max for r in st.rows}
        assert len(e_values) == 1

    def test_cutoff_below_initial_photons(self):
        p = ModelParams(n_a=3, n_b=2, n_ph=6)
        with pytest.raises(ValidationError):
            convergence_study(p, [2, 4, 6], TimeGrid(t_max=1.0, dt=0.25))

    def test_requires_increasing_cutoffs(self):
        p = ModelParams(n_a=2, n_b=2, n_ph=4)
        with pytest.raises(ValidationError):
            convergence_study(p, [6, 5], TimeGrid(t_max=1.0, dt=0.25))


class TestOracleCheck:
    def test_small_system_deviation(self):
        times, devs = oracle_check(SMALL, TimeGrid(t_max=2.0, dt=0.25))
        assert len(times) == len(devs)
        assert devs.max() < 1e-8

    def test_rejects_large_dimension(self):
        p = ModelParams(n_a=5, n_b=5, n_ph=30)
        with pytest.raises(ValidationError):
            oracle_check(p, TimeGrid(t_max=1.0, dt=0.25))

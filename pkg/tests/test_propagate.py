import numpy as np
import pytest

from qbattery import (
    ChargingProtocol,
    DensePropagator,
    ModelParams,
    PropagatorConfig,
    TimeGrid,
    build_basis,
    build_total,
    evolve_trace,
    initial_state,
    propagate_to,
)
from qbattery import kernels
from qbattery.errors import ConvergenceError, DimensionMismatchError, ValidationError

BASE_COUPLINGS = dict(g=0.5, g1=0.5, g2=0.5, exchange=0.5)


@pytest.fixture(scope="module")
def small_system():
    p = ModelParams(n_a=2, n_b=2, n_ph=6, **BASE_COUPLINGS)
    b = build_basis(p)
    return b, build_total(b), initial_state(b)


class TestTimeGrid:
    def test_samples_count(self):
        assert TimeGrid(t_max=50.0, dt=0.05).samples == 1001
        assert TimeGrid(t_max=0.5, dt=0.5).samples == 2

    def test_times_spacing(self):
        g = TimeGrid(t_max=1.0, dt=0.25)
        np.testing.assert_allclose(g.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_validation(self):
        with pytest.raises(ValidationError):
            TimeGrid(t_max=1.0, dt=0.0)
        with pytest.raises(ValidationError):
            TimeGrid(t_max=0.1, dt=0.5)


class TestPropagatorConfig:
    def test_validation(self):
        with pytest.raises(ValidationError):
            PropagatorConfig(method="magic")
        with pytest.raises(ValidationError):
            PropagatorConfig(krylov_dim=1)
        with pytest.raises(ValidationError):
            PropagatorConfig(tol=0.0)
        with pytest.raises(ValidationError):
            PropagatorConfig(max_step=-1.0)


class TestPropagateTo:
    def test_t_zero_identity(self, small_system):
        _, h, psi0 = small_system
        out = propagate_to(h, psi0, 0.0)
        np.testing.assert_array_equal(out, psi0)
        assert out is not psi0

    def test_stationary_state_phase(self):
        # switch off: psi0 is an eigenvector, evolution is a global phase
        p = ModelParams(n_a=2, n_b=2, n_ph=4, **BASE_COUPLINGS)
        b = build_basis(p)
        h = build_total(b, ChargingProtocol(theta=0))
        psi0 = initial_state(b)
        energy = h.diagonal().real[np.argmax(np.abs(psi0))]
        psi_t = propagate_to(h, psi0, 3.7)
        assert abs(np.vdot(psi0, psi_t)) == pytest.approx(1.0, abs=1e-12)
        assert np.vdot(psi0, psi_t) == pytest.approx(np.exp(-1j * energy * 3.7), abs=1e-9)

    def test_krylov_matches_dense_oracle(self, small_system):
        _, h, psi0 = small_system
        psi_k = propagate_to(h, psi0, 1.0)
        psi_d = DensePropagator(h).apply(psi0, 1.0)
        assert np.linalg.norm(psi_k - psi_d) < 1e-8

    def test_dense_method_dispatch(self, small_system):
        _, h, psi0 = small_system
        psi = propagate_to(h, psi0, 2.0, PropagatorConfig(method="dense"))
        assert np.linalg.norm(psi - DensePropagator(h).apply(psi0, 2.0)) == 0.0

    def test_time_reversal(self, small_system):
        _, h, psi0 = small_system
        forward = propagate_to(h, psi0, 5.0)
        back = propagate_to(h, forward, -5.0)
        assert np.linalg.norm(back - psi0) < 1e-7

    def test_max_step_equivalence(self, small_system):
        _, h, psi0 = small_system
        free = propagate_to(h, psi0, 2.0)
        capped = propagate_to(h, psi0, 2.0, PropagatorConfig(max_step=0.25))
        assert np.linalg.norm(free - capped) < 1e-8

    def test_dimension_mismatch(self, small_system):
        _, h, _ = small_system
        with pytest.raises(DimensionMismatchError):
            propagate_to(h, np.ones(5, dtype=complex), 1.0)

    def test_zero_vector_rejected(self, small_system):
        _, h, psi0 = small_system
        with pytest.raises(ValidationError):
            propagate_to(h, np.zeros_like(psi0), 1.0)

    def test_nonconvergence_raises(self):
        # norm ~ 1e16 makes even the full subspace useless at any
        # representable substep, so the propagator must give up
        p = ModelParams(n_a=2, n_b=2, n_ph=3, **BASE_COUPLINGS)
        b = build_basis(p)
        h = (build_total(b) * 1e16).tocsr()
        psi0 = initial_state(b)
        with pytest.raises(ConvergenceError):
            propagate_to(h, psi0, 1.0, PropagatorConfig(krylov_dim=5))


class TestEvolveTrace:
    def test_two_sample_grid(self, small_system):
        _, h, psi0 = small_system
        grid = TimeGrid(t_max=0.5, dt=0.5)
        out = list(evolve_trace(h, psi0, grid))
        assert [t for t, _ in out] == [0.0, 0.5]
        np.testing.assert_array_equal(out[0][1], psi0)
        single = propagate_to(h, psi0, 0.5)
        assert np.linalg.norm(out[1][1] - single) < 1e-9

    def test_norm_preserved_along_trace(self, small_system):
        _, h, psi0 = small_system
        grid = TimeGrid(t_max=5.0, dt=0.1)
        for _, psi in evolve_trace(h, psi0, grid):
            assert abs(np.linalg.norm(psi) - 1.0) < 1e-10

    def test_energy_conserved_along_trace(self, small_system):
        _, h, psi0 = small_system
        grid = TimeGrid(t_max=5.0, dt=0.1)
        values = [np.vdot(psi, h @ psi).real for _, psi in evolve_trace(h, psi0, grid)]
        scale = max(1.0, abs(values[0]))
        assert (max(values) - min(values)) / scale < 1e-8

    def test_endpoint_matches_single_shot(self, small_system):
        _, h, psi0 = small_system
        grid = TimeGrid(t_max=5.0, dt=0.05)
        *_, (t_end, psi_end) = evolve_trace(h, psi0, grid)
        assert t_end == pytest.approx(5.0)
        single = propagate_to(h, psi0, 5.0)
        assert np.linalg.norm(psi_end - single) < 1e-7

    def test_dense_trace_agrees(self, small_system):
        _, h, psi0 = small_system
        grid = TimeGrid(t_max=2.0, dt=0.5)
        krylov = list(evolve_trace(h, psi0, grid))
        dense = list(evolve_trace(h, psi0, grid, PropagatorConfig(method="dense")))
        for (_, pk), (_, pd) in zip(krylov, dense):
            assert np.linalg.norm(pk - pd) < 1e-8


class TestBackendEquivalence:
    def test_python_fallback_matches_compiled(self, small_system, monkeypatch):
        _, h, psi0 = small_system
        reference = propagate_to(h, psi0, 3.0)
        monkeypatch.setattr(kernels, "lanczos_iteration", kernels._lanczos_iteration_py)
        fallback = propagate_to(h, psi0, 3.0)
        assert np.linalg.norm(reference - fallback) < 1e-10

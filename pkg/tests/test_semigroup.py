"""Tests for the Strang-split Galerkin flow and its decompositions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from attractor_lab.certificates.constants import main_constants, select_t_star
from attractor_lab.certificates.fitting import fit_decay_envelope, fit_differential_inequality, fit_growth_envelope
from attractor_lab.certificates.gronwall import gronwall_bound
from attractor_lab.certificates.iteration import iterate_decomposition
from attractor_lab.dynamics.linear import step_linear
from attractor_lab.dynamics.semigroup import (
    FULL,
    HAT_V,
    HAT_W,
    V,
    W,
    EvolutionConfig,
    SDWEFlow,
    dt_max,
    equilibrium_norm,
    evolve_hat_split,
    evolve_linear_split,
    evolve_S,
    evolve_VU,
)
from attractor_lab.errors import ConfigurationError, InstabilityError, PreconditionError
from attractor_lab.metrics.rates import fit_rate
from attractor_lab.metrics.sampling import sample_ball
from attractor_lab.nonlinearity.phi import PhiSpec
from attractor_lab.spectral.core import ModeGrid, PhaseState, SpectralField


@pytest.fixture
def grid():
    return ModeGrid(dimension=1, modes=4, length=1.0)


@pytest.fixture
def small_state(grid):
    return PhaseState(SpectralField.basis(grid, 1, 0.1), SpectralField.basis(grid, 2, 0.2))


def split(x: PhaseState, seed: int = 0):
    rng = np.random.default_rng(seed)
    y = PhaseState.from_arrays(x.grid, rng.normal(size=x.grid.shape) * 0.01, rng.normal(size=x.grid.shape) * 0.1)
    return y, x - y


def self_convergence_ratio(evolve, **kwargs) -> float:
    """Ratio of successive final-state gaps over all components for dt, dt/2, dt/4."""
    grid = ModeGrid(dimension=1, modes=8, length=1.0)
    finals = []
    for dt in (0.01, 0.005, 0.0025):
        config = EvolutionConfig(grid=grid, dt=dt, t_final=1.0, stride=1000, ball_radius=1.5, **kwargs)
        record = evolve(config)
        finals.append({name: record.final(name) for name in record.components})

    def gap(a, b):
        return sum((a[name] - b[name]).norm() for name in a)

    return gap(finals[0], finals[1]) / gap(finals[1], finals[2])


def scaled_sample(grid: ModeGrid, radius: float, seed: int) -> PhaseState:
    x = sample_ball(grid, 1.0, seed=seed)[0]
    return x * (radius / x.norm())


class TestEvolutionConfig:
    """Parameter validation."""

    def test_step_above_limit_rejected(self, grid):
        with pytest.raises(ConfigurationError, match="dt_max"):
            EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("quintic"), dt=0.01, ball_radius=100.0)

    def test_zero_nonlinearity_limit(self, grid):
        assert dt_max(grid, PhiSpec.from_catalog("zero"), 10.0) == pytest.approx(0.5)

    def test_equilibrium_norm(self, grid):
        forcing = SpectralField.basis(grid, 1, np.pi**2)
        assert equilibrium_norm(forcing) == pytest.approx(np.pi, rel=1e-13)

    def test_forcing_on_other_grid(self, grid):
        other = ModeGrid(dimension=1, modes=8, length=1.0)
        with pytest.raises(ConfigurationError):
            EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), forcing=SpectralField.zeros(other))

    def test_invalid_epsilon(self, grid):
        with pytest.raises(ConfigurationError):
            EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), epsilon=1.5)

    def test_steps_and_horizon(self, grid):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), dt=0.01, t_final=2.0)
        assert config.n_steps == 200
        assert config.with_horizon(0.5).n_steps == 50


class TestFullFlow:
    """S(t) against exact solutions."""

    def test_unforced_linear_flow_is_exact(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), t_final=10.0, stride=100)
        record = evolve_S(config, small_state)
        assert_allclose(record.final().as_array(), step_linear(small_state, 10.0).as_array(), atol=1e-10)

    def test_converges_to_equilibrium(self, grid):
        forcing = SpectralField.basis(grid, 1, np.pi**2)
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), forcing=forcing, t_final=20.0)
        final = evolve_S(config, PhaseState.zeros(grid)).final()
        target = PhaseState(SpectralField.basis(grid, 1), SpectralField.zeros(grid))
        assert (final - target).norm() < 1e-8

    def test_recording_stride(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("cubic"), t_final=1.0, stride=30)
        record = evolve_S(config, small_state)
        assert_allclose(record.times, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)
        assert record.components == (FULL,)
        assert len(record.norm_series(FULL)) == 5

    def test_unstable_nonlinearity_detected(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_coefficients([0, -50]), t_final=20.0)
        with pytest.raises(InstabilityError):
            evolve_S(config, small_state)

    def test_initial_state_on_other_grid(self, grid):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"))
        with pytest.raises(ConfigurationError):
            evolve_S(config, PhaseState.zeros(ModeGrid(dimension=1, modes=8)))

    def test_energy_series_starts_at_initial_energy(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("cubic"), t_final=0.5)
        record = evolve_S(config, small_state)
        e1 = np.pi**2
        expected = (1 + config.epsilon) * e1 * 0.01 + 0.04
        assert record.energy_series(FULL)[0] == pytest.approx(expected, rel=1e-12)

    @pytest.mark.slow
    def test_second_order_in_time(self):
        grid = ModeGrid(dimension=1, modes=8, length=1.0)
        x = sample_ball(grid, 0.5, seed=3)[0]
        finals = []
        for dt in (0.01, 0.005, 0.0025):
            config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("cubic"), dt=dt, t_final=1.0, stride=1000)
            finals.append(evolve_S(config, x).final())
        coarse = (finals[0] - finals[1]).norm()
        fine = (finals[1] - finals[2]).norm()
        assert 3.5 <= coarse / fine <= 4.5


class TestHatSplit:
    """S(t)x = hat_v(t) + hat_w(t)."""

    def test_zero_nonlinearity_gives_linear_part(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), t_final=5.0, stride=100)
        record = evolve_hat_split(config, small_state)
        assert_allclose(record.final(HAT_V).as_array(), step_linear(small_state, 5.0).as_array(), atol=1e-10)
        assert record.final(HAT_W).norm() < 1e-12

    def test_small_data_below_cutoff_decays_linearly(self, grid):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("quintic", sigma=1.0), t_final=5.0, stride=100)
        x = sample_ball(grid, 1.0, seed=1)[0]
        record = evolve_hat_split(config, x)
        assert_allclose(record.final(HAT_V).as_array(), step_linear(x, 5.0).as_array(), atol=1e-10)
        assert np.max(record.identity_residuals) < 1e-10

    def test_identity_residual_with_forcing(self, grid):
        forcing = SpectralField.basis(grid, 1, 2.0)
        phi = PhiSpec.from_catalog("cubic", sigma=1 / np.sqrt(2), lambda_shift=0.5)
        config = EvolutionConfig(grid=grid, phi=phi, forcing=forcing, t_final=3.0)
        for x in sample_ball(grid, 1.0, count=3, seed=2):
            record = evolve_hat_split(config, x)
            assert np.max(record.identity_residuals) < 1e-8
            residual = record.final(FULL) - record.final(HAT_V) - record.final(HAT_W)
            assert residual.norm() < 1e-8

    def test_initial_state_outside_ball(self, grid):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("zero"), ball_radius=1.0)
        x = PhaseState(SpectralField.basis(grid, 1), SpectralField.zeros(grid))
        with pytest.raises(PreconditionError):
            evolve_hat_split(config, x)

    def test_linear_split_tracks_linear_semigroup(self, grid, small_state):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("cubic"), t_final=2.0, stride=50)
        record = evolve_linear_split(config, small_state)
        assert_allclose(record.final(HAT_V).as_array(), step_linear(small_state, 2.0).as_array(), atol=1e-10)
        assert np.max(record.identity_residuals) < 1e-10

    @pytest.mark.slow
    def test_second_order_self_convergence(self):
        grid = ModeGrid(dimension=1, modes=8, length=1.0)
        x = scaled_sample(grid, 1.5, seed=3)
        ratio = self_convergence_ratio(lambda config: evolve_hat_split(config, x), phi=PhiSpec.from_catalog("cubic"))
        assert 3.5 <= ratio <= 4.5


class TestVUSplit:
    """S(t)x = V_x(t)y + U_x(t)z."""

    @pytest.fixture
    def config(self, grid):
        return EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("quintic", sigma=1.0), t_final=2.0, stride=50)

    def test_all_of_x_in_z(self, config, grid):
        x = sample_ball(grid, 1.0, seed=4)[0]
        record = evolve_VU(config, x, PhaseState.zeros(grid), x)
        assert record.final(V).norm() == 0.0
        assert_allclose(record.final(W).as_array(), record.final(FULL).as_array(), atol=1e-14)

    def test_random_split_identity(self, config, grid):
        x = sample_ball(grid, 1.0, seed=5)[0]
        y, z = split(x)
        record = evolve_VU(config, x, y, z)
        assert set(record.components) == {FULL, HAT_V, HAT_W, V, W}
        assert np.max(record.identity_residuals) < 1e-8

    def test_split_must_sum_to_x(self, config, grid):
        x = sample_ball(grid, 1.0, seed=6)[0]
        y, z = split(x)
        with pytest.raises(PreconditionError):
            evolve_VU(config, x, y * 2.0, z)

    def test_requires_positive_cutoff(self, grid):
        config = EvolutionConfig(grid=grid, phi=PhiSpec.from_catalog("cubic"), t_final=1.0)
        x = sample_ball(grid, 1.0, seed=7)[0]
        with pytest.raises(ConfigurationError, match="sigma"):
            evolve_VU(config, x, PhaseState.zeros(grid), x)

    def test_flow_advance(self, config, grid):
        x = sample_ball(grid, 1.0, seed=8)[0]
        y, z = split(x, seed=1)
        full, v, w = SDWEFlow(config).advance(x, y, z, 0.5)
        assert (full - v - w).norm() < 1e-8
        assert_allclose(full.as_array(), evolve_S(config.with_horizon(0.5), x).final().as_array(), atol=1e-12)

    def test_json_records(self, config, grid):
        x = sample_ball(grid, 1.0, seed=9)[0]
        y, z = split(x)
        record = evolve_VU(config, x, y, z)
        rows = record.to_json_records(member=3)
        assert len(rows) == len(record.times) * 5
        row = rows[0]
        assert row["member"] == 3
        assert set(row["norms"]) == {"H", "H_quarter", "H1"}
        assert {"t", "component", "Lambda0", "Lambda1", "residual"} <= set(row)
        snapshot = record.snapshot(-1)
        assert snapshot.t == pytest.approx(2.0)
        assert snapshot.component(V) is record.final(V)

    @pytest.mark.slow
    def test_second_order_self_convergence(self):
        grid = ModeGrid(dimension=1, modes=8, length=1.0)
        x = scaled_sample(grid, 1.5, seed=4)
        y, z = split(x, seed=2)
        phi = PhiSpec.from_catalog("quintic", sigma=0.05)
        ratio = self_convergence_ratio(lambda config: evolve_VU(config, x, y, z), phi=phi)
        assert 3.5 <= ratio <= 4.5

    @pytest.mark.slow
    def test_doubling_horizon_keeps_uniform_bound(self):
        """Sup of ||S(t)x||_H and ||w||_{H^{1/4}} over [0, 2T] matches [0, T]."""
        grid = ModeGrid(dimension=1, modes=8, length=1.0)
        phi = PhiSpec.from_catalog("quintic", sigma=1.0)
        forcing = SpectralField.basis(grid, 1, 1.0)
        x = sample_ball(grid, 1.0, seed=11)[0]
        bounds = []
        for t_final in (10.0, 20.0):
            config = EvolutionConfig(grid=grid, phi=phi, forcing=forcing, t_final=t_final)
            record = evolve_VU(config, x, x, PhaseState.zeros(grid))
            bounds.append((np.max(record.norm_series(FULL)), np.max(record.norm_series(W, 0.25))))
        assert bounds[1][0] == pytest.approx(bounds[0][0], rel=1e-3)
        assert bounds[1][1] == pytest.approx(bounds[0][1], rel=1e-3)

    def test_lambda1_differential_inequality(self, grid):
        forcing = SpectralField.basis(grid, 1, 1.0)
        phi = PhiSpec.from_catalog("quintic", sigma=1.0)
        config = EvolutionConfig(grid=grid, phi=phi, forcing=forcing, t_final=10.0)
        x = sample_ball(grid, 1.0, seed=12)[0]
        y, z = split(x, seed=3)
        record = evolve_VU(config, x, y, z)
        energy = record.energy_series(W, 0.25)
        fit = fit_differential_inequality(record.times, energy, config.epsilon)
        assert fit.bounded
        bound = gronwall_bound(
            float(energy[0]), config.epsilon, fit.nu, fit.k, lambda s: np.full_like(s, fit.J), record.times
        )
        assert np.all(energy <= bound * (1.0 + 1e-2))


@pytest.mark.slow
class TestQuinticDecomposition:
    """u^5 on 32 modes up to T = 20: identities, v decay and the iterated z bound."""

    @pytest.fixture(scope="class")
    def runs(self):
        grid = ModeGrid(dimension=1, modes=32, length=1.0)
        phi = PhiSpec.from_catalog("quintic", sigma=1.0)
        config = EvolutionConfig(grid=grid, phi=phi, forcing=SpectralField.basis(grid, 1, 1.0), t_final=20.0)
        members = sample_ball(grid, 1.0, count=3, seed=17)
        directions = [d * (1.0 / d.norm(0.25)) for d in sample_ball(grid, 1.0, 0.25, 3, seed=18)]
        zero = PhaseState.zeros(grid)
        base = [evolve_VU(config, x, x, zero) for x in members]
        directed = [evolve_VU(config, x, d, x - d) for x, d in zip(members, directions)]
        return config, members, base, directed

    def test_identities(self, runs):
        _, _, base, directed = runs
        for record in base + directed:
            assert np.max(record.identity_residuals) <= 1e-8

    def test_v_decays(self, runs):
        _, _, base, directed = runs
        times = base[0].times
        ratios = np.max([r.norm_series(V) / r.states[V][0].norm() for r in base + directed], axis=0)
        late = times >= 0.25 * times[-1]
        assert fit_rate(times[late], ratios[late]).omega > 0

    def test_iterated_z_stays_in_fitted_ball(self, runs):
        config, members, base, directed = runs
        times = base[0].times
        alpha = fit_decay_envelope(
            times, np.max([r.norm_series(V) / r.states[V][0].norm() for r in base + directed], axis=0)
        )
        beta = fit_decay_envelope(times, np.max([r.norm_series(V, 0.25) for r in directed], axis=0))
        growth = fit_growth_envelope(times, np.max([r.norm_series(W, 0.25) for r in base], axis=0))
        t_star = max(select_t_star(alpha).t_star, select_t_star(beta).t_star)
        cert = main_constants(alpha, beta, growth, 1.0, t_star)
        run = iterate_decomposition(
            SDWEFlow(config), members[0], cert.t_star, 10,
            alpha_star=cert.alpha_star, beta_star=cert.tec.beta_star, J_star=cert.tec.J_star, R0=1.0,
            norm_h=lambda s: s.norm(0.0), norm_v=lambda s: s.norm(0.25),
        )
        assert len(run.steps) == 11
        assert all(step.z_norm <= run.R_star + 1e-9 for step in run.steps)

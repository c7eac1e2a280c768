import sys

import numpy as np
import pytest

from src.integrator import (
    JacobianMode,
    NewtonConvergenceError,
    NonFiniteStateError,
    PartitionedProblem,
    SingularStageJacobianError,
    StepperConfig,
    StiffLimitError,
    Trajectory,
    integrate,
    step,
    step_asi,
    time_grid,
)
from src.problems import TestProblem, linear_problem
from src.stability import amplification
from src.tableaux import BUILTIN_NAMES, CATALOG_NAMES, get_scheme

PARESCHI = TestProblem.of("pareschi", "equilibrium")
VANDERPOL = TestProblem.of("vanderpol", "equilibrium")


def test_time_grid_exact_division():
    times = time_grid(0.1, 1.0)
    assert times.size == 11
    assert times[-1] == 1.0


def test_time_grid_shortens_last_step():
    times = time_grid(0.3, 1.0)
    assert times.tolist() == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    assert times[-1] == 1.0


def test_time_grid_edge_cases():
    assert time_grid(0.1, 0.0).tolist() == [0.0]
    with pytest.raises(ValueError):
        time_grid(0.0, 1.0)
    with pytest.raises(ValueError):
        time_grid(0.1, -1.0)


@pytest.mark.parametrize("name", CATALOG_NAMES + BUILTIN_NAMES)
def test_linear_step_matches_amplification(name):
    t = get_scheme(name)
    rng = np.random.default_rng(7)
    for _ in range(10):
        z_I = complex(rng.uniform(-4, 0), rng.uniform(-3, 3))
        z_E = complex(rng.uniform(-2, 0.5), rng.uniform(-2, 2))
        ratio = step(t, linear_problem(z_I, z_E), np.array([1.0 + 0j]), 1.0)[0]
        amp = amplification(t, z_I, z_E)
        assert abs(ratio - amp) <= 1e-12 * max(1.0, abs(amp))


def test_standard_form_linear_step_matches_amplification():
    t = get_scheme("IMEX-SSP2(3,3,2)")
    z_I, z_E = complex(-2.0, 0.5), complex(-0.3, 0.8)
    ratio = step(t, linear_problem(z_I, z_E), np.array([1.0 + 0j]), 1.0)[0]
    assert ratio == pytest.approx(amplification(t, z_I, z_E), rel=1e-12)


def test_standard_form_rejects_zero_eps():
    t = get_scheme("IMEX-SSP2(3,3,2)")
    with pytest.raises(StiffLimitError):
        step(t, PARESCHI.build(0.0), PARESCHI.initial_state(), 0.1)


def test_explicit_coupled_stage_rejects_zero_eps():
    t = get_scheme("ASI-SSP(4,3,2)").with_entry("A", 1, 1, 0)
    with pytest.raises(SingularStageJacobianError):
        step_asi(t, PARESCHI.build(0.0), PARESCHI.initial_state(), 0.1)


def test_step_asi_requires_asi_form():
    with pytest.raises(ValueError):
        step_asi(get_scheme("euler-imex"), PARESCHI.build(1.0), PARESCHI.initial_state(), 0.1)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_zero_eps_stays_on_equilibrium_manifold(name):
    t = get_scheme(name)
    traj = integrate(t, PARESCHI.build(0.0), PARESCHI.initial_state(), 0.05, 1.0)
    assert PARESCHI.equilibrium_residual(traj.final) <= 1e-10
    assert traj.max_stage_iters.max() <= 20


def test_zero_limit_is_uniform(asi432):
    U0 = np.tile(VANDERPOL.initial_state(), (2, 1))
    traj = integrate(asi432, VANDERPOL.build(np.array([0.0, 1e-12])), U0, 1e-2, 0.5)
    assert traj.is_batch
    assert np.max(np.abs(traj.states[:, 0] - traj.states[:, 1])) <= 1e-8


def test_batch_matches_individual_runs(asi432):
    problem = TestProblem.of("pareschi", "perturbed")
    eps = np.array([1e-3, 1e-1, 1.0])
    U0 = np.tile(problem.initial_state(), (3, 1))
    batch = integrate(asi432, problem.build(eps), U0, 0.05, 1.0)
    for j, e in enumerate(eps):
        single = integrate(asi432, problem.build(float(e)), problem.initial_state(), 0.05, 1.0)
        np.testing.assert_allclose(batch.member(j).states, single.states, rtol=1e-12, atol=1e-14)


def test_finite_difference_jacobian_agrees(asi432):
    problem = TestProblem.of("vanderpol", "perturbed")
    fd = StepperConfig(jacobian_mode="finite-difference")
    assert fd.jacobian_mode is JacobianMode.FINITE_DIFFERENCE
    a = integrate(asi432, problem.build(1e-4), problem.initial_state(), 0.01, 0.2)
    b = integrate(asi432, problem.build(1e-4), problem.initial_state(), 0.01, 0.2, fd)
    np.testing.assert_allclose(a.final, b.final, rtol=1e-9)


def test_record_every_keeps_multiples(asi432):
    traj = integrate(asi432, PARESCHI.build(1.0), PARESCHI.initial_state(), 0.01, 1.0, record_every=[10, 25])
    assert traj.times.tolist() == pytest.approx([0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 1.0])
    assert traj.newton_iters.size == traj.times.size - 1
    full = integrate(asi432, PARESCHI.build(1.0), PARESCHI.initial_state(), 0.01, 1.0)
    np.testing.assert_array_equal(traj.final, full.final)
    assert traj.newton_iters.sum() == full.newton_iters.sum()


def test_newton_failure_is_annotated(asi432):
    problem = TestProblem.of("vanderpol", "perturbed")
    cfg = StepperConfig(max_iter=1)
    with pytest.raises(NewtonConvergenceError) as exc:
        integrate(asi432, problem.build(0.0), problem.initial_state(), 0.1, 0.5, cfg)
    assert exc.value.step_index == 0
    assert exc.value.stage is not None
    if sys.version_info >= (3, 11):
        assert any("adım 0" in note for note in exc.value.__notes__)


def test_non_finite_state_detected(asi432):
    p = linear_problem(-1.0, np.inf)
    with pytest.raises(NonFiniteStateError):
        integrate(asi432, p, np.array([1.0 + 0j]), 0.1, 0.2)


def test_spot_check_rejects_relaxation_on_free_component():
    with pytest.raises(ValueError, match="sert olmayan"):
        PartitionedProblem(
            flux=lambda U: U,
            relaxation=lambda U: U,
            eps=1.0,
            stiff_mask=(False, True),
        )


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        PARESCHI.build(-1e-3)


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(rtol=0.0)
    with pytest.raises(ValueError):
        StepperConfig(max_iter=0)
    assert StepperConfig.from_settings().to_dict()["jacobian_mode"] == "analytic"


def test_trajectory_csv_and_arrays(tmp_path, asi432):
    traj = integrate(asi432, PARESCHI.build(0.5), PARESCHI.initial_state(), 0.25, 1.0)
    path = traj.to_csv(tmp_path / "traj.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,U_1,U_2,newton_iters"
    assert len(lines) == 6
    again = Trajectory.from_arrays(traj.to_arrays(), scheme=traj.scheme)
    np.testing.assert_array_equal(again.states, traj.states)


def test_trajectory_validates_shapes():
    with pytest.raises(ValueError):
        Trajectory(times=[0.0, 1.0], states=np.zeros((3, 2)), newton_iters=[0], max_stage_iters=[0])

import numpy as np
import pytest

from src.passive_homing.environment import EngagementEnv, run_episode
from src.passive_homing.errors import UsageError
from src.passive_homing.guidance import ZemGuidance
from src.passive_homing.models import MissileConfig, RunConfig, ScenarioConfig
from src.passive_homing.scenario import episode_rng

COAST = np.zeros(4, dtype=np.int8)


@pytest.fixture
def zero_error_scenario():
    """Collision course with no heading error and no maneuver"""
    return ScenarioConfig(
        heading_error_deg=(0.0, 0.0),
        attitude_error_deg=(0.0, 0.0),
        maneuver_kind="none",
        target_accel_max=0.0,
    )


@pytest.fixture
def env(zero_error_scenario):
    return EngagementEnv(zero_error_scenario)


def fly(env, action):
    """Step with a fixed action until the episode ends"""
    results = []
    while not env.done:
        results.append(env.step(action))
    return results


# Reset Tests


def test_reset_observation(env):
    """Test the first observation has zero errors and zero angle changes"""
    obs = env.reset(episode_rng(0, 0))
    assert obs.e_u == 0.0 and obs.e_v == 0.0
    assert obs.d_theta_u == 0.0 and obs.d_theta_v == 0.0
    assert env.steps == 0
    assert not env.done


def test_reset_is_reproducible(env):
    """Test the same episode stream reproduces the engagement"""
    env.reset(episode_rng(3, 1))
    first = env.state.target.position.copy()
    env.reset(episode_rng(3, 1))
    assert np.array_equal(env.state.target.position, first)


def test_step_before_reset(env):
    """Test stepping an unreset environment is a usage error"""
    with pytest.raises(UsageError):
        env.step(COAST)


def test_state_before_reset(env):
    """Test reading the state before reset is a usage error"""
    with pytest.raises(UsageError):
        _ = env.state


# Episode Tests


def test_coasting_collision_course_hits(env):
    """Test an exact collision course hits without thrusting"""
    env.reset(episode_rng(0, 0))
    results = fly(env, COAST)
    summary = env.summary()

    assert summary.outcome == "hit"
    assert summary.miss_distance < 0.5
    assert summary.fuel_used == 0.0
    assert 60 <= summary.steps <= 120
    assert results[-1].terminal == 10.0
    assert all(r.terminal == 0.0 for r in results[:-1])


def test_collision_course_angles_stay_still(env):
    """Test a collision course keeps angle errors and changes near zero"""
    env.reset(episode_rng(0, 2))
    results = fly(env, COAST)
    for r in results[:-2]:
        obs = r.observation
        assert max(abs(obs.e_u), abs(obs.e_v)) < 1e-6
        assert max(abs(obs.d_theta_u), abs(obs.d_theta_v)) < 1e-6
        assert r.shaping == pytest.approx(1.0, abs=1e-3)


def test_timeout(zero_error_scenario):
    """Test the time cap ends the episode"""
    env = EngagementEnv(zero_error_scenario, MissileConfig(max_episode_time=0.5))
    env.reset(episode_rng(0, 0))
    results = fly(env, COAST)
    assert len(results) == 5
    assert env.summary().outcome == "timeout"
    assert env.summary().duration == pytest.approx(0.5)


def test_constant_divert_misses(env):
    """Test firing one thruster for the whole flight misses"""
    env.reset(episode_rng(0, 0))
    results = fly(env, np.array([0, 1, 0, 0], dtype=np.int8))
    summary = env.summary()
    assert summary.outcome in ("fov_exit", "miss")
    assert summary.miss_distance > 100.0
    assert results[-1].terminal == 0.0
    assert summary.fuel_used > 0.0


def test_step_after_done(env):
    """Test stepping a finished episode is a usage error"""
    env.reset(episode_rng(0, 0))
    fly(env, COAST)
    with pytest.raises(UsageError):
        env.step(COAST)


def test_summary_while_running(env):
    """Test the summary needs a finished episode"""
    env.reset(episode_rng(0, 0))
    env.step(COAST)
    with pytest.raises(UsageError):
        env.summary()


def test_invalid_action(env):
    """Test non-binary thruster commands are rejected"""
    env.reset(episode_rng(0, 0))
    with pytest.raises(ValueError):
        env.step(np.array([0, 2, 0, 0]))


# run_episode Tests


def test_run_episode_with_zem(env):
    """Test ZEM guidance hits a zero-error engagement"""
    calls = []
    summary = run_episode(
        env,
        ZemGuidance(),
        episode_rng(1, 0),
        on_step=lambda e, action: calls.append(action.copy()),
    )
    assert summary.outcome == "hit"
    assert len(calls) == summary.steps


def test_env_from_config():
    """Test the environment takes its sections from a run configuration"""
    config = RunConfig(missile=MissileConfig(max_episode_time=3.0))
    env = EngagementEnv.from_config(config)
    assert env.missile.max_episode_time == 3.0
    assert env.scenario == config.scenario


# Integration Step Tests


@pytest.mark.parametrize("index", [0, 1, 2])
def test_miss_insensitive_to_fine_step(index):
    """Test halving the near-range substep moves the miss by under 1 mm"""
    misses = []
    for fine_dt in (0.067e-3, 0.0335e-3):
        env = EngagementEnv(ScenarioConfig(), MissileConfig(fine_dt=fine_dt))
        summary = run_episode(env, ZemGuidance(), episode_rng(11, index))
        assert summary.outcome in ("hit", "miss")
        misses.append(summary.miss_distance)
    assert abs(misses[0] - misses[1]) <= 1e-3

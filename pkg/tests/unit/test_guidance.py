import math

import numpy as np
import pytest

from src.passive_homing.dynamics import EngagementState, MissileBody, TargetBody
from src.passive_homing.errors import ConfigurationError, TargetOpeningError
from src.passive_homing.guidance import (
    PnGuidance,
    PolicyGuidance,
    ZemGuidance,
    create_guidance,
    pn_command,
    pulse_map,
    zem_command,
)
from src.passive_homing.models import MissileConfig, default_thrusters
from src.passive_homing.neuralnet import PolicyNetwork, ValueNetwork
from src.passive_homing.seeker import make_frame, observe
from src.passive_homing.storage import save_checkpoint
from src.passive_homing.utils.rotations import IDENTITY_QUATERNION, axis_angle_quat

A_MAX = 4905.0 / 25.0


@pytest.fixture
def thrusters():
    return default_thrusters()


def engagement(r_tm, v_tm, a_t=(0.0, 0.0, 0.0)):
    """State with the missile at rest at the origin"""
    return EngagementState(
        missile=MissileBody(
            position=np.zeros(3),
            velocity=np.zeros(3),
            attitude=IDENTITY_QUATERNION.copy(),
            mass=50.0,
        ),
        target=TargetBody(
            position=np.array(r_tm, dtype=float),
            velocity=np.array(v_tm, dtype=float),
            commanded_accel=np.array(a_t, dtype=float),
        ),
    )


# zem_command Tests


def test_zem_pure_collision_course():
    """Test a collision course has zero ZEM and zero command"""
    cmd = zem_command(np.array([10000.0, 0, 0]), np.array([-1000.0, 0, 0]), np.zeros(3))
    assert cmd.v_c == pytest.approx(1000.0)
    assert cmd.t_go == pytest.approx(10.0)
    assert np.allclose(cmd.zem, 0.0)
    assert np.allclose(cmd.a_com, 0.0)


def test_zem_lateral_miss():
    """Test a lateral velocity produces ZEM (0, 1000, 0) and a 30 m/s² command"""
    cmd = zem_command(
        np.array([10000.0, 0, 0]), np.array([-1000.0, 100.0, 0]), np.zeros(3)
    )
    assert cmd.t_go == pytest.approx(10.0)
    assert np.allclose(cmd.zem, [0.0, 1000.0, 0.0])
    assert np.allclose(cmd.a_com, [0.0, 30.0, 0.0])


def test_zem_target_accel_cancels():
    """Test the target acceleration term cancels the velocity miss"""
    cmd = zem_command(
        np.array([10000.0, 0, 0]),
        np.array([-1000.0, 100.0, 0]),
        np.array([0.0, -20.0, 0.0]),
    )
    assert np.allclose(cmd.zem, 0.0, atol=1e-9)
    assert np.allclose(cmd.a_com, 0.0, atol=1e-9)


def test_zem_gain_scales_command():
    """Test the command is linear in the navigation constant"""
    r, v = np.array([8000.0, 50.0, -20.0]), np.array([-900.0, 40.0, 10.0])
    a3 = zem_command(r, v, np.zeros(3), n=3.0).a_com
    a4 = zem_command(r, v, np.zeros(3), n=4.0).a_com
    assert np.allclose(a4, a3 * 4.0 / 3.0)


@pytest.mark.parametrize("v", [[1000.0, 0.0, 0.0], [0.0, 100.0, 0.0]])
def test_zem_opening_raises(v):
    """Test an opening or non-closing geometry raises"""
    with pytest.raises(TargetOpeningError):
        zem_command(np.array([10000.0, 0, 0]), np.array(v), np.zeros(3))


# pulse_map Tests


def test_pulse_map_single_thruster(thrusters):
    """Test only the +y thruster clears the threshold"""
    a_com = np.array([0.0, 0.4 * A_MAX, -0.1 * A_MAX])
    action = pulse_map(a_com, IDENTITY_QUATERNION, thrusters, A_MAX)
    assert action.tolist() == [0, 1, 0, 0]


def test_pulse_map_zero_command(thrusters):
    """Test a zero command leaves every thruster off"""
    action = pulse_map(np.zeros(3), IDENTITY_QUATERNION, thrusters, A_MAX)
    assert action.tolist() == [0, 0, 0, 0]


def test_pulse_map_two_axes(thrusters):
    """Test +y and +z fire together"""
    action = pulse_map(
        np.array([0.0, A_MAX, A_MAX]), IDENTITY_QUATERNION, thrusters, A_MAX
    )
    assert action.tolist() == [0, 1, 1, 0]


def test_pulse_map_threshold_is_strict(thrusters):
    """Test a projection of exactly a_max/3 stays off"""
    action = pulse_map(
        np.array([0.0, 0.0, -(A_MAX * (1.0 / 3.0))]),
        IDENTITY_QUATERNION,
        thrusters,
        A_MAX,
    )
    assert action.tolist() == [0, 0, 0, 0]


def test_pulse_map_rotates_into_body(thrusters):
    """Test the command is resolved in the body frame"""
    # Body x along inertial y, body y along inertial -x
    q = axis_angle_quat(np.array([0.0, 0.0, 1.0]), math.pi / 2)
    action = pulse_map(np.array([-A_MAX, 0.0, 0.0]), q, thrusters, A_MAX)
    assert action.tolist() == [0, 1, 0, 0]


def test_pulse_map_axial_command_ignored(thrusters):
    """Test a body x command has no actuator"""
    a_com = np.array([5 * A_MAX, 0.0, 0.0])
    action = pulse_map(a_com, IDENTITY_QUATERNION, thrusters, A_MAX)
    assert action.tolist() == [0, 0, 0, 0]


def test_pulse_map_never_fires_opposing_pair(thrusters):
    """Test at most one thruster per opposing pair fires"""
    rng = np.random.default_rng(0)
    for _ in range(200):
        a_com = rng.normal(scale=A_MAX, size=3)
        action = pulse_map(a_com, IDENTITY_QUATERNION, thrusters, A_MAX)
        assert action[0] + action[1] <= 1
        assert action[2] + action[3] <= 1


def test_pulse_map_rejects_bad_a_max(thrusters):
    """Test non-positive a_max raises"""
    with pytest.raises(ValueError):
        pulse_map(np.zeros(3), IDENTITY_QUATERNION, thrusters, 0.0)


# Guidance Law Tests


def test_zem_guidance_fires_toward_miss():
    """Test ZEM guidance fires +y for a miss along +y"""
    state = engagement((10000.0, 0.0, 0.0), (-1000.0, 400.0, 0.0))
    law = ZemGuidance(MissileConfig())
    frame = make_frame(IDENTITY_QUATERNION, state.r_tm)
    law.reset(frame)
    assert law.act(state, observe(state, frame)).tolist() == [0, 1, 0, 0]


def test_zem_guidance_coasts_when_opening():
    """Test ZEM guidance turns everything off after the flyby"""
    state = engagement((10000.0, 0.0, 0.0), (1000.0, 200.0, 0.0))
    law = ZemGuidance()
    frame = make_frame(IDENTITY_QUATERNION, state.r_tm)
    assert law.act(state, observe(state, frame)).tolist() == [0, 0, 0, 0]


def test_pn_command_normal_to_los():
    """Test PN matches n·v_c·Ω×λ̂ for a simple crossing geometry"""
    a = pn_command(np.array([10000.0, 0, 0]), np.array([-1000.0, 100.0, 0]))
    assert np.allclose(a, [0.0, 30.0, 0.0])


def test_pn_guidance_action():
    """Test PN guidance pulses like ZEM on a non-maneuvering target"""
    state = engagement((10000.0, 0.0, 0.0), (-1000.0, 400.0, 0.0))
    frame = make_frame(IDENTITY_QUATERNION, state.r_tm)
    assert PnGuidance().act(state, observe(state, frame)).tolist() == [0, 1, 0, 0]


def test_policy_guidance_greedy_deterministic():
    """Test greedy policy guidance repeats itself after reset"""
    policy = PolicyNetwork(np.random.default_rng(0))
    law = PolicyGuidance(policy)
    state = engagement((10000.0, 30.0, 10.0), (-1000.0, 0.0, 0.0))
    frame = make_frame(IDENTITY_QUATERNION, state.r_tm)
    obs = observe(state, frame, (0.001, -0.002))

    law.reset(frame)
    first = [law.act(state, obs).tolist() for _ in range(3)]
    law.reset(frame)
    second = [law.act(state, obs).tolist() for _ in range(3)]
    assert first == second


# create_guidance Tests


def test_factory_builds_zem():
    """Test the zem selector"""
    law = create_guidance("zem", MissileConfig(), zem_gain=4.0)
    assert isinstance(law, ZemGuidance)
    assert law.n == 4.0


def test_factory_builds_pn():
    """Test the pn selector"""
    assert isinstance(create_guidance("pn"), PnGuidance)


def test_factory_rl_requires_checkpoint():
    """Test rl without a checkpoint is a configuration error"""
    with pytest.raises(ConfigurationError):
        create_guidance("rl")


def test_factory_rl_missing_checkpoint(tmp_path):
    """Test rl with a missing checkpoint file names the file"""
    with pytest.raises(ConfigurationError, match="missing.npz"):
        create_guidance("rl", checkpoint=tmp_path / "missing.npz")


def test_factory_rl_loads_checkpoint(tmp_path):
    """Test rl loads a saved policy"""
    rng = np.random.default_rng(0)
    path = save_checkpoint(
        tmp_path / "policy.npz", PolicyNetwork(rng), ValueNetwork(rng)
    )
    law = create_guidance("rl", checkpoint=path)
    assert isinstance(law, PolicyGuidance)
    assert law.sample is False


def test_factory_unknown_selector():
    """Test an unknown selector raises"""
    with pytest.raises(ConfigurationError):
        create_guidance("lqr")  # type: ignore[arg-type]

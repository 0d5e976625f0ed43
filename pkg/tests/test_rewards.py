import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khalasi.observations import build_observation, recon_center_gradients
from khalasi.recon import zero_recon_grid
from khalasi.rewards import RewardConfig, reward_step
from khalasi.vehicle import VehicleState

CFG = RewardConfig()


def make_grid(fill_vx=0.0, fill_vy=0.0):
    g = zero_recon_grid((0.0, 0.0), 0.0)
    g.vx[:] = fill_vx
    g.vy[:] = fill_vy
    return g


class TestObservation:
    def test_goal_offset_zero_at_goal(self):
        state = VehicleState(x=10.0, y=20.0)
        obs = build_observation(make_grid(), state, (10.0, 20.0), (0.0, 0.0))
        assert obs.state[0] == 0.0 and obs.state[1] == 0.0

    def test_state_vector_order(self):
        state = VehicleState(x=1.0, y=2.0, ux=0.3, uy=-0.2, theta=0.7)
        obs = build_observation(make_grid(), state, (5.0, 6.0), (0.11, -0.12))
        np.testing.assert_allclose(obs.state,
                                   [4.0, 4.0, 0.3, -0.2, 0.11, -0.12, 0.0, 0.0, 0.7])

    def test_uniform_field_zero_gradients(self):
        assert recon_center_gradients(make_grid(0.4, -0.3)) == (0.0, 0.0)

    def test_linear_field_gradient(self):
        g = make_grid()
        positions = g.node_positions()
        g.vx = 0.1 * positions[..., 0]     # dvx/dx = 0.1 across 0.5-unit cells
        g.vy = -0.2 * positions[..., 1]
        gx, gy = recon_center_gradients(g)
        assert gx == pytest.approx(0.1)
        assert gy == pytest.approx(-0.2)

    def test_non_finite_rejected(self):
        state = VehicleState(x=np.nan, y=0.0)
        with pytest.raises(ValueError):
            build_observation(make_grid(), state, (0.0, 0.0), (0.0, 0.0))


class TestRewardTerms:
    def test_goal_reached_zero_thrust(self):
        rb = reward_step(CFG, (10.0, 0.0), (4.0, 0.0), (0.0, 0.0),
                         (0.0, 0.0), (0.0, 0.0), ground_speed=6.0, flow_speed=1.0)
        assert rb.r_target == CFG.c_target
        assert rb.r_dist == CFG.c_dist
        assert rb.r_thrust == 0.0
        assert rb.r_surf == CFG.surf_r_max  # zero command, moving faster than drift
        assert rb.r_jitter == 0.0
        assert rb.total == pytest.approx(CFG.c_target + CFG.c_dist + CFG.surf_r_max)

    def test_full_thrust_away_no_surf(self):
        rb = reward_step(CFG, (10.0, 0.0), (11.0, 0.0), (0.0, 0.0),
                         (1.0, 1.0), (1.0, 1.0), ground_speed=0.5, flow_speed=0.5)
        # moved away, |a|_1 = 2 over the surf cap, ground speed not above drift
        assert rb.r_target == 0.0
        assert rb.r_dist == -CFG.c_dist
        assert rb.r_thrust == -2.0 * CFG.c_thrust
        assert rb.r_surf == 0.0
        assert rb.r_jitter == 0.0
        assert rb.total == pytest.approx(-CFG.c_dist - 2.0 * CFG.c_thrust)

    def test_surf_ramp_endpoint(self):
        a = (CFG.surf_u_max / 2.0, CFG.surf_u_max / 2.0)
        rb = reward_step(CFG, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0),
                         a, a, ground_speed=1.0, flow_speed=0.5)
        assert rb.r_surf == pytest.approx(CFG.surf_r_min)

    def test_surf_requires_headway(self):
        a = (0.1, 0.1)
        rb = reward_step(CFG, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0),
                         a, a, ground_speed=0.4, flow_speed=0.5)
        assert rb.r_surf == 0.0

    def test_distance_tie_penalized(self):
        rb = reward_step(CFG, (10.0, 0.0), (-10.0, 0.0), (0.0, 0.0),
                         (0.0, 0.0), (0.0, 0.0), ground_speed=0.0, flow_speed=0.0)
        assert rb.r_dist == -CFG.c_dist

    def test_jitter_penalty(self):
        rb = reward_step(CFG, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0),
                         (1.0, -1.0), (-1.0, 1.0), ground_speed=0.0, flow_speed=0.0)
        assert rb.r_jitter == pytest.approx(-CFG.c_jitter * 4.0)


@settings(max_examples=60, deadline=None)
@given(al=st.floats(-1, 1), ar=st.floats(-1, 1), gs=st.floats(0, 2), fs=st.floats(0, 2))
def test_surf_non_increasing_in_command(al, ar, gs, fs):
    a1 = (al, ar)
    a2 = (al / 2.0, ar / 2.0)
    rb1 = reward_step(CFG, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0), a1, a1, gs, fs)
    rb2 = reward_step(CFG, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0), a2, a2, gs, fs)
    if gs > fs and abs(al) + abs(ar) <= CFG.surf_u_max:
        assert rb2.r_surf >= rb1.r_surf - 1e-12


@settings(max_examples=40, deadline=None)
@given(w=st.floats(0.0, 5.0))
def test_total_linear_in_weights(w):
    import dataclasses
    cfg = dataclasses.replace(CFG, w_thrust=w)
    a = (1.0, 0.5)
    rb = reward_step(cfg, (10.0, 0.0), (9.0, 0.0), (0.0, 0.0), a, a, 0.0, 1.0)
    base = reward_step(dataclasses.replace(CFG, w_thrust=0.0),
                       (10.0, 0.0), (9.0, 0.0), (0.0, 0.0), a, a, 0.0, 1.0)
    assert rb.total == pytest.approx(base.total + w * rb.r_thrust)


@settings(max_examples=40, deadline=None)
@given(tx=st.floats(-50, 50), ty=st.floats(-50, 50))
def test_translation_invariance(tx, ty):
    shift = np.array([tx, ty])
    args = ((10.0, 3.0), (9.0, 2.5), (0.0, 0.0))
    a, ap = (0.2, 0.1), (0.1, 0.1)
    rb1 = reward_step(CFG, *args, a, ap, 0.7, 0.3)
    rb2 = reward_step(CFG, *(np.asarray(p) + shift for p in args), a, ap, 0.7, 0.3)
    assert rb1.total == pytest.approx(rb2.total, abs=1e-9)


def test_breakdown_total_is_weighted_sum():
    import dataclasses
    cfg = dataclasses.replace(CFG, w_target=2.0, w_dist=0.5, w_thrust=3.0, w_surf=0.0, w_jitter=1.5)
    rb = reward_step(cfg, (10.0, 0.0), (4.0, 0.0), (0.0, 0.0),
                     (0.3, -0.4), (0.0, 0.0), ground_speed=1.0, flow_speed=0.2)
    expected = (cfg.w_target * rb.r_target + cfg.w_dist * rb.r_dist
                + cfg.w_thrust * rb.r_thrust + cfg.w_surf * rb.r_surf
                + cfg.w_jitter * rb.r_jitter)
    assert rb.total == expected

"""Five-term step reward: sparse goal bonus, distance shaping, thrust
penalty, current-surfing bonus, and command-jitter penalty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RewardConfig:
    w_target: float = 1.0
    w_dist: float = 1.0
    w_thrust: float = 1.0
    w_surf: float = 1.0
    w_jitter: float = 1.0
    c_target: float = 100.0
    c_dist: float = 1.0
    c_thrust: float = 0.5
    c_jitter: float = 0.25
    target_radius: float = 5.0
    surf_u_max: float = 0.5    # command-L1 cap for the surf bonus
    surf_r_min: float = 0.0
    surf_r_max: float = 1.0

    def __post_init__(self):
        if min(self.w_target, self.w_dist, self.w_thrust, self.w_surf, self.w_jitter) < 0:
            raise ValueError("weights must be non-negative")
        if self.target_radius <= 0:
            raise ValueError("target_radius must be positive")
        if not (self.surf_r_max > self.surf_r_min >= 0):
            raise ValueError("need surf_r_max > surf_r_min >= 0")
        if not (0 < self.surf_u_max <= 2.0):
            raise ValueError("surf_u_max must lie in (0, 2]")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "RewardConfig":
        return cls(**d)


@dataclass(frozen=True)
class RewardBreakdown:
    r_target: float
    r_dist: float
    r_thrust: float
    r_surf: float
    r_jitter: float
    total: float

    def as_tuple(self):
        return (self.r_target, self.r_dist, self.r_thrust, self.r_surf,
                self.r_jitter, self.total)


def reward_step(cfg: RewardConfig, prev_p, cur_p, goal, action, prev_action,
                ground_speed: float, flow_speed: float) -> RewardBreakdown:
    """Evaluate all five terms for one transition.

    ``ground_speed`` is the realized over-ground speed for the step and
    ``flow_speed`` the local current speed; the surf bonus requires moving
    faster than pure drift while commanding at most surf_u_max of thrust.
    """
    prev_p = np.asarray(prev_p, dtype=float)
    cur_p = np.asarray(cur_p, dtype=float)
    goal = np.asarray(goal, dtype=float)
    a = np.asarray(action, dtype=float)
    a_prev = np.asarray(prev_action, dtype=float)

    dist_prev = float(np.linalg.norm(prev_p - goal))
    dist_cur = float(np.linalg.norm(cur_p - goal))
    a_l1 = float(np.abs(a).sum())

    r_target = cfg.c_target if dist_cur < cfg.target_radius else 0.0
    # ties take the penalty branch
    r_dist = cfg.c_dist if dist_prev > dist_cur else -cfg.c_dist
    r_thrust = -cfg.c_thrust * a_l1

    if a_l1 <= cfg.surf_u_max and ground_speed > flow_speed:
        r_surf = cfg.surf_r_max - a_l1 * (cfg.surf_r_max - cfg.surf_r_min) / cfg.surf_u_max
    else:
        r_surf = 0.0

    r_jitter = -cfg.c_jitter * float(np.abs(a - a_prev).sum())

    total = (cfg.w_target * r_target + cfg.w_dist * r_dist + cfg.w_thrust * r_thrust
             + cfg.w_surf * r_surf + cfg.w_jitter * r_jitter)
    return RewardBreakdown(r_target, r_dist, r_thrust, r_surf, r_jitter, total)

"""Gym-style environment adapter over the session service wire protocol.

Lets agent and RL frameworks drive episodes through plain HTTP without
linking the engine:

    env = RemoteGridEnv(AdapterConfig(base_url=..., puzzle_id=...))
    observation, info = env.reset()
    observation, reward, terminated, truncated, info = env.step(3)

Episodes that hit the step limit report truncated=True; every other
terminal (solved, rule failure, deadlock) reports terminated=True.
"""

from .client import (
    AdapterConfig,
    EpisodeFinished,
    IllegalActionError,
    RemoteGridEnv,
    ServiceUnavailable,
)

__all__ = [
    "AdapterConfig",
    "EpisodeFinished",
    "IllegalActionError",
    "RemoteGridEnv",
    "ServiceUnavailable",
]

__version__ = "0.1.0"

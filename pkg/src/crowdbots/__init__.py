"""Crowd-in-the-loop evolutionary robotics platform.

Simulated robot species evolve under chat-issued commands and reinforcement,
and per-species recurrent critics learn to predict that reinforcement from
each robot's self-sensed behavior.
"""

__version__ = "0.1.0"

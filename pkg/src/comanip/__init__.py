"""Deterministic planar co-manipulation test bench.

A simulated two-agent team carries an extended rigid board: a synthetic (or
live) leader applies handle forces, a follower controller answers with base
motion, and every trial is scored with the bench's metric set.
"""

__version__ = "0.1.0"

from . import controllers, dynamics, leader, metrics, signals  # noqa: F401

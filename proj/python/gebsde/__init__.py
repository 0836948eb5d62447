"""Fully nonlinear PDE / ergodic BSDE toolkit under volatility uncertainty."""

from ._gebsde import *  # noqa: F401,F403

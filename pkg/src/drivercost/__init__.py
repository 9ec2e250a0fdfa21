"""Learn distributions of driver cost functions from car-following
demonstrations and generate stochastic driver-specific trajectories."""

__version__ = "0.1.0"

from ._kernels import get_backend

__all__ = ["__version__", "get_backend"]

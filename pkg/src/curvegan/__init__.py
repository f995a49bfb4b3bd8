"""Smooth-curve synthesis with a GAN over rational Bezier parameters."""

from . import autodiff, bezier, datasets, metrics, networks, service, training

__version__ = "0.1.0"

__all__ = [
    "autodiff",
    "bezier",
    "datasets",
    "metrics",
    "networks",
    "service",
    "training",
]

"""Discrete pose optimization for base stations with movable antenna surfaces.

A base station carries B antenna surfaces whose 3D positions and 3D
rotations are selected from a finite codebook to maximize the average
multiuser uplink capacity. The package provides the geometry and channel
model, codebook generation, the statistics-aware offline optimizer
(Monte-Carlo conditional gradient over a linearized constraint polytope),
the statistics-free online optimizer (conditional sample mean over measured
sum-rates), sector-antenna baselines and a CLI experiment harness.
"""

__version__ = "0.1.0"

"""Simulation of reflected Brownian motion by random walks on dyadic lattices
and by a myopic conditioned-Brownian scheme."""

__version__ = "0.1.0"

from .domains import Ball, Box, Comb, Polygon, parse_domain
from .lattice import Lattice, build_lattice, transition_matrix
from .myopic import MyopicConfig, simulate_myopic, simulate_myopic_ensemble
from .trajectory import Trajectory
from .walks import interpolate, simulate_ctrw, simulate_discrete_walk, simulate_discrete_walks

__all__ = [
    "Ball", "Box", "Comb", "Polygon", "parse_domain",
    "Lattice", "build_lattice", "transition_matrix",
    "MyopicConfig", "simulate_myopic", "simulate_myopic_ensemble",
    "Trajectory",
    "interpolate", "simulate_ctrw", "simulate_discrete_walk", "simulate_discrete_walks",
]

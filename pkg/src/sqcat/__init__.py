"""Truncated-Fock-space toolkit: engineered two-photon loss drives a bosonic
mode into a squeezed cat state; the package simulates that preparation at
three model tiers, renders phase-space distributions, and analyzes the
states' phase-estimation power."""

__version__ = "0.1.0"

"""Simulator and reconstruction toolkit for mechanical reservoir spectral densities."""

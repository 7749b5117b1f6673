"""Rotosolve coordinate minimization on simulated Pauli-rotation circuits."""

"""Nonlinear term, its splitting and hypothesis checks."""

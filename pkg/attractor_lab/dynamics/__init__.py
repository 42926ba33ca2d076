"""Strongly damped wave equation: linear flow, semigroup and decompositions."""

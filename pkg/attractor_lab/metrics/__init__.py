"""Distances, ball projections, rate fitting and ensemble sampling."""

"""Run registry database."""

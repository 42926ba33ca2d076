"""Experiment orchestration for the four checkable claims."""

"""Maze path-planning suite: dataset generation, exact promising-region
oracle, region-biased RRT* planner, evaluation metrics, and a benchmark
harness."""

__version__ = "0.1.0"

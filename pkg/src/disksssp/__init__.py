"""Exact single-source shortest paths in edge-weighted disk graphs."""

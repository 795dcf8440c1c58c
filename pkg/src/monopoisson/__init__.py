"""Exact distributions and a path sampler for a monotone Poisson process."""

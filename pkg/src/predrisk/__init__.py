"""Bayesian predictive densities for Gaussian data with unknown mean and variance.

Gaussian-mixture shrinkage priors, closed-form and brute-force Bayes predictive
densities, Kullback-Leibler risk differences by Monte Carlo, and the domination
thresholds for the low-dimensional prior.
"""

__version__ = "0.1.0"

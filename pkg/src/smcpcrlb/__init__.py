"""Particle-filter approximation of the posterior Cramer-Rao lower bound."""

"""Numerical services: expressions, quadrature, systems, period and criteria."""

"""Stochastic Volterra equations: CQ time stepping, P1 FEM and strong-rate experiments."""

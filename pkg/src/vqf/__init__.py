"""Factoring biprimes as Ising ground-state problems: clause encoding, preprocessing, Ising
Hamiltonians, exact circuit simulation, BFGS multistart and resource estimates."""

__version__ = "0.1.0"

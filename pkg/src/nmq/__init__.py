"""Non-Markovianity measures for exactly solvable qubit channels."""

__version__ = "0.1.0"

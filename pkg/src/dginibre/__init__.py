"""Deformed complex Ginibre ensemble: deterministic equivalents, local
eigenvalue statistics and checks of the supersymmetric integration
identities."""
__version__ = "0.1.0"

"""Grassmann algebra engine and verifiers for the supersymmetric identities
and the auxiliary lemmas used in the integral representation."""
from .grassmann import *  # noqa: F401,F403
from .supermatrix import SuperMatrix  # noqa: F401

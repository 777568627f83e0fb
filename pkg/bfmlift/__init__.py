"""
BFMLIFT — Toric SYZ / BFM lifting toolkit

Exact construction of the Teleman Lagrangian of a toric Hamiltonian space and
certification of its lift to the BFM space of the Langlands dual group.
"""

__version__ = "1.0.0"

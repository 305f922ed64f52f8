"""
kocert - Keller–Osserman certificates for φ-Laplacian inequalities on the Heisenberg group.
"""

__version__ = "0.1.0"

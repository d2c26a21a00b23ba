"""prpoint: p-adic L-functions of rank-one elliptic curves and the
Perrin-Riou point construction, at desk scale."""

__version__ = "0.1.0"

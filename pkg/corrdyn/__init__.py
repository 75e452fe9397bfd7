"""
corrdyn
Dynamics of the holomorphic correspondences (w - c)^q = z^p
"""

__version__ = "0.1.0"

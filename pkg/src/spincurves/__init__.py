"""spincurves: locally convex curves in the 3-sphere.

Quaternion-pair arithmetic for Spin(4), signed Bruhat cells and their
germ transitions, itineraries of locally convex curves, the word
combinatorics grading the closed strata, and the sphere-dimension
generator for the wedge decompositions.
"""

from . import bruhat, curves, monodromy, spin4, strata, weyl

__all__ = ["spin4", "weyl", "bruhat", "curves", "strata", "monodromy"]
__version__ = "0.1.0"

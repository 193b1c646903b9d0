"""Counting and equidistribution experiments for arithmetic points over Q, imaginary quadratic fields and the Hurwitz order."""

__version__ = "0.1.0"

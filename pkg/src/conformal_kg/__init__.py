"""Numerics for the conformal Klein-Gordon equation and its Poschl-Teller reduction."""

__version__ = "0.1.0"

"""Verification laboratory for kinematic conservation laws of compressible
inviscid flow on Riemannian coordinate charts."""

__version__ = "0.1.0"

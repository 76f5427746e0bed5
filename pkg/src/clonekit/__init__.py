"""Optimal asymptotic quantum cloning machines and their measure-and-prepare rivals."""
__version__ = "0.1.0"

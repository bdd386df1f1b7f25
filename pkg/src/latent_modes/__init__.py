"""Behavioral-mode discovery for control policies via latent-space trajectory clustering."""

__version__ = "0.1.0"

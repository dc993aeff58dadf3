"""Rough-surface slider-bearing lubrication: PINN with trainable Fourier features and an FD reference."""
__version__ = "0.1.0"

"""Joint time allocation and power control for load-coupled multi-cell downlink."""

__version__ = "0.1.0"

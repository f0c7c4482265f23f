"""Configuration module.

Experiment files are handled by :mod:`.experiment`, imported on its own
since it depends on the network package.
"""

from .settings import Settings, settings

__all__ = ["Settings", "settings"]

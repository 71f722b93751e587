"""
CT Lesion Synth - procedural synthetic-lesion generation and evaluation toolkit.
"""

__version__ = "0.1.0"

from src.config import settings

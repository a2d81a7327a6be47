"""
Shared configuration, models and exceptions for KloosterLab.
"""

__version__ = "0.1.0"

"""Utilities module for logging, configuration and error types"""

from .config import Config
from .logger import setup_logger

__all__ = ['Config', 'setup_logger']

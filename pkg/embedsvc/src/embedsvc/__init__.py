"""Sentence-embedding microservice speaking the semvar wire protocol."""

from .app import create_app
from .registry import ModelRegistryEntry, Registry

__version__ = "0.1.0"

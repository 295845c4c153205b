"""Twisted Dolbeault cohomology on invariant complexes and flat tori."""

from .exterior import Form
from .linalg import Indeterminate, kernel_backend
from .model import LieComplexModel, ValidationFailed, load_model

__version__ = "0.1.0"

__all__ = ["Form", "Indeterminate", "LieComplexModel", "ValidationFailed", "kernel_backend", "load_model"]

"""Utility modules for twinsim."""

from .atomic_writer import AtomicFileWriter

__all__ = ["AtomicFileWriter"]

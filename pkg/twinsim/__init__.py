"""twinsim - cycle-level simulator of a dual-threaded in-order core."""

__version__ = "0.1.0"

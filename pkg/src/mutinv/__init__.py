"""Learning plant invariants from mutated control programs."""

__version__ = "0.1.0"

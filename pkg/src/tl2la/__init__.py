"""Traffic-light-to-lane assignment learned from motion patterns."""

__version__ = "0.1.0"

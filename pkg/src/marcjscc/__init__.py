"""Joint source-channel coding feasibility and simulation for multiple-access relay channels."""

__version__ = "0.1.0"

"""Paintbox-driven Markov processes on set partitions with at most k blocks."""

from .masses import DiscreteMixture, MassPartition, PitmanDirichlet, RngStream
from .partitions import SetPartition

__version__ = "0.1.0"

__all__ = ["DiscreteMixture", "MassPartition", "PitmanDirichlet", "RngStream", "SetPartition"]

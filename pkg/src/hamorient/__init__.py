"""Oriented Hamilton cycles in dense digraphs: extremal structure and constructive embedding."""

from .digraph import CyclePattern, Digraph, Embedding, OrientedPath, PartialEmbedding, validate_embedding

__version__ = "0.1.0"

__all__ = ["CyclePattern", "Digraph", "Embedding", "OrientedPath", "PartialEmbedding",
           "validate_embedding", "__version__"]

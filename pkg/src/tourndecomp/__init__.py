"""Path decompositions of tournaments and digraphs."""

__version__ = '0.1.0'

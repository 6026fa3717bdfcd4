"""Knowledge-graph-guided unit test generation for OpenMP/MPI C/C++ code."""

__version__ = "0.1.0"

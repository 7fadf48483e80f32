"""Everywhere-percolating subgraphs of Z^2 plus epsilon-Bernoulli noise, checked on finite windows."""
__version__ = "0.1.0"

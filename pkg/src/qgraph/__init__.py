"""Spectral toolkit for combinatorial and metric graphs."""

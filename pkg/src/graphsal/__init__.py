"""Gradient saliency maps for graph convolutional networks on molecules."""

__version__ = "0.1.0"

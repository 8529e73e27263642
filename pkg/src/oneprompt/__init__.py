"""One-prompt segmentation at desk scale: one prompted template image
conditions segmentation of any query from the same task in a single
forward pass."""

__version__ = "0.1.0"

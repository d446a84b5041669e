"""Reel curation, pitch-grid encoding, a tower/dilation DCGAN and structural metrics."""

__version__ = "0.1.0"

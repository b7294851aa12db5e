"""Ellipse-based segmented varying-curvature foot: geometry, design, walking."""

__version__ = "0.1.0"

"""Formal power-series solver for planar Goursat problems with data on lines through the origin."""

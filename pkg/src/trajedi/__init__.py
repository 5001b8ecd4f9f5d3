"""Calibration-aware pairwise trajectory distances."""

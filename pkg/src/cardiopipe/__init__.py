"""Cardiac CT feature pipeline.

Per-structure radiomic features from CT volumes and labelmaps, classical
atlas construction and deformable registration yielding displacement fields,
SVD-based geometric features, segmentation quality metrics, and an MLP
disease classifier evaluated with cross-validation.
"""

__version__ = "0.1.0"

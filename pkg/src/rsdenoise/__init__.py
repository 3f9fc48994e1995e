"""Noise2Noise denoising pipeline for one-dimensional hyperspectral maps.

Subpackages cover the full workflow: synthetic data generation,
preprocessing, the convolutional autoencoder and its training loop,
fidelity metrics, phase clustering, classical-filter baselines and
block-averaging noise diagnostics, all wired together by the ``rsdenoise``
command-line tool.
"""

__version__ = "0.1.0"

from .core import AcquisitionSet, HyperMap, Spectrum  # noqa: F401

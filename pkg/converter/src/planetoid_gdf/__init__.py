"""Converter from the upstream citation benchmark distribution to GDF."""

from .convert import DATASET_NAMES, ConversionError, convert, load_upstream

__all__ = ["DATASET_NAMES", "ConversionError", "convert", "load_upstream"]

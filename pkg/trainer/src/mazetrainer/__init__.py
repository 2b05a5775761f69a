"""Promising-region predictor: a segmentation CNN over maze map images.

Consumes the planning suite's external artifacts (five-color map /
ground-truth PNGs plus a manifest JSONL) and produces PMAP per-pixel
class-probability files for the planner's biased sampler.
"""

__version__ = "0.1.0"

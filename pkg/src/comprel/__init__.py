"""Compound relation classification with transfer and multi-task training.

Two relation taxonomies ("A" and "B") annotate the same two-word compounds;
models are trained on either taxonomy alone, with weights transferred from a
donor task, or jointly with shared lower layers and two softmax heads.
"""

__version__ = "0.1.0"

from comprel.errors import ComprelError, InputError, NumericError

__all__ = ["ComprelError", "InputError", "NumericError", "__version__"]

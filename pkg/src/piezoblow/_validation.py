"""Internal validation for numeric parameters."""

import math
import operator
from typing import SupportsFloat, SupportsIndex

import numpy as np


def as_index(value: SupportsIndex, name: str) -> int:
    """Return a lossless integer value while rejecting booleans."""
    if isinstance(value, (bool, np.bool_)):
        raise TypeError(f"{name} must be an integer, not a boolean.")
    try:
        return operator.index(value)
    except TypeError as error:
        raise TypeError(f"{name} must be an integer.") from error


def as_real(value: SupportsFloat, name: str) -> float:
    """Return a finite float while rejecting booleans and strings."""
    if isinstance(value, (bool, np.bool_)):
        raise TypeError(f"{name} must be a real number, not a boolean.")
    if isinstance(value, (str, bytes)):
        raise TypeError(f"{name} must be a real number.")
    try:
        number = float(value)
    except (TypeError, ValueError) as error:
        raise TypeError(f"{name} must be a real number.") from error
    if not math.isfinite(number):
        raise ValueError(f"{name} must be finite; received {number}.")
    return number


def validate_positive(value: SupportsFloat, name: str) -> float:
    """Return a strictly positive real value."""
    number = as_real(value, name)
    if number <= 0.0:
        raise ValueError(f"{name} must be greater than zero; received {number}.")
    return number


def validate_count(value: SupportsIndex, name: str, minimum: int) -> int:
    """Return an integer no smaller than ``minimum``."""
    count = as_index(value, name)
    if count < minimum:
        raise ValueError(f"{name} must be at least {minimum}; received {count}.")
    return count


def validate_open_interval(
    value: SupportsFloat,
    name: str,
    low: float,
    high: float,
) -> float:
    """Return a real value strictly between ``low`` and ``high``."""
    number = as_real(value, name)
    if not low < number < high:
        raise ValueError(
            f"{name} must lie strictly between {low} and {high}; received {number}."
        )
    return number

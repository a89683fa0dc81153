"""Utility functions for moment-realizer."""

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import InstanceFormatError

logger = logging.getLogger(__name__)

Rational = Union[int, str, Fraction]

_RATIONAL_PATTERN = re.compile(r"^\s*[+-]?\d+(/\d+)?\s*$")


def to_fraction(value: Any, path: str = "$") -> Fraction:
    """
    Convert an integer, Fraction or "p/q" string to an exact Fraction.

    Floats and decimal strings are rejected so that no value ever passes
    through binary floating point.

    Args:
        value: Value to convert
        path: JSON path reported on failure

    Returns:
        Exact rational value
    """
    if isinstance(value, bool):
        raise InstanceFormatError(f"expected a rational, got boolean {value!r}", path)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        if not _RATIONAL_PATTERN.match(value):
            raise InstanceFormatError(
                f"expected a rational string 'p/q', got {value!r}", path
            )
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise InstanceFormatError(f"zero denominator in {value!r}", path)
    raise InstanceFormatError(
        f"expected an integer or 'p/q' string, got {type(value).__name__}", path
    )


def format_rational(value: Fraction) -> str:
    """Format a rational as 'p/q' in lowest terms ('n' for integers)."""
    return str(Fraction(value))


def rational_array(data: Any, shape: Optional[Tuple[int, ...]] = None,
                   path: str = "$") -> np.ndarray:
    """
    Build a dense object-dtype array of Fractions.

    Args:
        data: Scalar, nested sequence or ndarray
        shape: Required shape (checked when given)
        path: JSON path used in error messages

    Returns:
        numpy array with dtype=object holding Fraction entries
    """
    try:
        raw = np.array(data, dtype=object)
    except ValueError as e:
        raise InstanceFormatError(f"ragged nested array ({e})", path)
    if shape is not None and raw.shape != tuple(shape):
        raise InstanceFormatError(
            f"expected shape {tuple(shape)}, got {raw.shape}", path
        )
    out = np.empty(raw.shape, dtype=object)
    for index in np.ndindex(raw.shape):
        suffix = "".join(f"[{i}]" for i in index)
        out[index] = to_fraction(raw[index], f"{path}{suffix}")
    return out


def zeros(shape: Tuple[int, ...]) -> np.ndarray:
    """Rational zero array of the given shape."""
    return np.full(shape, Fraction(0), dtype=object)


def pair(a: Any, b: Any) -> Fraction:
    """Full contraction sum(a * b) of two equally shaped rational arrays."""
    total = Fraction(0)
    for x, y in zip(np.ravel(a), np.ravel(b)):
        total += x * y
    return total


def max_abs(values: Iterable[Any]) -> Fraction:
    """Largest absolute value (0 for an empty iterable)."""
    best = Fraction(0)
    for v in values:
        if abs(v) > best:
            best = abs(Fraction(v))
    return best


def rational_to_json(data: Any) -> Any:
    """Convert a rational scalar/array into nested lists of 'p/q' strings."""
    if isinstance(data, np.ndarray):
        if data.ndim == 0:
            return format_rational(data[()])
        return [rational_to_json(item) for item in data]
    if isinstance(data, (list, tuple)):
        return [rational_to_json(item) for item in data]
    return format_rational(data)


def parse_labels(text: str) -> List[str]:
    """Split a comma-separated site list; a bare integer n means s0..s{n-1}."""
    text = text.strip()
    if text.isdigit():
        return [f"s{i}" for i in range(int(text))]
    return [label.strip() for label in text.split(",") if label.strip()]


def parse_rational_list(text: str, path: str = "$") -> List[Fraction]:
    """Parse a comma-separated list of rationals such as '1/2,1/3'."""
    return [to_fraction(item, f"{path}[{i}]")
            for i, item in enumerate(text.split(","))]


def format_vector(values: Sequence[Any]) -> str:
    """Compact '(a, b, c)' rendering for console output."""
    return "(" + ", ".join(str(v) for v in values) + ")"


def ensure_dir(path: Union[str, Path]):
    """Ensure directory exists, creating it if necessary."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> List[logging.Handler]:
    """
    Plain stream (and file) logging for library users outside the CLI.

    Args:
        level: Logging level name
        log_file: Optional log file path

    Returns:
        The handlers attached to the package logger
    """
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    package_logger = logging.getLogger("moment_realizer")
    for handler in handlers:
        handler.setFormatter(formatter)
        package_logger.addHandler(handler)
    package_logger.setLevel(getattr(logging, level.upper()))
    return handlers

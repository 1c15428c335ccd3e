"""
Utility Functions for the pessimal packing toolkit

This file contains helper functions used across the modules:
number formatting, JSON file I/O, seeds and report tables.
Data/configuration goes in config.py
"""

import json
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from config import DEFAULT_SEED, RENDER_CONFIG, SEED_ENV_VAR

logger = logging.getLogger(__name__)

ModelT = TypeVar('ModelT', bound=BaseModel)


class InputError(ValueError):
    """Unreadable or invalid input file; the message names the path and position."""


# =============================================================================
# FORMATTING
# =============================================================================

def format_float(value: Optional[float], decimals: int = 6) -> str:
    """
    Format a number for report text.

    Args:
        value: Number to format (None prints as n/a)
        decimals: Digits after the decimal point

    Returns:
        Formatted string like "0.892691"
    """
    if value is None:
        return 'n/a'
    return f"{value:.{decimals}f}"


def format_fraction(value: Fraction) -> str:
    """Exact rational as "p/q" (always with a denominator)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_coordinate(value: float) -> str:
    """SVG coordinate with the fixed number format; negative zero prints as 0."""
    text = RENDER_CONFIG['number_format'].format(value)
    if text.lstrip('-').strip('0.') == '':
        return RENDER_CONFIG['number_format'].format(0.0)
    return text


# =============================================================================
# JSON FILES
# =============================================================================

def load_json(path) -> Any:
    """
    Read a JSON file.

    Args:
        path: File to read

    Returns:
        Parsed JSON value

    Raises:
        InputError: missing file, or a syntax error reported as path:line:column
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_model(path, model: Type[ModelT]) -> ModelT:
    """Read a JSON file and validate it against a schema model."""
    data = load_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = '.'.join(str(p) for p in first['loc']) or '<root>'
        raise InputError(f"{path}: {where}: {first['msg']}") from exc


def write_json(path, data: Dict) -> None:
    """Write JSON with sorted keys so repeated runs produce identical files."""
    path = Path(path)
    try:
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    logger.info(f"wrote {path}")


# =============================================================================
# RANDOMNESS
# =============================================================================

def resolve_seed(seed: Optional[int] = None) -> int:
    """
    Pick the RNG seed: explicit flag, then the environment, then the default.

    Args:
        seed: Value of --seed, if given

    Returns:
        Seed to use
    """
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV_VAR}={env!r} is not an integer") from exc
    return DEFAULT_SEED


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(resolve_seed(seed))


# =============================================================================
# REPORT TABLES
# =============================================================================

def report_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """Key/value report rows as a two-column DataFrame."""
    return pd.DataFrame(rows, columns=['quantity', 'value'])


def frame_to_text(df: pd.DataFrame, decimals: int = 6) -> str:
    if df.empty:
        return ''
    return df.to_string(index=False, float_format=lambda v: format_float(v, decimals))

"""
JSON serialization utilities.
Ensures numpy types, enums, paths and models are always JSON-safe.
"""
import json
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel


def json_safe(obj: Any) -> Any:
    """
    Convert objects to JSON-safe primitives.
    Handles numpy scalars and arrays, enums, paths, pydantic models, NaN and infinity.
    """
    if obj is None:
        return None

    if isinstance(obj, Enum):
        return obj.value

    if isinstance(obj, Path):
        return str(obj)

    if isinstance(obj, BaseModel):
        return json_safe(obj.model_dump(mode="python"))

    # bool before int: bool is an int subclass
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)

    # Numpy scalars
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)

    if isinstance(obj, float):
        if np.isnan(obj) or np.isinf(obj):
            return None
        return obj

    if isinstance(obj, (int, str)):
        return obj

    if isinstance(obj, np.ndarray):
        return json_safe(obj.tolist())

    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}

    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]

    return str(obj)


def dumps(document: Any) -> str:
    """Serialize with stable key order and round-trip exact floats."""
    return json.dumps(json_safe(document), indent=2, allow_nan=False) + "\n"

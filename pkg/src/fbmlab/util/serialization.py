# fbmlab/util/serialization.py

import dataclasses
import math
from pathlib import Path
from typing import Any

import numpy as np


def sanitize_for_serialization(obj: Any) -> Any:
    """
    Recursively convert numpy types, paths and report objects to native
    Python types so that the result contains only dicts, lists, str, int,
    float, bool, None.

    - np.generic  → Python scalar via .item()
    - np.ndarray  → Python list (nested)
    - Path        → str
    - object with a ``dict()`` method (reports, estimates) → its dict
    - dataclass   → field dict
    - tuple → list
    - non-finite float → None (strict JSON)
    - dict  → new dict with str keys and sanitized values
    """
    # 1) numpy scalar (int64, float32, bool_, …)
    if isinstance(obj, np.generic):
        return sanitize_for_serialization(obj.item())

    # 2) numpy array → nested list
    if isinstance(obj, np.ndarray):
        return sanitize_for_serialization(obj.tolist())

    if isinstance(obj, Path):
        return obj.as_posix()

    # 3) report-style objects expose dict()
    to_dict = getattr(obj, "dict", None)
    if callable(to_dict) and not isinstance(obj, type):
        return sanitize_for_serialization(to_dict())

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: sanitize_for_serialization(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }

    # 4) dict → sanitize each value
    if isinstance(obj, dict):
        return {str(key): sanitize_for_serialization(val) for key, val in obj.items()}

    # 5) list or tuple → sanitize each element, return a list
    if isinstance(obj, (list, tuple)):
        return [sanitize_for_serialization(val) for val in obj]

    if isinstance(obj, float) and not math.isfinite(obj):
        return None

    # 6) plain Python: int, float, str, bool, None
    return obj

"""Input validation helpers shared by the estimator facade and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .errors import BadShape, EvenInput, LengthMismatch, TooSmall


def check_target(m) -> int:
    """An odd integer m >= 9."""
    if isinstance(m, (bool, np.bool_)) or not isinstance(m, (numbers.Integral, np.integer)):
        if isinstance(m, (float, np.floating)) and float(m).is_integer():
            m = int(m)
        else:
            raise TypeError(f"target must be an integer, got {m!r}")
    m = int(m)
    if m % 2 == 0:
        raise EvenInput(f"m={m} is even; strip factors of 2 first")
    if m < 9:
        raise TooSmall(f"m={m} < 9")
    return m


def check_targets(X) -> np.ndarray:
    """1-D int64 array of targets from a scalar, sequence or (k, 1) array."""
    arr = np.asarray(X)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    elif arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    elif arr.ndim != 1:
        raise BadShape(f"targets must be 1-D or a single column, got shape {arr.shape}")
    if arr.size == 0:
        raise BadShape("no targets given")
    return np.array([check_target(v.item() if hasattr(v, "item") else v) for v in arr], dtype=np.int64)


def check_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, (numbers.Integral, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(seed) -> int:
    return check_positive_int("seed", seed, minimum=0)


def check_params(params, size: int) -> np.ndarray:
    arr = np.asarray(params, dtype=np.float64).reshape(-1)
    if arr.size != size:
        raise LengthMismatch(f"expected {size} parameters, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("parameters must be finite")
    return arr


def resolve_layers(policy, n: int) -> int:
    """Layer count from an int or the string "n" (one layer per qubit)."""
    if isinstance(policy, str):
        if policy.strip().lower() == "n":
            return int(n)
        policy = int(policy)
    return check_positive_int("layers", policy, minimum=0)


def parse_layer_policy(text: str) -> list:
    """"3" -> [3], "n" -> ["n"], "1:5" -> [1..5], "1,3,n" -> [1, 3, "n"]."""
    out: list = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if part.lower() == "n":
            out.append("n")
        elif ":" in part:
            a, b = (int(x) for x in part.split(":"))
            if b < a:
                raise ValueError(f"empty layer range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(check_positive_int("layers", int(part), minimum=0))
    if not out:
        raise ValueError("empty layer policy")
    return out

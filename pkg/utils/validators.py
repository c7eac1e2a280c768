import math
import re
from typing import Dict, List, Optional

import numpy as np


class CoefficientValidator:
    """Checks coefficient strings before they reach sympy.
    Only numbers, + - * / ( ) ** and sqrt(...) are accepted; anything else is rejected
    so imported JSON can never evaluate arbitrary code.
    """

    _ALLOWED = re.compile(r"^[0-9eE+\-*/().\s]*(sqrt[0-9eE+\-*/().\s]*)*$")

    @staticmethod
    def is_safe_expression(text: Optional[str]) -> bool:
        if text is None:
            return False
        t = text.strip()
        if not t:
            return False
        if not CoefficientValidator._ALLOWED.match(t):
            return False
        # at least one digit, and no stray exponent letters outside numbers
        if not any(ch.isdigit() for ch in t):
            return False
        stripped = re.sub(r"\d(\.\d*)?[eE][+\-]?\d", "", t.replace("sqrt", ""))
        return "e" not in stripped.lower()


class GridSpecValidator:
    """Parses grid specifications used by the sweep commands.

    Accepted forms, joined with '+':
      - comma list of numbers:       1e-2,5e-3
      - log-spaced decades:          logspace:1e-8:1:5  (start, stop, points per decade)
    """

    _LOGSPACE = re.compile(r"^logspace:([^:]+):([^:]+):(\d+)$")

    @staticmethod
    def parse(spec: str) -> np.ndarray:
        if spec is None or not spec.strip():
            raise ValueError("Empty grid specification")
        values: List[float] = []
        for part in spec.split("+"):
            part = part.strip()
            m = GridSpecValidator._LOGSPACE.match(part)
            if m:
                values.extend(GridSpecValidator._logspace(float(m.group(1)), float(m.group(2)), int(m.group(3))))
                continue
            for item in part.split(","):
                item = item.strip()
                if not item:
                    continue
                try:
                    values.append(float(item))
                except ValueError as e:
                    raise ValueError(f"Invalid grid value {item!r} in {spec!r}") from e
        grid = np.unique(np.asarray(values, dtype=float))
        if grid.size == 0:
            raise ValueError(f"Grid specification {spec!r} produced no points")
        if np.any(grid < 0) or not np.all(np.isfinite(grid)):
            raise ValueError(f"Grid values must be finite and nonnegative: {spec!r}")
        return grid

    @staticmethod
    def _logspace(start: float, stop: float, per_decade: int) -> List[float]:
        if start <= 0 or stop <= 0 or stop < start:
            raise ValueError(f"logspace needs 0 < start <= stop, got {start}, {stop}")
        if per_decade < 1:
            raise ValueError("logspace needs at least one point per decade")
        lo, hi = math.log10(start), math.log10(stop)
        n = int(round((hi - lo) * per_decade)) + 1
        return list(np.logspace(lo, hi, n))


class ParameterValidator:
    """Parses 'name=value' pairs for family instantiation."""

    _PAIR = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*$")

    @staticmethod
    def parse_pairs(pairs: List[str]) -> Dict[str, str]:
        result: Dict[str, str] = {}
        for raw in pairs or []:
            m = ParameterValidator._PAIR.match(raw)
            if not m:
                raise ValueError(f"Expected name=value, got {raw!r}")
            name, value = m.group(1), m.group(2)
            if not CoefficientValidator.is_safe_expression(value):
                raise ValueError(f"Invalid value for {name}: {value!r}")
            if name in result:
                raise ValueError(f"Parameter {name} given twice")
            result[name] = value
        return result

    @staticmethod
    def parse_window(text: str) -> tuple:
        parts = [p.strip() for p in (text or "").split(",")]
        if len(parts) != 4:
            raise ValueError(f"Window needs re_min,re_max,im_min,im_max, got {text!r}")
        re_min, re_max, im_min, im_max = (float(p) for p in parts)
        if not (re_min < 0 < re_max and im_min < 0 < im_max):
            raise ValueError(f"Window must contain the origin in its interior: {text!r}")
        return re_min, re_max, im_min, im_max

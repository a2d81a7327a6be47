"""
Flat ``key = value`` experiment configs.

Lines are ``key = value``; ``#`` starts a comment. ``kind``, ``output`` and
``format`` are reserved keys, everything else becomes a parameter.
Precedence when merging: command-line flag > ``--set`` override > file > default.
"""

from typing import Any, Dict, Iterable, List, Optional, Tuple, Union
from pathlib import Path
from pydantic import ValidationError
from shared.exceptions import ConfigValidationError
from shared.models import (
    ExperimentConfig,
    ExperimentKind,
    IntervalSpec,
    LinearPoly,
    MultiSumSpec,
    ParamValue,
    ReportFormat,
)
import logging

logger = logging.getLogger(__name__)

RESERVED_KEYS = ("kind", "output", "format")


def coerce_value(raw: str) -> ParamValue:
    """Parse a config value: bool, int, float, else the stripped string."""
    text = raw.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_lines(lines: Iterable[str], source: str = "<config>") -> Dict[str, ParamValue]:
    """
    Parse ``key = value`` lines.

    Raises:
        ConfigValidationError: on a line without ``=`` or an empty key
    """
    values: Dict[str, ParamValue] = {}
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigValidationError(f"{source}:{number}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigValidationError(f"{source}:{number}: empty key")
        values[key] = coerce_value(raw)
    return values


def load_file(path: Union[str, Path]) -> Dict[str, ParamValue]:
    """Read and parse one config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError(f"cannot read config {path}: {e}") from e
    return parse_lines(text.splitlines(), source=str(path))


def parse_overrides(overrides: Optional[Iterable[str]]) -> Dict[str, ParamValue]:
    """Parse repeated ``--set key=value`` arguments."""
    return parse_lines(overrides or [], source="--set")


def build_config(
    kind: Optional[str] = None,
    file_values: Optional[Dict[str, ParamValue]] = None,
    overrides: Optional[Dict[str, ParamValue]] = None,
    flags: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Merge the layers into an ExperimentConfig.

    Args:
        kind: Kind from the command line (wins over the file)
        file_values: Parsed config file
        overrides: Parsed ``--set`` values
        flags: Command-line flags; None values are treated as unset

    Raises:
        ConfigValidationError: missing or unknown kind, bad format
    """
    merged: Dict[str, Any] = {}
    for layer in (file_values or {}, overrides or {}, flags or {}):
        merged.update({k: v for k, v in layer.items() if v is not None})
    if kind is not None:
        merged["kind"] = kind

    if "kind" not in merged:
        raise ConfigValidationError("experiment kind is missing")
    try:
        return ExperimentConfig(
            kind=ExperimentKind(str(merged.pop("kind"))),
            output=merged.pop("output", None),
            format=ReportFormat(str(merged.pop("format", ReportFormat.CSV.value))),
            params=merged,
        )
    except (ValueError, ValidationError) as e:
        raise ConfigValidationError(str(e)) from e


def load_config(path: Union[str, Path], overrides: Optional[Iterable[str]] = None) -> ExperimentConfig:
    """Config file plus ``--set`` overrides."""
    return build_config(file_values=load_file(path), overrides=parse_overrides(overrides))


# ============================================
# Parameter access
# ============================================

_TYPES = {int: "integer", float: "number", bool: "boolean", str: "string"}


def param(params: Dict[str, ParamValue], key: str, kind: type, default: Any = ...) -> Any:
    """
    Typed parameter lookup.

    Ints are accepted where floats are expected; everything else must match.

    Raises:
        ConfigValidationError: missing required key or wrong type
    """
    if key not in params:
        if default is ...:
            raise ConfigValidationError(f"missing required parameter '{key}'")
        return default
    value = params[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigValidationError(f"parameter '{key}' must be an integer, got {value!r}")
    if kind is str:
        return str(value)
    if not isinstance(value, kind):
        raise ConfigValidationError(f"parameter '{key}' must be a {_TYPES[kind]}, got {value!r}")
    return value


def int_list(params: Dict[str, ParamValue], key: str) -> List[int]:
    """A comma-separated integer list (a bare int is a one-element list)."""
    raw = params.get(key)
    if raw is None:
        raise ConfigValidationError(f"missing required parameter '{key}'")
    if isinstance(raw, int) and not isinstance(raw, bool):
        return [raw]
    try:
        return [int(part) for part in str(raw).split(",") if part.strip()]
    except ValueError as e:
        raise ConfigValidationError(f"parameter '{key}' must be a list of integers, got {raw!r}") from e


def interval_from(params: Dict[str, ParamValue], p: Optional[int] = None) -> IntervalSpec:
    """(M, M+N] from ``M``/``N``; the primitive residues 1..p-1 when both are absent."""
    if "M" not in params and "N" not in params and p is not None:
        return IntervalSpec.full_period(p)
    try:
        return IntervalSpec(M=param(params, "M", int, 0), N=param(params, "N", int))
    except ValidationError as e:
        raise ConfigValidationError(str(e)) from e


def multisum_spec_from(params: Dict[str, ParamValue]) -> MultiSumSpec:
    """
    Multi-linear spec from ``polys = a:b, a:b, ..``, ``orders = k, k, ..`` and ``h``.

    Raises:
        ConfigValidationError: malformed polynomial list or mismatched lengths
    """
    raw = param(params, "polys", str)
    polys: List[LinearPoly] = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        a, _, b = part.partition(":")
        try:
            polys.append(LinearPoly(a=int(a), b=int(b or 0)))
        except ValueError as e:
            raise ConfigValidationError(f"bad polynomial {part!r}, expected a:b") from e
    try:
        return MultiSumSpec(polys=polys, orders=int_list(params, "orders"), h=param(params, "h", int, 0))
    except ValidationError as e:
        raise ConfigValidationError(str(e)) from e


def partition_from(params: Dict[str, ParamValue], p: int, h: int) -> List[IntervalSpec]:
    """
    Consecutive intervals of ``length`` (default 2h) starting at 0, ``count`` of them.

    Interval t covers t*L .. t*L + L - 1.
    """
    length = param(params, "length", int, 2 * h)
    if length < 1:
        raise ConfigValidationError(f"interval length must be positive, got {length}")
    count = param(params, "count", int, p // length)
    return [IntervalSpec(M=t * length - 1, N=length) for t in range(count)]


def prime_range(params: Dict[str, ParamValue]) -> Tuple[Optional[int], Optional[int]]:
    """``p_lo``/``p_hi`` when both are given, else (None, None)."""
    lo, hi = params.get("p_lo"), params.get("p_hi")
    if lo is None and hi is None:
        return None, None
    if lo is None or hi is None:
        raise ConfigValidationError("p_lo and p_hi must be given together")
    return param(params, "p_lo", int), param(params, "p_hi", int)

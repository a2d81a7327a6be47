"""
Report serialization: CSV and JSON with a fixed number format.

Floats with |x| >= 0.1 (and zero) are written as ``%.6f``, smaller ones as
``%.6e``; Python's formatting rounds half to even on the binary value.
"""

from typing import Any, Dict, List, Optional, Sequence, TextIO, Union
from pathlib import Path
from shared.models import ExperimentResult, ReportFormat
import numpy as np
import math
import json
import csv
import io
import sys
import logging

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"


def format_number(value: Any) -> str:
    """Render one CSV field."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0 or abs(x) >= 0.1:
            return f"{x:.6f}"
        return f"{x:.6e}"
    if value is None:
        return ""
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isinf(x) or math.isnan(x):
            return format_number(x)
        return x
    return value


def render_csv(results: Sequence[ExperimentResult]) -> str:
    """
    Render results as CSV.

    Consecutive results with the same header share one header line; a sampled
    result is preceded by its ``# rng=PCG64 seed=<seed>`` line.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    last_header = None
    for result in results:
        if result.seed is not None:
            buffer.write(f"# rng={RNG_NAME} seed={result.seed}\n")
            last_header = None
        if result.header != last_header:
            writer.writerow(result.header)
            last_header = result.header
        for row in result.rows:
            writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def render_json(results: Sequence[ExperimentResult]) -> str:
    """One JSON object per result, fields mirroring the CSV header."""
    payload: List[Dict[str, Any]] = []
    for result in results:
        entry: Dict[str, Any] = {
            "kind": result.kind.value,
            "rows": [
                {name: _json_value(v) for name, v in zip(result.header, row)}
                for row in result.rows
            ],
        }
        if result.seed is not None:
            entry["rng"] = RNG_NAME
            entry["seed"] = result.seed
        payload.append(entry)
    return json.dumps(payload if len(payload) != 1 else payload[0], indent=2, sort_keys=False) + "\n"


def render(results: Sequence[ExperimentResult], fmt: ReportFormat) -> str:
    """Dispatch on the report format."""
    if ReportFormat(fmt) is ReportFormat.JSON:
        return render_json(results)
    return render_csv(results)


def write_report(
    results: Sequence[ExperimentResult],
    fmt: ReportFormat,
    output: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None
) -> Optional[Path]:
    """
    Write rendered results to ``output`` (atomically) or to a stream.

    Returns:
        The written path, or None when written to the stream
    """
    text = render(results, fmt)
    if output is None:
        (stream or sys.stdout).write(text)
        return None
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
    logger.info(f"Wrote {sum(len(r.rows) for r in results)} rows to {path}")
    return path


def error_record(kind: Optional[str], error: BaseException, exit_code: int) -> str:
    """Machine-readable failure line for stderr."""
    return json.dumps({
        "status": "error",
        "kind": kind,
        "error_type": type(error).__name__,
        "message": str(error),
        "exit_code": exit_code,
    })

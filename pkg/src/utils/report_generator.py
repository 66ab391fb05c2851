"""
JSON report builder for every CLI command
"""

import json
import math
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, Optional

import numpy as np

from ..models.failure_data import FailureLog

TOOL_NAME = "relgrowth"
TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = 1
FOOTER = "AIC = 2k - 2 lnL; BIC = k ln(n) - 2 lnL (standard definitions)"


def _jsonable(value: Any) -> Any:
    """Plain JSON values; non-finite floats become strings so the output stays valid JSON"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


class ReportGenerator:
    @staticmethod
    def digest(log: FailureLog) -> Dict[str, Any]:
        return {
            "kind": log.kind.value,
            "rows": log.n_observations,
            "events": log.n_events,
            "horizon": log.total_time,
        }

    @staticmethod
    def build(
        command: str,
        results: Dict[str, Any],
        input_digest: Optional[Dict[str, Any]] = None,
        warnings: Iterable[str] = (),
        timestamp: bool = True,
        footer: bool = False,
    ) -> Dict[str, Any]:
        report = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
            "command": command,
            "input": input_digest or {},
            "results": results,
            "warnings": list(warnings),
        }
        if timestamp:
            report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        if footer:
            report["note"] = FOOTER
        return _jsonable(report)

    @staticmethod
    def render(report: Dict[str, Any]) -> str:
        return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"

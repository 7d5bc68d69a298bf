import enum
import json
import math
from typing import Any, Dict, List, Sequence

import pandas as pd
import tabulate

from annulus_restriction.logspace import LogReal

LINEAR_LOG_FLOOR = -700.0
FLOAT_FORMAT = "%.17g"


class OutputFormat(enum.Enum):
    csv = "csv"
    json = "json"
    table = "table"


def logreal_columns(name: str, value: LogReal) -> Dict[str, Any]:
    """sign and log magnitude always; the plain value only while it is a normal double"""
    return {
        f"{name}_sign": value.sign,
        f"{name}_log": value.log,
        name: value.value if value.log > LINEAR_LOG_FLOOR else None,
    }


def to_frame(records: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(list(records))


def format_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):  # numpy scalars
        return _json_value(value.item())
    return value


def format_json(frame: pd.DataFrame) -> str:
    rows: List[Dict[str, Any]] = [
        {key: _json_value(None if pd.isna(value) else value) for key, value in row.items()}
        for row in frame.to_dict(orient="records")
    ]
    return json.dumps(rows, allow_nan=False) + "\n"


def format_table(frame: pd.DataFrame) -> str:
    return tabulate.tabulate(frame.to_dict(orient="records"), headers="keys", floatfmt=".10g") + "\n"


def render(records: Sequence[Dict[str, Any]], fmt: OutputFormat) -> str:
    frame = to_frame(records)
    if fmt == OutputFormat.json:
        return format_json(frame)
    if fmt == OutputFormat.table:
        return format_table(frame)
    return format_csv(frame)

"""
Report serialization: sorted, indented JSON through orjson and a flat CSV of rows
"""
import logging
import math
import os
import tempfile
from typing import Any, Dict, Tuple

import numpy as np
import orjson
import pandas as pd

from ..state import Report

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["experiment_id", "name", "value", "tolerance", "comparison", "asserted", "passed", "note"]


def _clean(value: Any) -> Any:
    """Replace non-finite floats and numpy scalars so the JSON is valid and stable"""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return "inf" if value > 0 else "-inf"
    return value


def report_payload(report: Report) -> Dict[str, Any]:
    payload = report.model_dump(mode="python")
    payload["passed"] = report.passed
    return _clean(payload)


def dumps(report: Report) -> bytes:
    """Deterministic JSON bytes of a report"""
    return orjson.dumps(report_payload(report), option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2)


def rows_frame(report: Report) -> pd.DataFrame:
    records = [{"experiment_id": report.experiment_id, **row.model_dump()} for row in report.rows]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_report(report: Report, directory: str) -> Tuple[str, str]:
    """
    Write <directory>/<experiment_id>.json and .csv atomically

    Returns:
        (json_path, csv_path)
    """
    os.makedirs(directory, exist_ok=True)
    json_path = os.path.join(directory, f"{report.experiment_id}.json")
    csv_path = os.path.join(directory, f"{report.experiment_id}.csv")
    _atomic_write(json_path, dumps(report))
    csv_text = rows_frame(report).to_csv(index=False, lineterminator="\n", float_format="%.17g")
    _atomic_write(csv_path, csv_text.encode("utf-8"))
    logger.info("report %s written to %s", report.experiment_id, directory)
    return json_path, csv_path

# src/utils/report_writer.py
"""
Deterministic JSON and CSV artefacts, published atomically.
"""

import csv
import io
import json
import math
import os
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .logging import logger

FLOAT_FORMAT = ".17g"


def _package_version() -> str:
    try:
        return metadata.version("rgflow")
    except metadata.PackageNotFoundError:
        return "unknown"


def json_safe(value: Any) -> Any:
    """
    Plain JSON types: numpy scalars and arrays unwrapped, non-finite floats as strings.
    """
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


class ReportWriter:
    """
    Writes run artefacts below one output directory.

    JSON files are {"metadata": ..., "result": ...} with sorted keys; only the
    metadata block carries the timestamp and version, so results are
    byte-identical across runs with the same inputs.
    """

    def __init__(self, output_dir: Union[str, Path], command: Optional[str] = None) -> None:
        """
        Initialize the writer.

        Args:
            output_dir: Directory receiving the files (created on first write)
            command: Subcommand name recorded in the metadata
        """
        self.output_dir = Path(output_dir)
        self.command = command
        self.written: List[Path] = []

    def _publish(self, name: str, text: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        tmp_path = path.with_name(path.name + ".tmp")
        try:
            with open(tmp_path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(tmp_path, path)
        except OSError:
            if tmp_path.exists():
                tmp_path.unlink()
            raise
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def metadata(self, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": _package_version(),
        }
        if self.command:
            data["command"] = self.command
        data.update(extra or {})
        return data

    def write_json(
        self, name: str, result: Dict[str, Any], metadata: Optional[Dict[str, Any]] = None
    ) -> Path:
        payload = {"metadata": json_safe(self.metadata(metadata)), "result": json_safe(result)}
        text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        return self._publish(name, text)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
        return self._publish(name, buffer.getvalue())

    def write_table(self, name: str, table: Any) -> Path:
        """
        CSV from any object exposing csv_header() and csv_rows().
        """
        return self.write_csv(name, table.csv_header(), table.csv_rows())

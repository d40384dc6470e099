"""CSV and JSON files for campaigns, learning curves and trajectories

CSV headers are the field names of the matching pydantic model, in
declaration order.
"""

import csv
import logging
from pathlib import Path
from typing import Optional, Sequence, TypeVar

from pydantic import BaseModel, ValidationError

from ..errors import ReportFormatError
from ..models import (
    CalibrationRow,
    CampaignReport,
    ComparisonRow,
    EpisodeRecord,
    LearningCurveRow,
    TrajectoryRow,
)

logger = logging.getLogger(__name__)

RowT = TypeVar("RowT", bound=BaseModel)

LEARNING_CURVE_COLUMNS = tuple(LearningCurveRow.model_fields)
TRAJECTORY_COLUMNS = tuple(TrajectoryRow.model_fields)
EPISODE_COLUMNS = tuple(EpisodeRecord.model_fields)


def run_basename(kind: str, guidance: str, preset: Optional[str], seed: int) -> str:
    """File stem embedding guidance law, scenario preset and seed"""
    return f"{kind}_{guidance}_{preset or 'custom'}_seed{seed}"


def _write_rows(path: Path, model: type[BaseModel], rows: Sequence[BaseModel]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(
            f, fieldnames=list(model.model_fields), lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
    logger.info("Wrote %s (%d rows)", path, len(rows))
    return path


def _read_rows(path: Path, model: type[RowT]) -> list[RowT]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != tuple(model.model_fields):
                raise ReportFormatError(
                    f"{path}: unexpected CSV header {reader.fieldnames}"
                )
            return [model.model_validate(row) for row in reader]
    except OSError as e:
        raise ReportFormatError(f"{path}: {e}") from e
    except ValidationError as e:
        raise ReportFormatError(f"{path}: {e}") from e


def write_learning_curve(path: Path, rows: Sequence[LearningCurveRow]) -> Path:
    return _write_rows(path, LearningCurveRow, rows)


def read_learning_curve(path: Path) -> list[LearningCurveRow]:
    return _read_rows(path, LearningCurveRow)


def write_trajectory(path: Path, rows: Sequence[TrajectoryRow]) -> Path:
    return _write_rows(path, TrajectoryRow, rows)


def read_trajectory(path: Path) -> list[TrajectoryRow]:
    return _read_rows(path, TrajectoryRow)


def write_episodes(path: Path, records: Sequence[EpisodeRecord]) -> Path:
    return _write_rows(path, EpisodeRecord, records)


def write_report(path: Path, report: CampaignReport) -> Path:
    """Write a campaign report as JSON (schema: ``CampaignReport``)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def read_report(path: Path) -> CampaignReport:
    """Load a campaign report

    Raises:
        ReportFormatError: If the file is missing or does not match the schema
    """
    path = Path(path)
    try:
        return CampaignReport.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ReportFormatError(f"{path}: {e}") from e
    except ValidationError as e:
        raise ReportFormatError(
            f"{path}: not a campaign report ({e.error_count()} errors)"
        ) from e


def write_comparison(
    text_path: Path, csv_path: Path, rows: Sequence[ComparisonRow], table: str
) -> tuple[Path, Path]:
    """Write the comparison table as fixed-width text and CSV"""
    text_path = Path(text_path)
    text_path.parent.mkdir(parents=True, exist_ok=True)
    text_path.write_text(table, encoding="utf-8")
    return text_path, _write_rows(csv_path, ComparisonRow, rows)


def write_calibration(path: Path, rows: Sequence[CalibrationRow]) -> Path:
    return _write_rows(path, CalibrationRow, rows)


def read_calibration(path: Path) -> list[CalibrationRow]:
    return _read_rows(path, CalibrationRow)

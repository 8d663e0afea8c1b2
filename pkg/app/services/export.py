"""CSV / JSON emission of time-series records and JSON read-back."""

import io
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Literal, Sequence, TextIO

from pydantic import TypeAdapter, ValidationError

from app.core.errors import ConfigError, FileIOError
from app.schemas.scenario import CSV_COLUMNS, SweepRecord, TimeSeriesRecord

logger = logging.getLogger(__name__)

CSV_HEADER = ",".join(CSV_COLUMNS)
SWEEP_CSV_HEADER = "eta," + CSV_HEADER

Destination = str | Path | TextIO | None
OutputFormat = Literal["csv", "json"]

_records_adapter = TypeAdapter(list[TimeSeriesRecord])
_sweep_adapter = TypeAdapter(list[SweepRecord])


def format_value(value: float) -> str:
    """Fixed-point with 12 decimals; negative zero is written as zero."""
    text = f"{value:.12f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def render_csv(records: Sequence[TimeSeriesRecord]) -> str:
    """CSV text: exact header, one LF-terminated row per record."""
    _require_records(records)
    lines = [CSV_HEADER]
    lines.extend(",".join(format_value(v) for v in r.values()) for r in records)
    return "\n".join(lines) + "\n"


def render_json(records: Sequence[TimeSeriesRecord]) -> str:
    """JSON array of objects keyed like the CSV header."""
    _require_records(records)
    return _records_adapter.dump_json(list(records), by_alias=True, indent=2).decode("utf-8") + "\n"


def write_csv(records: Sequence[TimeSeriesRecord], destination: Destination = None) -> None:
    """Write records as CSV to a path, an open text stream, or stdout (None or "-")."""
    _emit(render_csv(records), destination)


def write_json(records: Sequence[TimeSeriesRecord], destination: Destination = None) -> None:
    """Write records as a JSON array to a path, an open text stream, or stdout."""
    _emit(render_json(records), destination)


def write_records(
    records: Sequence[TimeSeriesRecord], destination: Destination = None, fmt: OutputFormat = "csv"
) -> None:
    """Write records in the requested format."""
    _emit(render_csv(records) if fmt == "csv" else render_json(records), destination)


def write_sweep(
    sweep: Sequence[tuple[float, Sequence[TimeSeriesRecord]]],
    destination: Destination = None,
    fmt: OutputFormat = "csv",
) -> None:
    _emit(render_sweep_csv(sweep) if fmt == "csv" else render_sweep_json(sweep), destination)


def read_json(source: str | Path | TextIO) -> list[TimeSeriesRecord]:
    """Parse records emitted by write_json.

    Raises:
        FileIOError: If the source cannot be read
        ConfigError: If the content is not UTF-8 or not a valid record array
    """
    try:
        if isinstance(source, io.TextIOBase):
            text = source.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise FileIOError(f"Cannot read records from {source}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"Records in {source} are not valid UTF-8: {e}") from e
    try:
        return _records_adapter.validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"Invalid record array: {e}") from e


def tag_sweep(sweep: Sequence[tuple[float, Sequence[TimeSeriesRecord]]]) -> list[SweepRecord]:
    """Flatten an eta sweep into records carrying their eta."""
    return [
        SweepRecord(eta=eta, **record.model_dump())
        for eta, records in sweep
        for record in records
    ]


def render_sweep_csv(sweep: Sequence[tuple[float, Sequence[TimeSeriesRecord]]]) -> str:
    """CSV with a leading eta column."""
    rows = tag_sweep(sweep)
    _require_records(rows)
    lines = [SWEEP_CSV_HEADER]
    lines.extend(",".join(format_value(v) for v in (r.eta, *r.values())) for r in rows)
    return "\n".join(lines) + "\n"


def render_sweep_json(sweep: Sequence[tuple[float, Sequence[TimeSeriesRecord]]]) -> str:
    rows = tag_sweep(sweep)
    _require_records(rows)
    return _sweep_adapter.dump_json(rows, by_alias=True, indent=2).decode("utf-8") + "\n"


def _require_records(records: Sequence) -> None:
    if not records:
        raise ConfigError("No records to write")


def _emit(text: str, destination: Destination) -> None:
    with _open_destination(destination) as stream:
        stream.write(text)
        stream.flush()
    if isinstance(destination, (str, Path)) and str(destination) != "-":
        logger.info(f"Wrote {len(text)} bytes to {destination}")


@contextmanager
def _open_destination(destination: Destination) -> Iterator[TextIO]:
    if destination is None or str(destination) == "-":
        yield sys.stdout
        return
    if not isinstance(destination, (str, Path)):
        yield destination
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as stream:
            yield stream
    except OSError as e:
        raise FileIOError(f"Cannot write {destination}: {e}") from e

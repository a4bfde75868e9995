"""Text and CSV file helpers for OrbitMesh outputs."""

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence, Type, Union

from utils.errors import FileIOError

PathLike = Union[str, Path]


def format_number(value: float) -> str:
    """
    Render a number without a trailing ``.0`` for integral values.

    Args:
        value: Number to render

    Returns:
        ``"1"`` for 1.0, ``"0.25"`` for 0.25
    """
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def save_text_to_file(
    text: str, output_path: PathLike, error_cls: Type[FileIOError] = FileIOError
) -> Path:
    """
    Save text to file with LF line endings.

    Args:
        text: Text content to save
        output_path: Path to output file
        error_cls: Exception type raised on failure

    Returns:
        The written path
    """
    output_file = Path(output_path)
    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise error_cls(f"cannot write {output_path}: {e.strerror or e}") from e
    return output_file


def read_text_file(input_path: PathLike, error_cls: Type[FileIOError] = FileIOError) -> str:
    """Read a UTF-8 file verbatim (no newline translation)."""
    try:
        with open(input_path, "r", encoding="utf-8", newline="") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise error_cls(f"cannot read {input_path}: {e}") from e


def render_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """Render rows as LF-terminated CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if cell is None else cell for cell in row])
    return buffer.getvalue()

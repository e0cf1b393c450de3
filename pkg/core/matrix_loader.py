"""
Loader for delimiter-separated expression matrices.

Each row is one sample, each column one gene, plus a single class column
holding the sample's label (the decision-table layout of a microarray
dataset).
"""

import logging
import os
from typing import Optional, Union

import numpy as np
import pandas as pd

from core.decision_table import RawMatrix
from core.errors import DataError

logger = logging.getLogger(__name__)

ClassColumn = Union[int, str]


class MatrixLoader:
    """Parser for CSV/TSV gene-expression files."""

    def __init__(self, delimiter: str = ",", has_header: bool = True):
        """
        Initialize the loader.

        Args:
            delimiter: Field separator (',' or '\\t')
            has_header: Whether the first row holds column names
        """
        self.delimiter = delimiter
        self.has_header = has_header

    def load_csv(self, path: str, class_column: ClassColumn = "last") -> RawMatrix:
        """
        Parse a file into a RawMatrix.

        Args:
            path: Path to the delimited file
            class_column: Column index, column name, or "last"

        Returns:
            RawMatrix with the class column removed from the values
        """
        if not os.path.exists(path):
            raise FileNotFoundError(f"input file not found: {path}")

        try:
            frame = pd.read_csv(
                path,
                sep=self.delimiter,
                header=None,
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=True,
            )
        except pd.errors.EmptyDataError:
            raise DataError(f"{path}: no rows") from None
        except pd.errors.ParserError as e:
            raise DataError(f"{path}: ragged rows ({e})") from None

        return self._parse_frame(frame, path, class_column)

    def _parse_frame(self, frame: pd.DataFrame, path: str, class_column: ClassColumn) -> RawMatrix:
        """Split header, class column and numeric cells out of the raw string frame."""
        first_data_line = 1
        if self.has_header:
            if frame.empty:
                raise DataError(f"{path}: no rows")
            header = [str(h).strip() for h in frame.iloc[0].tolist()]
            frame = frame.iloc[1:].reset_index(drop=True)
            first_data_line = 2
        else:
            header = [f"g{i + 1}" for i in range(frame.shape[1])]

        if frame.empty:
            raise DataError(f"{path}: no rows")

        # short rows are padded with NaN by the parser
        padded = frame.isna().any(axis=1)
        if padded.any():
            line = int(np.flatnonzero(padded.to_numpy())[0]) + first_data_line
            raise DataError(f"{path}: ragged rows (line {line} has too few fields)")

        class_index = self._resolve_class_column(class_column, header, path)
        names = [name for i, name in enumerate(header) if i != class_index]
        raw_labels = frame.iloc[:, class_index].str.strip()
        blank = (raw_labels == "").to_numpy()
        if blank.any():
            line = int(np.flatnonzero(blank)[0]) + first_data_line
            raise DataError(f"{path}: missing class label at line {line}")
        cells = frame.drop(columns=frame.columns[class_index])

        values = np.empty(cells.shape, dtype=float)
        for col_pos, column in enumerate(cells.columns):
            text = cells[column].str.strip()
            numeric = pd.to_numeric(text, errors="coerce").to_numpy(dtype=float)
            bad = ~np.isfinite(numeric)
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise DataError(
                    f"{path}: non-numeric or missing value '{text.iloc[row]}' "
                    f"at line {row + first_data_line}, column '{names[col_pos]}'"
                )
            values[:, col_pos] = numeric

        codes, uniques = pd.factorize(raw_labels, sort=False)
        logger.info("Loaded %d samples x %d attributes, %d classes from %s",
                    values.shape[0], values.shape[1], len(uniques), path)
        return RawMatrix(
            values=values,
            attribute_names=names,
            class_labels=codes,
            class_names=[str(u) for u in uniques],
        )

    @staticmethod
    def _resolve_class_column(class_column: ClassColumn, header: list, path: str) -> int:
        n_columns = len(header)
        if isinstance(class_column, str):
            if class_column == "last":
                return n_columns - 1
            if class_column.lstrip("-").isdigit():
                class_column = int(class_column)
            elif class_column in header:
                return header.index(class_column)
            else:
                raise DataError(f"{path}: unknown class column '{class_column}'")
        index = class_column + n_columns if class_column < 0 else class_column
        if index < 0 or index >= n_columns:
            raise DataError(f"{path}: unknown class column {class_column} ({n_columns} columns)")
        if n_columns < 2:
            raise DataError(f"{path}: need at least one attribute besides the class column")
        return index


def load_csv(path: str, has_header: bool = True, class_column: ClassColumn = "last",
             delimiter: str = ",") -> RawMatrix:
    """Convenience wrapper around MatrixLoader.load_csv."""
    return MatrixLoader(delimiter=delimiter, has_header=has_header).load_csv(path, class_column)


def save_csv(matrix: RawMatrix, path: str, delimiter: str = ",",
             label_column: Optional[str] = "class") -> None:
    """Write a RawMatrix back out with its class names in the last column."""
    frame = pd.DataFrame(matrix.values, columns=matrix.attribute_names)
    frame[label_column] = [matrix.class_names[c] for c in matrix.class_labels]
    frame.to_csv(path, sep=delimiter, index=False, float_format="%.10g")

# FILE: datasets/io.py
# ============================================================
"""
CSV ingestion: UTF-8, header row, comma delimiter, decimal-point floats.
Non-target columns become X in file order; target columns become Y in
the order requested.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from HeteroLab.exceptions import DatasetError

from .base import Dataset

logger = logging.getLogger(__name__)


def _numeric_frame(frame, path):
    for column in frame.columns:
        if pd.api.types.is_numeric_dtype(frame[column]):
            continue
        coerced = pd.to_numeric(frame[column], errors='coerce')
        bad = np.flatnonzero(coerced.isna().to_numpy())
        row = int(bad[0]) if bad.size else 0
        raise DatasetError(
            f'{path}: non-numeric cell {frame[column].iloc[row]!r} at row {row + 1}, column {column!r}',
            row=row + 1, column=column)
    values = frame.to_numpy(dtype=np.float64)
    missing = np.argwhere(~np.isfinite(values))
    if missing.size:
        row, index = (int(i) for i in missing[0])
        column = frame.columns[index]
        raise DatasetError(f'{path}: empty or non-finite cell at row {row + 1}, column {column!r}',
                           row=row + 1, column=column)
    return frame


def load_csv_dataset(path, target_columns, group_column=None):
    """
    Read a tabular dataset

    Rows are numbered from 1 (first data row) in error reports.
    """
    path = Path(path)
    if isinstance(target_columns, str):
        target_columns = [c.strip() for c in target_columns.split(',') if c.strip()]
    if not target_columns:
        raise DatasetError('at least one target column is required')

    try:
        frame = pd.read_csv(path, encoding='utf-8', float_precision='round_trip')
    except pd.errors.EmptyDataError as exc:
        raise DatasetError(f'{path} is empty') from exc
    except FileNotFoundError as exc:
        raise DatasetError(f'{path} does not exist') from exc
    if frame.empty:
        raise DatasetError(f'{path} has a header but no rows')

    for column in [*target_columns, *([group_column] if group_column else [])]:
        if column not in frame.columns:
            raise DatasetError(f'{path}: column {column!r} not found', column=column)

    groups = None
    if group_column:
        groups = frame.pop(group_column).to_numpy()

    frame = _numeric_frame(frame, path)
    features = [c for c in frame.columns if c not in target_columns]
    dataset = Dataset(
        X=frame[features].to_numpy(dtype=np.float64),
        Y=frame[list(target_columns)].to_numpy(dtype=np.float64),
        groups=groups,
        provenance=f'csv:{path.name}',
        feature_names=tuple(features),
        target_names=tuple(target_columns),
    )
    logger.info('loaded %s: %d rows, %d features, %d targets',
                path, dataset.n_rows, dataset.input_dim, dataset.output_dim)
    return dataset


def save_csv_dataset(dataset, path, group_column='group'):
    """Write features, then targets, then group ids if any; floats keep full precision"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(np.hstack([dataset.X, dataset.Y]),
                         columns=[*dataset.feature_names, *dataset.target_names])
    if dataset.groups is not None:
        frame[group_column] = dataset.groups
    frame.to_csv(path, index=False, encoding='utf-8')
    return path

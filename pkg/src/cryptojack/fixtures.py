"""Embedded reference data: the 28-script feature table.

Rows are stored verbatim in ``data/feature_table.csv`` (label = class), in
the published order: 8 cryptojacking, 10 malicious, 10 benign. Obvious
transcription oddities are kept as published (Coinhive ``V`` = 274,970;
IBM Design ``n2`` printed as ``1,4625`` is read as 14,625).
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .jsmetrics.features import FeatureVector, read_feature_matrix

CLASSES = ("benign", "malicious", "cryptojacking")

SCRIPT_NAMES = (
    "deepMiner", "Authedmine", "Hashing", "Miner", "Coinhive", "Crypto-loot", "Freecontent", "JSEcoin",
    "20160209", "20161126", "20170110", "20170507", "20160927",
    "20170322", "20170303", "20160407", "20170501", "20160810",
    "The Boat", "IBM Design", "Histography", "Know Lupus", "tota11y",
    "Masi Tupungato", "Fillipo", "Leg Work", "Code Conf", "Louis Browns",
)


def data_path(name: str):
    return resources.files("cryptojack") / "data" / name


def feature_table_text() -> str:
    return data_path("feature_table.csv").read_text(encoding="utf-8")


def feature_table() -> list[tuple[str, FeatureVector]]:
    return read_feature_matrix(feature_table_text())


def feature_table_arrays() -> tuple[np.ndarray, list[str]]:
    """Feature matrix (28 x 17) and the class label of each row."""
    rows = feature_table()
    return np.array([vec.as_row() for _, vec in rows], dtype=float), [label for label, _ in rows]

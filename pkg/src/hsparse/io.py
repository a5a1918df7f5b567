"""File formats: matrices/vectors, key-value reports, correlation tables.

Everything is plain text.  Matrices and vectors share one JSON layout
({rows, cols, block_sizes, real, imag}, row-major); analysis results are
flat key-value JSON; experiment tables are CSV.  Floats are always written
with 17 significant digits so parsing reproduces the double exactly and
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .blocks import BlockDictionary, BlockStructure, BlockVector
from .models import CorrelationSequence, CrossCorrelationTable


def format_float(x: float) -> str:
    """Shortest 17-significant-digit decimal that round-trips the double."""
    if math.isnan(x):
        raise ValueError("refusing to serialize NaN")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def _json_value(value, indent: int) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, dict):
        return _json_object(value, indent)
    if isinstance(value, (list, tuple, np.ndarray)):
        items = [_json_value(v, indent) for v in value]
        return "[" + ", ".join(items) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _json_object(mapping: dict, indent: int) -> str:
    pad = " " * indent
    lines = [f'{pad}  {json.dumps(str(k))}: {_json_value(v, indent + 2)}'
             for k, v in mapping.items()]
    return "{\n" + ",\n".join(lines) + "\n" + pad + "}"


def dumps_document(mapping: dict) -> str:
    """Deterministic JSON text: insertion-ordered keys, 17-digit floats."""
    return _json_object(mapping, 0) + "\n"


def write_document(path, mapping: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_document(mapping))


def load_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _array_document(mat: np.ndarray, sizes) -> dict:
    rows, cols = mat.shape
    flat = mat.reshape(-1)
    return {
        "rows": rows,
        "cols": cols,
        "block_sizes": list(sizes),
        "real": flat.real.tolist(),
        "imag": flat.imag.tolist(),
    }


def save_block_dictionary(path, D: BlockDictionary) -> None:
    write_document(path, _array_document(D.matrix, D.structure.sizes))


def save_block_vector(path, v: BlockVector) -> None:
    write_document(path, _array_document(v.entries.reshape(-1, 1), v.structure.sizes))


def save_measurement(path, y) -> None:
    """Plain vector with the trivial single-block partition."""
    arr = np.asarray(y, dtype=np.complex128).reshape(-1, 1)
    write_document(path, _array_document(arr, [arr.shape[0]]))


def _parse_array(doc: dict) -> tuple[np.ndarray, BlockStructure]:
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        sizes = tuple(int(d) for d in doc["block_sizes"])
        real = np.asarray(doc["real"], dtype=np.float64)
        imag = np.asarray(doc["imag"], dtype=np.float64)
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed array document: {err}") from err
    if real.size != rows * cols or imag.size != rows * cols:
        raise ValueError("array document length disagrees with rows*cols")
    mat = (real + 1j * imag).reshape(rows, cols)
    return mat, BlockStructure(sizes)


def load_block_dictionary(path) -> BlockDictionary:
    mat, structure = _parse_array(load_document(path))
    return BlockDictionary(mat, structure)


def load_block_vector(path) -> BlockVector:
    mat, structure = _parse_array(load_document(path))
    if mat.shape[1] != 1:
        raise ValueError("expected a single-column vector document")
    return BlockVector(mat.reshape(-1), structure)


def load_measurement(path) -> np.ndarray:
    mat, _ = _parse_array(load_document(path))
    if mat.shape[1] != 1:
        raise ValueError("expected a single-column vector document")
    return mat.reshape(-1)


def load_correlation_table(path) -> CrossCorrelationTable:
    """Read a cross-correlation table document.

    Layout: {"grid_size": G, "entries": [{"left", "right", "lag_offset",
    "real": [...], "imag": [...]}, ...]}.
    """
    doc = load_document(path)
    try:
        grid = int(doc["grid_size"])
        raw_entries = doc["entries"]
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed correlation table: {err}") from err
    entries = []
    for raw in raw_entries:
        real = np.asarray(raw["real"], dtype=np.float64)
        imag = np.asarray(raw["imag"], dtype=np.float64)
        if real.size != imag.size:
            raise ValueError("correlation sequence real/imag lengths differ")
        entries.append(CorrelationSequence(
            left=int(raw["left"]), right=int(raw["right"]),
            lag_offset=int(raw.get("lag_offset", 0)),
            values=tuple(real + 1j * imag)))
    return CrossCorrelationTable(tuple(entries), grid_size=grid)


def csv_cell(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)

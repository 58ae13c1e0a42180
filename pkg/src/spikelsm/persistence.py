"""Model files and CSV matrices.

Model file: one UTF-8 JSON document, compact separators, keys in this
order::

    format        "LSM1", or "LSMC1" when a state cache is embedded
    config        reservoir configuration (same profile as CLI config files)
    trained       false for a reservoir saved before any readout exists
    sign          presynaptic sign per neuron
    w_rec         {row_offsets, col_indices}
    w_in          {row_offsets, col_indices, values}
    w_out         (F+1) x P nested list, or null
    lambda        number, or null
    feature_mode  {variant, trace_decay}, or null
    cache         LSMC1 only: {feature_mode, boundaries, features, targets}
    checksum      8 lowercase hex digits

Floats use the shortest decimal form that round-trips exactly. The
checksum is the CRC-32 of the whole document with the checksum value
written as "00000000".
"""

from __future__ import annotations

import io
import json
import math
import os
import re
import zlib

import numpy as np

from .config import ReservoirConfig
from .errors import (
    ConfigError,
    CorruptFileError,
    CsvParseError,
    DimensionError,
    FormatError,
    ShapeError,
    UnsupportedVersionError,
)
from .pipeline import LsmModel
from .readout import FeatureMode, ReadoutModel, StateCache
from .reservoir import Reservoir
from .sparse import SparseBinaryMatrix, SparseRealMatrix

MODEL_FORMAT = "LSM1"
CACHED_MODEL_FORMAT = "LSMC1"
SUPPORTED_FORMATS = (MODEL_FORMAT, CACHED_MODEL_FORMAT)

_ZERO_CHECKSUM = "00000000"
_CHECKSUM_TAIL = re.compile(r'"checksum":"([0-9a-f]{8})"\}\n?\Z')


def _matrix(a):
    return np.asarray(a, dtype=np.float64).tolist()


def _model_document(model: LsmModel) -> dict:
    res = model.reservoir
    readout = model.readout
    doc = {
        "format": CACHED_MODEL_FORMAT if model.cache is not None else MODEL_FORMAT,
        "config": res.config.to_dict(),
        "trained": readout is not None,
        "sign": res.sign.astype(int).tolist(),
        "w_rec": {
            "row_offsets": res.w_rec.row_offsets.tolist(),
            "col_indices": res.w_rec.col_indices.tolist(),
        },
        "w_in": {
            "row_offsets": res.w_in.row_offsets.tolist(),
            "col_indices": res.w_in.col_indices.tolist(),
            "values": res.w_in.values.tolist(),
        },
        "w_out": _matrix(readout.w_out) if readout else None,
        "lambda": float(readout.lam) if readout else None,
        "feature_mode": readout.feature_mode.to_dict() if readout else None,
    }
    if model.cache is not None:
        cache = model.cache
        doc["cache"] = {
            "feature_mode": cache.feature_mode.to_dict(),
            "boundaries": list(cache.boundaries),
            "features": _matrix(cache.features),
            "targets": _matrix(cache.targets),
        }
    doc["checksum"] = _ZERO_CHECKSUM
    return doc


def _encode(doc: dict) -> bytes:
    try:
        text = json.dumps(doc, separators=(",", ":"), allow_nan=False, ensure_ascii=True) + "\n"
    except ValueError as exc:
        raise FormatError(f"model contains non-finite numbers: {exc}") from None
    blank = text.encode("utf-8")
    crc = format(zlib.crc32(blank) & 0xFFFFFFFF, "08x")
    return text[: -len(f'{_ZERO_CHECKSUM}"}}\n')].encode("utf-8") + f'{crc}"}}\n'.encode("utf-8")


def dumps_model(model: LsmModel) -> bytes:
    """Serialize to bytes; identical models give identical bytes."""
    return _encode(_model_document(model))


def _verify_checksum(text: str):
    match = _CHECKSUM_TAIL.search(text)
    if match is None:
        raise CorruptFileError("checksum field missing or malformed")
    blank = text[: match.start(1)] + _ZERO_CHECKSUM + text[match.end(1):]
    actual = format(zlib.crc32(blank.encode("utf-8")) & 0xFFFFFFFF, "08x")
    if actual != match.group(1):
        raise CorruptFileError(f"checksum mismatch: stored {match.group(1)}, computed {actual}")


def _feature_mode(d) -> FeatureMode:
    try:
        return FeatureMode(d["variant"], d["trace_decay"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"bad feature_mode: {exc}") from None


def _array(value, name, dtype):
    try:
        arr = np.array(value, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"{name}: not a rectangular numeric array ({exc})") from None
    return arr


def _build_model(doc: dict) -> LsmModel:
    try:
        config = ReservoirConfig.from_dict(doc["config"])
    except ConfigError as exc:
        raise DimensionError(f"invalid config: {exc}") from None
    n, m = config.n_neurons, config.n_inputs
    w_rec = SparseBinaryMatrix(
        n, n,
        _array(doc["w_rec"]["row_offsets"], "w_rec.row_offsets", np.int64),
        _array(doc["w_rec"]["col_indices"], "w_rec.col_indices", np.int64),
    )
    w_in = SparseRealMatrix(
        n, m,
        _array(doc["w_in"]["row_offsets"], "w_in.row_offsets", np.int64),
        _array(doc["w_in"]["col_indices"], "w_in.col_indices", np.int64),
        _array(doc["w_in"]["values"], "w_in.values", np.float64),
    )
    if np.any(w_rec.row_lengths() != config.fan_in):
        raise DimensionError(f"w_rec rows must each hold fan_in={config.fan_in} entries")
    if np.any(w_in.row_lengths() != config.input_fan_in):
        raise DimensionError(f"w_in rows must each hold input_fan_in={config.input_fan_in} entries")
    diag = np.repeat(np.arange(n), w_rec.row_lengths()) == w_rec.col_indices
    if np.any(diag):
        raise DimensionError("w_rec contains a self-connection")
    sign = _array(doc["sign"], "sign", np.int64)
    if sign.shape != (n,) or not np.all(np.abs(sign) == 1):
        raise DimensionError(f"sign must be {n} entries of +1/-1")
    if int(np.count_nonzero(sign < 0)) != config.n_inhibitory:
        raise DimensionError(f"sign must contain {config.n_inhibitory} inhibitory neurons")
    reservoir = Reservoir(config, w_rec, w_in, sign)

    readout = None
    if doc["trained"]:
        if doc["w_out"] is None or doc["lambda"] is None or doc["feature_mode"] is None:
            raise CorruptFileError("trained model is missing readout fields")
        w_out = _array(doc["w_out"], "w_out", np.float64)
        if w_out.ndim != 2:
            raise DimensionError(f"w_out must be 2-D, got shape {w_out.shape}")
        readout = ReadoutModel(w_out, float(doc["lambda"]), _feature_mode(doc["feature_mode"]))
    elif doc["w_out"] is not None:
        raise CorruptFileError("untrained model must not carry w_out")

    cache = None
    if doc["format"] == CACHED_MODEL_FORMAT:
        c = doc["cache"]
        features = _array(c["features"], "cache.features", np.float64)
        targets = _array(c["targets"], "cache.targets", np.float64)
        if features.ndim != 2 or targets.ndim != 2:
            raise DimensionError("cache features and targets must be 2-D")
        cache = StateCache(features, targets, c["boundaries"], _feature_mode(c["feature_mode"]))
    elif "cache" in doc:
        raise CorruptFileError(f"{MODEL_FORMAT} file must not carry a cache")
    return LsmModel(reservoir, readout, cache)


def loads_model(data: bytes) -> LsmModel:
    """Parse bytes produced by :func:`dumps_model`.

    Raises:
        CorruptFileError: truncated, unparsable, or checksum mismatch.
        UnsupportedVersionError: unknown ``format`` tag.
        DimensionError: arrays inconsistent with the stored configuration.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise CorruptFileError("model file is not valid UTF-8") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"model file is truncated or not JSON ({exc.msg} at char {exc.pos})") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("format"), str):
        raise CorruptFileError("model file has no format tag")
    if doc["format"] not in SUPPORTED_FORMATS:
        raise UnsupportedVersionError(doc["format"])
    _verify_checksum(text)
    try:
        return _build_model(doc)
    except (DimensionError, CorruptFileError):
        raise
    except ShapeError as exc:
        raise DimensionError(str(exc)) from None
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorruptFileError(f"model file is missing or mistypes a field: {exc!r}") from None
    except ValueError as exc:
        raise DimensionError(str(exc)) from None


def _open(target, mode):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode), True
    return target, False


def save_model(model: LsmModel, destination):
    """Write a model to a path or binary file object."""
    data = dumps_model(model)
    f, owned = _open(destination, "wb")
    try:
        f.write(data)
    finally:
        if owned:
            f.close()


def load_model(source) -> LsmModel:
    f, owned = _open(source, "rb")
    try:
        data = f.read()
    finally:
        if owned:
            f.close()
    return loads_model(data)


def format_csv(matrix) -> str:
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, np.newaxis]
    if a.ndim != 2:
        raise ShapeError("csv matrix", "2-D", a.shape)
    if not np.all(np.isfinite(a)):
        raise FormatError("cannot write non-finite values to CSV")
    return "".join(",".join(repr(v) for v in row) + "\n" for row in a.tolist())


def parse_csv(text: str) -> np.ndarray:
    """Parse a header-less, comma-separated numeric table into a ``(T, M)`` array."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CsvParseError(1, "empty file")
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        fields = line.rstrip("\r").split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise CsvParseError(lineno, f"expected {width} fields, found {len(fields)}")
        row = []
        for field in fields:
            token = field.strip()
            try:
                if "_" in token:
                    raise ValueError
                value = float(token)
            except ValueError:
                raise CsvParseError(lineno, f"non-numeric field {field!r}") from None
            if not math.isfinite(value):
                raise CsvParseError(lineno, f"non-finite field {field!r}")
            row.append(value)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def export_csv(matrix, destination):
    text = format_csv(matrix)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        destination.write(text)


def import_csv(source) -> np.ndarray:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as f:
            text = f.read()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    else:
        raise TypeError(f"cannot read CSV from {type(source).__name__}")
    return parse_csv(text)

"""Binary feature-tensor files shared by the feature extractors and exports.

Layout (little-endian): magic ``HMX1``, u32 version, u32 n_frames,
u32 n_dims, f64 hop_seconds, then n_frames x n_dims f32 row-major.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

HMX_MAGIC = b"HMX1"
HMX_VERSION = 1
_HEADER = "<4sIIId"


def write_feature_file(path, data: np.ndarray, hop_seconds: float) -> None:
    data = np.atleast_2d(np.asarray(data))
    if data.ndim != 2:
        raise FormatError("feature data must be 2-D (n_frames x n_dims)", path=path)
    n_frames, n_dims = data.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(_HEADER, HMX_MAGIC, HMX_VERSION, n_frames, n_dims, hop_seconds))
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def read_feature_file(path) -> tuple[np.ndarray, float]:
    """Returns (n_frames x n_dims float32 array, hop_seconds)."""
    header_size = struct.calcsize(_HEADER)
    with open(path, "rb") as fh:
        header = fh.read(header_size)
        if len(header) != header_size:
            raise FormatError("truncated feature file", path=path)
        magic, version, n_frames, n_dims, hop_seconds = struct.unpack(_HEADER, header)
        if magic != HMX_MAGIC:
            raise FormatError(f"bad magic {magic!r}", path=path)
        if version != HMX_VERSION:
            raise FormatError(f"unsupported version {version}", path=path)
        payload = fh.read(4 * n_frames * n_dims)
    if len(payload) != 4 * n_frames * n_dims:
        raise FormatError("truncated feature payload", path=path)
    return np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_dims), hop_seconds

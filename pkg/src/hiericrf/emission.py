"""Hashed-feature emissions: the trainable text-side surrogate and the
binary interchange format for externally produced logits.

The text encoder stand-in is a bag of signed hashed n-grams:

  1. lowercase the text and split it into runs of [a-z0-9] (everything
     else — whitespace or punctuation — separates tokens);
  2. collect unigrams and space-joined bigrams;
  3. hash each gram with an 8-byte BLAKE2b digest read as a little-endian
     64-bit integer h; bucket = h mod r (r a power of two), sign = +1 if
     bit 63 of h is 0 else -1;
  4. accumulate signs per bucket and L2-normalize.

The hash is fully specified, so feature vectors are identical across
runs, platforms, and independent implementations.  Per-label weight rows
score a document by inner product; the surrogate repeats that score row
at every chain slot (slot differentiation is the CRF's job, not the
surrogate's).

Externally produced emissions travel in a little-endian binary file:
magic ``ICRFEMIT``, u32 version=1, u32 m, u32 l, u64 count, then per
record a u32 id byte-length, the UTF-8 id, and l*m f32 logits in
position-major order.  f32 on disk, widened to f64 on load.
"""

from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass

import numpy as np

from .chain import ChainSchedule
from .errors import (
    DimensionMismatch,
    FormatError,
    InvalidArgument,
    ShapeError,
    TruncationError,
    ValidationError,
)
from .taxonomy import Taxonomy

DEFAULT_DIM = 1 << 15

EMISSIONS_MAGIC = b"ICRFEMIT"
EMISSIONS_VERSION = 1
_HEADER = struct.Struct("<8sIIIQ")
_RECLEN = struct.Struct("<I")

_TOKEN = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class FeatureVector:
    """Sparse L2-normalized hashed features: parallel index/weight arrays."""

    indices: np.ndarray
    weights: np.ndarray
    dim: int


@dataclass
class VerbalizerParams:
    """Per-label weight rows over the hashed feature space (m x r)."""

    weight: np.ndarray


@dataclass(frozen=True)
class EmissionMatrix:
    """Per-position label logits (l x m), finite, with the schedule they belong to."""

    logits: np.ndarray
    schedule: ChainSchedule | None = None

    def __post_init__(self):
        if self.logits.ndim != 2:
            raise DimensionMismatch(f"logits must be 2-d, got shape {self.logits.shape}")
        if not np.all(np.isfinite(self.logits)):
            raise ValidationError("emission logits contain non-finite entries")
        if self.schedule is not None and self.schedule.l != self.logits.shape[0]:
            raise DimensionMismatch(
                f"schedule has {self.schedule.l} positions, logits have {self.logits.shape[0]} rows"
            )


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _hash64(gram: str) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _check_dim(r: int) -> None:
    if r < (1 << 10) or r & (r - 1):
        raise InvalidArgument(f"feature dimension must be a power of two >= 1024, got {r}")


def hash_features(text: str, r: int = DEFAULT_DIM) -> FeatureVector:
    """Signed hashed unigram+bigram bag of a text, L2-normalized."""
    _check_dim(r)
    tokens = tokenize(text)
    accum: dict[int, float] = {}
    grams = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for gram in grams:
        h = _hash64(gram)
        sign = -1.0 if h >> 63 else 1.0
        bucket = h & (r - 1)
        accum[bucket] = accum.get(bucket, 0.0) + sign
    if accum:
        # zero-cancelled buckets stay in the vector; they are harmless
        indices = np.array(sorted(accum), dtype=np.int64)
        weights = np.array([accum[i] for i in indices], dtype=np.float64)
        norm = float(np.linalg.norm(weights))
        if norm > 0.0:
            weights = weights / norm
    else:
        indices = np.empty(0, dtype=np.int64)
        weights = np.empty(0, dtype=np.float64)
    return FeatureVector(indices=indices, weights=weights, dim=r)


def densify(features: FeatureVector) -> np.ndarray:
    out = np.zeros(features.dim, dtype=np.float64)
    out[features.indices] = features.weights
    return out


def init_verbalizer(tax: Taxonomy, r: int = DEFAULT_DIM, gain: float = 1.0) -> VerbalizerParams:
    """One weight row per label: the mean of its name-tokens' hashed vectors.

    Labels whose names contain no alphanumeric runs get a zero row.
    """
    _check_dim(r)
    weight = np.zeros((tax.m, r), dtype=np.float64)
    for node in tax.nodes:
        toks = tokenize(node.name)
        if not toks:
            continue
        row = np.zeros(r, dtype=np.float64)
        for tok in toks:
            row += densify(hash_features(tok, r))
        weight[node.id] = gain * row / len(toks)
    return VerbalizerParams(weight=weight)


def emit(features: FeatureVector, params: VerbalizerParams, schedule: ChainSchedule) -> EmissionMatrix:
    """Score a document against every label and repeat the row per chain slot."""
    if features.dim != params.weight.shape[1]:
        raise DimensionMismatch(
            f"features have dimension {features.dim}, verbalizer expects {params.weight.shape[1]}"
        )
    row = params.weight[:, features.indices] @ features.weights
    return EmissionMatrix(logits=np.tile(row, (schedule.l, 1)), schedule=schedule)


def store_emissions(path, m: int, l: int, items) -> int:
    """Write (id, logits) pairs in the binary emissions format; returns the count.

    ``items`` may be any iterable of (str, array-like of shape (l, m));
    the count field is patched after the stream is exhausted.
    """
    count = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMISSIONS_MAGIC, EMISSIONS_VERSION, m, l, 0))
        for example_id, logits in items:
            arr = np.asarray(logits)
            if arr.shape != (l, m):
                raise ShapeError(f"record {example_id!r} has shape {arr.shape}, expected ({l}, {m})")
            encoded = example_id.encode("utf-8")
            fh.write(_RECLEN.pack(len(encoded)))
            fh.write(encoded)
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
            count += 1
        fh.seek(20)  # magic(8) + version(4) + m(4) + l(4)
        fh.write(struct.pack("<Q", count))
    return count


def load_emissions(path, schedule: ChainSchedule | None = None, expected_m: int | None = None):
    """Stream (id, EmissionMatrix) records from an emissions file.

    Header dims are checked against the optional schedule / label count;
    payloads shorter than the header's l*m rows raise ShapeError, files
    that end before the declared record count raise TruncationError.
    """
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError("emissions file shorter than its fixed header")
        magic, version, m, l, count = _HEADER.unpack(head)
        if magic != EMISSIONS_MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != EMISSIONS_VERSION:
            raise FormatError(f"unsupported emissions version {version}")
        if expected_m is not None and m != expected_m:
            raise ShapeError(f"file declares m={m}, taxonomy has m={expected_m}")
        if schedule is not None and l != schedule.l:
            raise ShapeError(f"file declares l={l}, schedule has l={schedule.l}")
        row_bytes = 4 * m
        for k in range(count):
            lenb = fh.read(_RECLEN.size)
            if len(lenb) < _RECLEN.size:
                raise TruncationError(f"file ends at record {k} of {count}")
            (idlen,) = _RECLEN.unpack(lenb)
            idb = fh.read(idlen)
            if len(idb) < idlen:
                raise TruncationError(f"file ends inside the id of record {k} of {count}")
            payload = fh.read(row_bytes * l)
            if len(payload) < row_bytes * l:
                raise ShapeError(
                    f"record {k}: payload holds {len(payload) // row_bytes} of {l} declared rows"
                )
            logits = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(l, m)
            yield idb.decode("utf-8"), EmissionMatrix(logits=logits, schedule=schedule)
        if fh.read(1):
            raise FormatError(f"trailing bytes after the declared {count} records")

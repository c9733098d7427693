"""Distributional vectors: plain-text loading, cosine, role prototypes.

The store reads the common plain-text embedding interchange format: a header
line ``<count> <dim>`` followed by one ``<word> <f1> ... <f_dim>`` row per
word. Vectors are L2-normalized at load time, which makes cosine a dot
product and makes prototype weighting interpretable. Lookups are case-folded;
out-of-vocabulary words are reported, never defaulted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np


class VectorError(Exception):
    """Base class for vector-space failures."""


class FormatError(VectorError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DimensionMismatch(VectorError):
    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        super().__init__(message if line_no is None else f"line {line_no}: {message}")


class ZeroVector(VectorError):
    pass


class OutOfVocabulary(VectorError):
    def __init__(self, word: str):
        self.word = word
        super().__init__(f"word {word!r} is not in the vector store")


class EmptyFillerList(VectorError):
    pass


class VectorStore:
    """Immutable map from case-folded word to a unit-length float64 vector."""

    def __init__(self, vectors: dict, dim: int):
        self._vectors = vectors
        self._dim = dim

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._vectors

    def words(self) -> Tuple[str, ...]:
        return tuple(self._vectors.keys())

    def get(self, word: str) -> Optional[np.ndarray]:
        """Vector for ``word``, or None when out of vocabulary."""
        return self._vectors.get(word.lower())

    def vector(self, word: str) -> np.ndarray:
        v = self.get(word)
        if v is None:
            raise OutOfVocabulary(word)
        return v


def load_vectors(source) -> VectorStore:
    """Parse a vector file from a path, text, bytes, or a binary stream.

    Raises FormatError (with the offending line number) on malformed rows,
    duplicate words, or a count mismatch; DimensionMismatch when a row's
    width disagrees with the header; ZeroVector on an all-zero row.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(1, "missing header line '<count> <dim>'")
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError(1, f"header must be '<count> <dim>', got {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(1, f"header must hold two integers, got {lines[0]!r}")
    if count < 0 or dim <= 0:
        raise FormatError(1, f"invalid header values {count} {dim}")

    vectors: dict = {}
    rows = 0
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        word = parts[0].lower()
        values = parts[1:]
        if len(values) != dim:
            raise DimensionMismatch(
                f"expected {dim} components for {word!r}, got {len(values)}", line_no
            )
        if word in vectors:
            raise FormatError(line_no, f"duplicate word {word!r}")
        try:
            arr = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError:
            raise FormatError(line_no, f"non-numeric component in row for {word!r}")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ZeroVector(f"line {line_no}: all-zero vector for {word!r}")
        vectors[word] = arr / norm
        rows += 1
    if rows != count:
        raise FormatError(
            len(lines), f"header declares {count} rows but file holds {rows}"
        )
    return VectorStore(vectors, dim)


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        # A short string with newlines is content; otherwise treat as a path.
        if "\n" in source:
            return source
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1]. Symmetric and scale-invariant."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine is undefined for an all-zero vector")
    score = float(np.dot(u, v)) / (nu * nv)
    return max(-1.0, min(1.0, score))


@dataclass(frozen=True)
class Prototype:
    """Weight-normalized centroid of the normalized vectors of its fillers."""

    vector: np.ndarray
    source_fillers: Tuple[Tuple[str, float], ...]


def build_prototype(
    fillers: Sequence[Tuple[str, float]] | Iterable, store: VectorStore
) -> Prototype:
    """Prototype from (word, salience weight) pairs: sum(w * v_hat) / sum(w)."""
    fillers = tuple((str(w), float(s)) for w, s in fillers)
    if not fillers:
        raise EmptyFillerList("prototype needs at least one filler")
    total = np.zeros(store.dim, dtype=np.float64)
    weight_sum = 0.0
    for word, weight in fillers:
        if weight <= 0:
            raise ValueError(f"salience weight for {word!r} must be positive")
        v = store.get(word)
        if v is None:
            raise OutOfVocabulary(word)
        total += weight * v  # store vectors are already unit length
        weight_sum += weight
    return Prototype(total / weight_sum, fillers)


def thematic_fit(word: str, proto: Prototype, store: VectorStore) -> float:
    """Typicality of ``word`` for the role: cosine against the prototype."""
    v = store.get(word)
    if v is None:
        raise OutOfVocabulary(word)
    return cosine(v, proto.vector)

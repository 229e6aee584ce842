"""Fixed-dimension text features for title and paragraph nodes.

Two interchangeable providers:
  * HashedTfidfProvider — self-contained hashed tf-idf bag of words.
  * ExternalVectorProvider — precomputed vectors keyed by document part
    (e.g. encoder outputs), loaded from a TSV file.

External vector TSV layout: first line ``dim <d>``; then one line per part,
``<key> <TAB> <d space-separated decimals>`` with keys ``<doc_id>/title``
and ``<doc_id>/p<k>`` (k 0-based).
"""

import hashlib
import math
import unicodedata
from collections import Counter

import numpy as np

HASHED_TFIDF = "hashed_tfidf"
EXTERNAL_FILE = "external_file"


def title_key(doc_id: str) -> str:
    return f"{doc_id}/title"


def paragraph_key(doc_id: str, index: int) -> str:
    return f"{doc_id}/p{index}"


def tokenize(text: str) -> list[str]:
    """Whitespace-split, strip edge punctuation, lowercase; drops empties."""
    tokens = []
    for raw in text.split():
        start, end = 0, len(raw)
        while start < end and unicodedata.category(raw[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(raw[end - 1]).startswith("P"):
            end -= 1
        token = raw[start:end].lower()
        if token:
            tokens.append(token)
    return tokens


def _bucket(token: str, dim: int) -> int:
    # Python's hash() is salted per process; use a stable digest instead.
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


class HashedTfidfProvider:
    """tf-idf over hashed token buckets, L2-normalized per text."""

    kind = HASHED_TFIDF

    def __init__(self, dim: int, n_docs: int, doc_freq: dict[str, int]):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.n_docs = n_docs
        self.doc_freq = doc_freq
        self._bucket_cache: dict[str, int] = {}

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token, 0)
        return math.log((1 + self.n_docs) / (1 + df)) + 1.0

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        counts = Counter(tokenize(text))
        if not counts:
            return vec
        for token, tf in counts.items():
            bucket = self._bucket_cache.get(token)
            if bucket is None:
                bucket = self._bucket_cache[token] = _bucket(token, self.dim)
            vec[bucket] += tf * self.idf(token)
        return vec / np.linalg.norm(vec)


def fit_tfidf(corpus: list[str], dim: int) -> HashedTfidfProvider:
    """Collect per-token document frequencies over the corpus."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    if dim <= 0:
        raise ValueError("dim must be positive")
    doc_freq: dict[str, int] = {}
    for text in corpus:
        for token in set(tokenize(text)):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    return HashedTfidfProvider(dim, len(corpus), doc_freq)


class ExternalVectorProvider:
    """Lookup table of precomputed vectors; embed_text takes the part key."""

    kind = EXTERNAL_FILE

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = dim
        self.vectors = vectors

    def embed_text(self, key: str) -> np.ndarray:
        if key not in self.vectors:
            raise KeyError(f"no stored vector for key {key!r}")
        return self.vectors[key]


def load_external_vectors(path) -> ExternalVectorProvider:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "dim":
            raise ValueError(f"{path}:1: expected 'dim <d>' header")
        dim = int(header[1])
        vectors: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            key, _, rest = line.partition("\t")
            values = np.array([float(v) for v in rest.split()])
            if values.shape != (dim,):
                raise ValueError(f"{path}:{line_no}: expected {dim} values, got {values.size}")
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{path}:{line_no}: non-finite vector entry")
            vectors[key] = values
    return ExternalVectorProvider(dim, vectors)


def save_external_vectors(path, dim: int, vectors: dict[str, np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim {dim}\n")
        for key, vec in vectors.items():
            fh.write(key + "\t" + " ".join(repr(float(v)) for v in vec) + "\n")

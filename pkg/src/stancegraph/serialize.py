"""Deterministic binary container: JSON header line + raw array bytes.

Layout (documented so files are portable):
  line 1: magic ``#stancegraph-bin v1``
  line 2: JSON object ``{"header": {...}, "arrays": [{"name", "dtype",
          "shape"}, ...]}`` with sorted keys
  then:   the arrays' C-order bytes, concatenated in manifest order, with
          explicit byte-order dtypes (e.g. ``<f8``).

Unlike zip-based containers the bytes depend only on the content, which
keeps artifact hashing and byte-identity checks meaningful.
"""

import json

import numpy as np

MAGIC = b"#stancegraph-bin v1\n"


def write_container(path, header: dict, arrays: list[tuple[str, np.ndarray]]) -> None:
    manifest = []
    for name, arr in arrays:
        dtype = arr.dtype.newbyteorder("<")
        manifest.append({"name": name, "dtype": dtype.str, "shape": list(arr.shape)})
    head = json.dumps({"header": header, "arrays": manifest}, sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(head.encode("utf-8"))
        fh.write(b"\n")
        for (_, arr), meta in zip(arrays, manifest):
            fh.write(np.ascontiguousarray(arr).astype(meta["dtype"], copy=False).tobytes())


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != MAGIC:
            raise ValueError(f"{path}: not a stancegraph binary container")
        head = json.loads(fh.readline().decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for meta in head["arrays"]:
            dtype = np.dtype(meta["dtype"])
            shape = tuple(meta["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise ValueError(f"{path}: truncated array {meta['name']!r}")
            arrays[meta["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return head["header"], arrays

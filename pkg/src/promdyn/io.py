"""Binary matrix persistence, JSON helpers, and content hashing.

Matrix files are little-endian float64 with an int64 (rows, cols) header.
All other metadata lives in JSON sidecars.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<qq")


def save_matrix(path, a) -> None:
    """Write a 2-D array as little-endian float64 with a (rows, cols) header."""
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(a.shape[0], a.shape[1]))
        fh.write(a.astype("<f8", copy=False).tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        rows, cols = _HEADER.unpack(fh.read(_HEADER.size))
        if rows < 0 or cols < 0:
            raise ValueError(f"corrupt matrix header in {path}")
        data = fh.read()
    a = np.frombuffer(data, dtype="<f8")
    if a.size != rows * cols:
        raise ValueError(
            f"matrix payload in {path} has {a.size} values, header says {rows}x{cols}"
        )
    return a.reshape(rows, cols).copy()


_LOAD_HEADER = struct.Struct("<dqqq")


def save_load_history(path, history) -> None:
    """Write a load history: header (dt, T, n, seed) then the T x n samples."""
    samples = np.ascontiguousarray(history.samples, dtype=float)
    seed = int(history.provenance.get("seed", -1))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_LOAD_HEADER.pack(history.dt, samples.shape[0], samples.shape[1], seed))
        fh.write(samples.astype("<f8", copy=False).tobytes(order="C"))


def load_load_history(path):
    from .excitation import LoadHistory

    with open(path, "rb") as fh:
        dt, steps, n, seed = _LOAD_HEADER.unpack(fh.read(_LOAD_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != steps * n:
        raise ValueError(f"load-history payload in {path} does not match its header")
    provenance = {"source": str(path)}
    if seed >= 0:
        provenance["seed"] = seed
    return LoadHistory(dt=dt, samples=data.reshape(steps, n).copy(), provenance=provenance)


def save_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())


def canonical_json(obj) -> str:
    """Deterministic JSON encoding used for hashing and on-disk metadata."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Content-hash manifest giving the offline stage its idempotency.

    Each artifact key maps to the hashes of the files it produced plus a hash
    of the inputs that defined it. An artifact is current when its input hash
    matches and every recorded file still verifies.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.path = self.root / "manifest.json"
        self.entries: dict = {}
        if self.path.exists():
            self.entries = load_json(self.path)

    def is_current(self, key: str, input_key: str) -> bool:
        entry = self.entries.get(key)
        if entry is None or entry.get("inputs") != input_key:
            return False
        for rel, digest in entry["files"].items():
            p = self.root / rel
            if not p.exists() or sha256_file(p) != digest:
                return False
        return True

    def record(self, key: str, input_key: str, files) -> None:
        rels = {}
        for f in files:
            rel = str(Path(f).relative_to(self.root))
            rels[rel] = sha256_file(f)
        self.entries[key] = {"inputs": input_key, "files": rels}

    def files_for(self, key: str) -> list[Path]:
        entry = self.entries.get(key)
        if entry is None:
            return []
        return [self.root / rel for rel in entry["files"]]

    def verify(self, key: str) -> None:
        """Raise if any file recorded under ``key`` is missing or altered."""
        entry = self.entries.get(key)
        if entry is None:
            raise KeyError(f"manifest has no entry {key!r}")
        for rel, digest in entry["files"].items():
            p = self.root / rel
            if not p.exists():
                raise FileNotFoundError(f"artifact file missing: {p}")
            if sha256_file(p) != digest:
                raise ValueError(f"artifact file corrupt (hash mismatch): {p}")

    def save(self) -> None:
        save_json(self.path, self.entries)

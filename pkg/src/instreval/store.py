"""Embedding populations on disk and in memory.

A population is a JSON manifest next to a raw little-endian float32 file.
The manifest lists instruments and their (pitch, velocity) samples, each
pointing at a record index in the data file; records are frames_per_sample
consecutive dz-vectors.  In memory everything is float64, grouped by
instrument in manifest order with samples in canonical grid order, so equal
populations always produce byte-identical downstream reports.

Also here: synthetic population generators for calibration runs, and the
persisted ground-statistics bundle (a 440 x 440 cosine grid plus a
per-cell mean-embedding grid) with its checksummed binary format.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import GRID_CELLS, SampleKey, grid_index, key_at

MANIFEST_VERSION = 1
STATS_MAGIC = b"INSTREV1"
STATS_VERSION = 1
UNIT_NORM_TOL = 1e-6
SYNTH_PRESETS = (
    "iid-gaussian-normalized",
    "clustered-per-instrument",
    "replicated-single-vector",
)

# block layout of the stats payload, in file order
_STATS_BLOCKS = ("cosine_values", "cosine_counts", "mean_vectors", "mean_mask", "mean_counts")


@dataclass(frozen=True)
class InstrumentInfo:
    instrument_id: str
    family: str | None = None
    source: str | None = None


@dataclass(frozen=True)
class InstrumentView:
    """One instrument's samples: ascending grid cells and dz x N_k columns."""

    instrument_id: str
    present: np.ndarray
    columns: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.present.shape[0])

    def keys(self) -> list[SampleKey]:
        return [SampleKey(self.instrument_id, *key_at(int(c))) for c in self.present]


@dataclass
class EmbeddingSet:
    """A validated population: keys grouped by instrument, rows of vectors.

    data has one row per frame, n_samples * frames_per_sample rows total,
    sample-major then frame-major.  normalized records whether rows were
    scaled to unit length at load time.
    """

    dz: int
    frames_per_sample: int
    keys: list[SampleKey]
    data: np.ndarray
    normalized: bool
    instruments: list[InstrumentInfo]
    _spans: dict[str, tuple[int, int]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dz < 1 or self.frames_per_sample < 1:
            raise ValidationError("dz and frames_per_sample must be positive")
        if self.data.shape != (len(self.keys) * self.frames_per_sample, self.dz):
            raise ValidationError(
                f"data shape {self.data.shape} does not match "
                f"{len(self.keys)} samples x {self.frames_per_sample} frames x dz={self.dz}"
            )
        order = [info.instrument_id for info in self.instruments]
        if len(set(order)) != len(order):
            raise ValidationError("duplicate instrument ids")
        spans: dict[str, tuple[int, int]] = {}
        pos = 0
        for info in self.instruments:
            start = pos
            cells = []
            while pos < len(self.keys) and self.keys[pos].instrument_id == info.instrument_id:
                cells.append(self.keys[pos].cell)
                pos += 1
            if not cells:
                raise ValidationError(f"instrument {info.instrument_id!r} has no samples")
            if any(b <= a for a, b in zip(cells, cells[1:])):
                raise ValidationError(
                    f"samples for {info.instrument_id!r} are not in ascending grid order"
                )
            spans[info.instrument_id] = (start, pos)
        if pos != len(self.keys):
            raise ValidationError("sample keys do not match the instrument list")
        self._spans = spans

    @property
    def n_samples(self) -> int:
        return len(self.keys)

    def instrument_ids(self) -> list[str]:
        return [info.instrument_id for info in self.instruments]

    def view(self, instrument_id: str) -> InstrumentView:
        """Single-frame column view for one instrument."""
        if self.frames_per_sample != 1:
            raise ValidationError(
                "per-instrument views require frames_per_sample == 1 "
                f"(got {self.frames_per_sample})"
            )
        if instrument_id not in self._spans:
            raise ValidationError(f"unknown instrument {instrument_id!r}")
        start, stop = self._spans[instrument_id]
        present = np.array([k.cell for k in self.keys[start:stop]], dtype=np.int32)
        columns = np.ascontiguousarray(self.data[start:stop].T)
        return InstrumentView(instrument_id, present, columns)

    def require_normalized(self, what: str = "population") -> None:
        if not self.normalized:
            raise ValidationError(f"{what} must be loaded with unit normalization")


def instrument_views(es: EmbeddingSet) -> list[InstrumentView]:
    """All per-instrument views, in manifest order."""
    return [es.view(info.instrument_id) for info in es.instruments]


def _manifest_error(path, msg: str) -> ValidationError:
    return ValidationError(f"{path}: {msg}")


def _require(cond: bool, path, msg: str) -> None:
    if not cond:
        raise _manifest_error(path, msg)


def _parse_instruments(raw, path) -> tuple[list[InstrumentInfo], list[list[tuple[int, int, int]]]]:
    _require(isinstance(raw, list) and raw, path, "instruments must be a non-empty list")
    infos: list[InstrumentInfo] = []
    sample_lists: list[list[tuple[int, int, int]]] = []
    seen_ids: set[str] = set()
    for inst in raw:
        _require(isinstance(inst, dict), path, "instrument entries must be objects")
        iid = inst.get("id")
        _require(isinstance(iid, str) and iid != "", path, "instrument id must be a non-empty string")
        _require(iid not in seen_ids, path, f"duplicate instrument id {iid!r}")
        seen_ids.add(iid)
        for opt in ("family", "source"):
            val = inst.get(opt)
            _require(val is None or isinstance(val, str), path, f"{opt} must be a string if present")
        samples = inst.get("samples")
        _require(isinstance(samples, list) and samples, path, f"instrument {iid!r} needs a non-empty samples list")
        triples: list[tuple[int, int, int]] = []
        cells: set[int] = set()
        for s in samples:
            _require(isinstance(s, dict), path, "sample entries must be objects")
            try:
                pitch = int(s["pitch"])
                velocity = int(s["velocity"])
                index = int(s["index"])
            except (KeyError, TypeError, ValueError):
                raise _manifest_error(path, f"instrument {iid!r} has a malformed sample entry")
            _require(index >= 0, path, f"negative record index in instrument {iid!r}")
            cell = grid_index(pitch, velocity)
            _require(cell not in cells, path, f"instrument {iid!r} repeats cell ({pitch}, {velocity})")
            cells.add(cell)
            triples.append((cell, pitch, velocity, index))
        triples.sort()
        infos.append(InstrumentInfo(iid, inst.get("family"), inst.get("source")))
        sample_lists.append([(p, v, i) for _, p, v, i in triples])
    return infos, sample_lists


def load_population(manifest_path, enforce_norm: bool = True) -> EmbeddingSet:
    """Read a manifest and its raw data file into a canonical EmbeddingSet.

    enforce_norm scales every frame vector to unit length and rejects
    zero-norm frames; pass False only for intermediate, unnormalized data.
    """
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _manifest_error(manifest_path, f"cannot read manifest: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _manifest_error(manifest_path, f"manifest is not valid JSON: {exc}")
    _require(isinstance(doc, dict), manifest_path, "manifest must be a JSON object")
    _require(doc.get("version") == MANIFEST_VERSION, manifest_path,
             f"unsupported manifest version {doc.get('version')!r}")
    dz = doc.get("dz")
    frames = doc.get("frames_per_sample")
    _require(isinstance(dz, int) and dz >= 1, manifest_path, "dz must be a positive integer")
    _require(isinstance(frames, int) and frames >= 1, manifest_path,
             "frames_per_sample must be a positive integer")
    _require(doc.get("dtype") == "f32le", manifest_path,
             f"unsupported dtype {doc.get('dtype')!r} (only f32le)")
    data_name = doc.get("data_file")
    _require(isinstance(data_name, str) and data_name != "", manifest_path,
             "data_file must be a non-empty string")

    infos, sample_lists = _parse_instruments(doc.get("instruments"), manifest_path)

    data_path = manifest_path.parent / data_name
    try:
        raw = np.fromfile(data_path, dtype="<f4")
    except OSError as exc:
        raise _manifest_error(manifest_path, f"cannot read data file {data_name!r}: {exc}")
    stride = frames * dz
    if raw.size % stride != 0:
        raise _manifest_error(
            manifest_path,
            f"data file holds {raw.size} floats, not a multiple of "
            f"frames_per_sample * dz = {stride}",
        )
    n_records = raw.size // stride
    max_index = max(i for samples in sample_lists for _, _, i in samples)
    if max_index >= n_records:
        raise _manifest_error(
            manifest_path,
            f"record index {max_index} out of range: data file holds {n_records} records",
        )
    records = raw.astype(np.float64).reshape(n_records, frames, dz)

    keys: list[SampleKey] = []
    rows = np.empty((sum(len(s) for s in sample_lists) * frames, dz), dtype=np.float64)
    pos = 0
    for info, samples in zip(infos, sample_lists):
        for pitch, velocity, index in samples:
            keys.append(SampleKey(info.instrument_id, pitch, velocity))
            rows[pos:pos + frames] = records[index]
            pos += frames

    if enforce_norm:
        norms = np.linalg.norm(rows, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            k = keys[int(bad[0]) // frames]
            raise _manifest_error(
                manifest_path,
                f"zero-norm frame for instrument {k.instrument_id!r} "
                f"pitch {k.pitch} velocity {k.velocity}",
            )
        rows /= norms[:, None]

    return EmbeddingSet(dz, frames, keys, rows, enforce_norm, infos)


def save_population(es: EmbeddingSet, manifest_path, data_file: str | None = None) -> None:
    """Write a manifest + f32le data pair; records follow canonical order."""
    manifest_path = Path(manifest_path)
    if data_file is None:
        data_file = manifest_path.stem + ".f32"
    doc = {
        "version": MANIFEST_VERSION,
        "dz": es.dz,
        "frames_per_sample": es.frames_per_sample,
        "dtype": "f32le",
        "data_file": data_file,
        "instruments": [],
    }
    index = 0
    for info in es.instruments:
        start, stop = es._spans[info.instrument_id]
        entry = {"id": info.instrument_id}
        if info.family is not None:
            entry["family"] = info.family
        if info.source is not None:
            entry["source"] = info.source
        entry["samples"] = []
        for k in es.keys[start:stop]:
            entry["samples"].append({"pitch": k.pitch, "velocity": k.velocity, "index": index})
            index += 1
        doc["instruments"].append(entry)
    payload = es.data.astype("<f4").tobytes()
    (manifest_path.parent / data_file).write_bytes(payload)
    manifest_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic population.

    cells=None fills the whole 440-cell grid; otherwise the first `cells`
    grid cells are used.  noise is the cluster spread for the clustered
    preset.
    """

    preset: str
    dz: int
    instruments: int
    cells: int | None = None
    noise: float = 0.1

    def __post_init__(self):
        if self.preset not in SYNTH_PRESETS:
            raise ValidationError(
                f"unknown preset {self.preset!r}; choose from {', '.join(SYNTH_PRESETS)}"
            )
        if self.dz < 1:
            raise ValidationError("dz must be positive")
        if self.instruments < 1:
            raise ValidationError("need at least one instrument")
        if self.cells is not None and not 1 <= self.cells <= GRID_CELLS:
            raise ValidationError(f"cells must be in 1..{GRID_CELLS}")
        if self.noise < 0:
            raise ValidationError("noise must be non-negative")


def synth_population(spec: SynthSpec, seed: int) -> EmbeddingSet:
    """Deterministic synthetic population (single frame, unit-norm rows)."""
    n_cells = spec.cells if spec.cells is not None else GRID_CELLS
    rng = np.random.Generator(np.random.Philox(seed))
    n_total = spec.instruments * n_cells

    if spec.preset == "iid-gaussian-normalized":
        rows = rng.standard_normal((n_total, spec.dz))
    elif spec.preset == "clustered-per-instrument":
        centers = rng.standard_normal((spec.instruments, spec.dz))
        centers /= np.linalg.norm(centers, axis=1)[:, None]
        rows = np.repeat(centers, n_cells, axis=0)
        rows = rows + spec.noise * rng.standard_normal((n_total, spec.dz))
    else:
        base = rng.standard_normal((spec.instruments, spec.dz))
        rows = np.repeat(base, n_cells, axis=0)

    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise NumericalError("degenerate zero-norm draw")
    rows /= norms[:, None]

    width = max(3, len(str(spec.instruments - 1)))
    infos = [InstrumentInfo(f"synth{i:0{width}d}") for i in range(spec.instruments)]
    keys = []
    for info in infos:
        for cell in range(n_cells):
            keys.append(SampleKey(info.instrument_id, *key_at(cell)))
    return EmbeddingSet(spec.dz, 1, keys, rows, True, infos)


@dataclass
class CosineGrid:
    """Accumulated pairwise cosines on the full grid.

    values[i, j] is the mean cosine between cells i and j over the
    instruments containing both; count[i, j] is how many contributed.
    Cells never observed together hold 0 / 0.
    """

    values: np.ndarray
    count: np.ndarray

    def validate(self) -> None:
        if self.values.shape != (GRID_CELLS, GRID_CELLS) or self.count.shape != (GRID_CELLS, GRID_CELLS):
            raise ValidationError("cosine grid must be 440 x 440")
        if not np.isfinite(self.values).all():
            raise ValidationError("cosine grid contains non-finite values")
        if np.any(self.count < 0):
            raise ValidationError("cosine grid counts must be non-negative")
        if not np.array_equal(self.count, self.count.T):
            raise ValidationError("cosine grid counts are not symmetric")
        if not np.allclose(self.values, self.values.T, atol=1e-9):
            raise ValidationError("cosine grid values are not symmetric")
        seen = self.count > 0
        if np.any(self.values[~seen] != 0.0):
            raise ValidationError("unobserved cosine cells must be zero")
        if np.any(np.abs(self.values[seen]) > 1.0 + 1e-6):
            raise ValidationError("cosine values out of [-1, 1]")
        diag_seen = np.diag(seen)
        if np.any(np.abs(np.diag(self.values)[diag_seen] - 1.0) > 1e-6):
            raise ValidationError("observed diagonal cosines must be 1")

    def restrict(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Submatrix of values and counts on a cell subset."""
        ix = np.ix_(cells, cells)
        return self.values[ix].copy(), self.count[ix].copy()


@dataclass
class MeanGrid:
    """Per-cell mean embedding directions: dz x 440 columns plus counts."""

    vectors: np.ndarray
    count: np.ndarray

    @property
    def available(self) -> np.ndarray:
        return self.count > 0

    def validate(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[1] != GRID_CELLS:
            raise ValidationError("mean grid must have 440 columns")
        if self.count.shape != (GRID_CELLS,):
            raise ValidationError("mean grid counts must have 440 entries")
        if not np.isfinite(self.vectors).all():
            raise ValidationError("mean grid contains non-finite values")
        if np.any(self.count < 0):
            raise ValidationError("mean grid counts must be non-negative")
        avail = self.available
        if avail.any():
            norms = np.linalg.norm(self.vectors[:, avail], axis=0)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                raise ValidationError("available mean vectors must be unit-norm")
        if np.any(self.vectors[:, ~avail] != 0.0):
            raise ValidationError("unavailable mean cells must be zero")


def save_stats(cosine: CosineGrid, mean: MeanGrid, path) -> None:
    """Serialize the stats bundle: magic, JSON header, f32le blocks, crc32."""
    cosine.validate()
    mean.validate()
    dz = int(mean.vectors.shape[0])
    blocks = {
        "cosine_values": cosine.values.astype("<f4"),
        "cosine_counts": cosine.count.astype("<f4"),
        "mean_vectors": mean.vectors.astype("<f4"),
        "mean_mask": mean.available.astype("<f4"),
        "mean_counts": mean.count.astype("<f4"),
    }
    payload = b"".join(blocks[name].tobytes() for name in _STATS_BLOCKS)
    header = {
        "version": STATS_VERSION,
        "dz": dz,
        "grid_cells": GRID_CELLS,
        "blocks": [
            {"name": name, "shape": list(blocks[name].shape), "dtype": "f32le"}
            for name in _STATS_BLOCKS
        ],
        "payload_crc32": f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}",
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(STATS_MAGIC)
        fh.write(len(header_bytes).to_bytes(4, "little"))
        fh.write(header_bytes)
        fh.write(payload)


def load_stats(path) -> tuple[CosineGrid, MeanGrid]:
    """Read and verify a stats bundle; grids come back float64."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read stats bundle: {exc}")
    if len(blob) < len(STATS_MAGIC) + 4 or blob[: len(STATS_MAGIC)] != STATS_MAGIC:
        raise ValidationError(f"{path}: not a stats bundle (bad magic)")
    off = len(STATS_MAGIC)
    header_len = int.from_bytes(blob[off:off + 4], "little")
    off += 4
    if off + header_len > len(blob):
        raise ValidationError(f"{path}: truncated header")
    try:
        header = json.loads(blob[off:off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ValidationError(f"{path}: stats header is not valid JSON")
    off += header_len
    if header.get("version") != STATS_VERSION:
        raise ValidationError(f"{path}: unsupported stats version {header.get('version')!r}")
    if header.get("grid_cells") != GRID_CELLS:
        raise ValidationError(f"{path}: stats grid has {header.get('grid_cells')} cells, expected {GRID_CELLS}")
    payload = blob[off:]
    crc = f"{zlib.crc32(payload) & 0xFFFFFFFF:08x}"
    if crc != header.get("payload_crc32"):
        raise ValidationError(f"{path}: checksum mismatch, stats bundle is corrupted")

    specs = header.get("blocks")
    if not isinstance(specs, list) or [b.get("name") for b in specs] != list(_STATS_BLOCKS):
        raise ValidationError(f"{path}: unexpected stats block layout")
    arrays = {}
    pos = 0
    for b in specs:
        if b.get("dtype") != "f32le":
            raise ValidationError(f"{path}: unsupported block dtype {b.get('dtype')!r}")
        shape = tuple(b["shape"])
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        end = pos + 4 * n
        if end > len(payload):
            raise ValidationError(f"{path}: truncated payload")
        arrays[b["name"]] = np.frombuffer(payload[pos:end], dtype="<f4").reshape(shape).astype(np.float64)
        pos = end
    if pos != len(payload):
        raise ValidationError(f"{path}: trailing bytes after stats payload")

    cosine = CosineGrid(arrays["cosine_values"], arrays["cosine_counts"].astype(np.int32))
    mean = MeanGrid(arrays["mean_vectors"], arrays["mean_counts"].astype(np.int32))
    if int(mean.vectors.shape[0]) != header.get("dz"):
        raise ValidationError(f"{path}: dz mismatch between header and mean block")
    mask = arrays["mean_mask"] > 0.5
    if not np.array_equal(mask, mean.available):
        raise ValidationError(f"{path}: mean-availability mask disagrees with counts")
    cosine.validate()
    mean.validate()
    return cosine, mean


@dataclass(frozen=True)
class InstrumentIndex:
    info: InstrumentInfo
    cells: tuple[int, ...]


@dataclass
class DatasetIndex:
    """Key-level index of a population, no embedding data attached."""

    instruments: list[InstrumentIndex]

    def __post_init__(self):
        self._by_id = {ix.info.instrument_id: ix for ix in self.instruments}
        if len(self._by_id) != len(self.instruments):
            raise ValidationError("duplicate instrument ids")

    def instrument_ids(self) -> list[str]:
        return [ix.info.instrument_id for ix in self.instruments]

    def instrument(self, instrument_id: str) -> InstrumentIndex:
        try:
            return self._by_id[instrument_id]
        except KeyError:
            raise ValidationError(f"unknown instrument {instrument_id!r}")

    def has_cell(self, instrument_id: str, cell: int) -> bool:
        return cell in self._by_id[instrument_id].cells if instrument_id in self._by_id else False

    @classmethod
    def from_embedding_set(cls, es: EmbeddingSet) -> "DatasetIndex":
        out = []
        for info in es.instruments:
            start, stop = es._spans[info.instrument_id]
            out.append(InstrumentIndex(info, tuple(k.cell for k in es.keys[start:stop])))
        return cls(out)

    @classmethod
    def from_manifest(cls, manifest_path) -> "DatasetIndex":
        """Parse only the manifest; the data file is neither read nor required."""
        manifest_path = Path(manifest_path)
        try:
            doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise _manifest_error(manifest_path, f"cannot read manifest: {exc}")
        except json.JSONDecodeError as exc:
            raise _manifest_error(manifest_path, f"manifest is not valid JSON: {exc}")
        _require(isinstance(doc, dict), manifest_path, "manifest must be a JSON object")
        _require(doc.get("version") == MANIFEST_VERSION, manifest_path,
                 f"unsupported manifest version {doc.get('version')!r}")
        infos, sample_lists = _parse_instruments(doc.get("instruments"), manifest_path)
        out = []
        for info, samples in zip(infos, sample_lists):
            out.append(InstrumentIndex(info, tuple(grid_index(p, v) for p, v, _ in samples)))
        return cls(out)

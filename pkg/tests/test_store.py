import json

import numpy as np
import pytest

from instreval.errors import ValidationError
from instreval.grid import GRID_CELLS, SampleKey
from instreval.store import (
    CosineGrid,
    DatasetIndex,
    EmbeddingSet,
    InstrumentInfo,
    MeanGrid,
    SynthSpec,
    instrument_views,
    load_population,
    load_stats,
    save_population,
    save_stats,
    synth_population,
)


def write_manifest(tmp_path, doc, data, name="pop.json", data_name="pop.f32"):
    (tmp_path / data_name).write_bytes(np.asarray(data, dtype="<f4").tobytes())
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def small_manifest(data_name="pop.f32"):
    return {
        "version": 1,
        "dz": 3,
        "frames_per_sample": 1,
        "dtype": "f32le",
        "data_file": data_name,
        "instruments": [
            {
                "id": "alpha",
                "family": "keyboard",
                "samples": [
                    {"pitch": 60, "velocity": 100, "index": 0},
                    {"pitch": 21, "velocity": 25, "index": 1},
                ],
            },
            {
                "id": "beta",
                "samples": [{"pitch": 108, "velocity": 127, "index": 2}],
            },
        ],
    }


class TestLoadPopulation:
    def test_loads_and_orders_canonically(self, tmp_path):
        data = np.array([[3.0, 0, 0], [0, 2.0, 0], [0, 0, 1.0]])
        path = write_manifest(tmp_path, small_manifest(), data)
        es = load_population(path)
        # manifest listed pitch 60 before pitch 21; load re-sorts by grid cell
        assert es.keys[0] == SampleKey("alpha", 21, 25)
        assert es.keys[1] == SampleKey("alpha", 60, 100)
        assert es.keys[2] == SampleKey("beta", 108, 127)
        assert np.allclose(es.data[0], [0, 1, 0])
        assert np.allclose(es.data[1], [1, 0, 0])
        assert es.normalized
        assert es.instruments[0].family == "keyboard"
        assert es.instruments[1].family is None

    def test_without_norm_keeps_magnitudes(self, tmp_path):
        data = np.array([[3.0, 0, 0], [0, 2.0, 0], [0, 0, 1.0]])
        path = write_manifest(tmp_path, small_manifest(), data)
        es = load_population(path, enforce_norm=False)
        assert not es.normalized
        assert np.allclose(es.data[1], [3.0, 0, 0])
        with pytest.raises(ValidationError):
            es.require_normalized()

    def test_trailing_records_allowed(self, tmp_path):
        data = np.zeros((5, 3))
        data[:3] = np.eye(3)
        data[3:] = 1.0
        path = write_manifest(tmp_path, small_manifest(), data)
        es = load_population(path)
        assert es.n_samples == 3

    def test_rejects_partial_record(self, tmp_path):
        data = np.zeros(10, dtype=np.float64)
        path = write_manifest(tmp_path, small_manifest(), data)
        with pytest.raises(ValidationError, match="multiple"):
            load_population(path)

    def test_rejects_index_out_of_range(self, tmp_path):
        data = np.eye(3)[:2]
        path = write_manifest(tmp_path, small_manifest(), data)
        with pytest.raises(ValidationError, match="out of range"):
            load_population(path)

    def test_rejects_zero_norm_sample(self, tmp_path):
        data = np.eye(3)
        data[1] = 0.0
        path = write_manifest(tmp_path, small_manifest(), data)
        with pytest.raises(ValidationError, match="zero-norm"):
            load_population(path)

    def test_rejects_duplicate_cell(self, tmp_path):
        doc = small_manifest()
        doc["instruments"][0]["samples"].append({"pitch": 60, "velocity": 100, "index": 2})
        path = write_manifest(tmp_path, doc, np.eye(3))
        with pytest.raises(ValidationError, match="repeats cell"):
            load_population(path)

    def test_rejects_duplicate_instrument(self, tmp_path):
        doc = small_manifest()
        doc["instruments"].append(doc["instruments"][0])
        path = write_manifest(tmp_path, doc, np.eye(3))
        with pytest.raises(ValidationError, match="duplicate instrument"):
            load_population(path)

    def test_rejects_bad_pitch(self, tmp_path):
        doc = small_manifest()
        doc["instruments"][0]["samples"][0]["pitch"] = 109
        path = write_manifest(tmp_path, doc, np.eye(3))
        with pytest.raises(ValidationError, match="pitch 109"):
            load_population(path)

    def test_rejects_bad_velocity(self, tmp_path):
        doc = small_manifest()
        doc["instruments"][0]["samples"][0]["velocity"] = 64
        path = write_manifest(tmp_path, doc, np.eye(3))
        with pytest.raises(ValidationError, match="velocity 64"):
            load_population(path)

    def test_rejects_wrong_version(self, tmp_path):
        doc = small_manifest()
        doc["version"] = 2
        path = write_manifest(tmp_path, doc, np.eye(3))
        with pytest.raises(ValidationError, match="version"):
            load_population(path)

    def test_rejects_missing_data_file(self, tmp_path):
        doc = small_manifest("absent.f32")
        path = tmp_path / "pop.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="cannot read data file"):
            load_population(path)

    def test_rejects_malformed_json(self, tmp_path):
        path = tmp_path / "pop.json"
        path.write_text("{nope")
        with pytest.raises(ValidationError, match="not valid JSON"):
            load_population(path)

    def test_multi_frame_records(self, tmp_path):
        doc = small_manifest()
        doc["frames_per_sample"] = 2
        data = np.arange(18, dtype=np.float64).reshape(6, 3) + 1.0
        path = write_manifest(tmp_path, doc, data)
        es = load_population(path, enforce_norm=False)
        assert es.data.shape == (6, 3)
        # record 1 (pitch 21 sorts first) occupies the first two rows
        assert np.allclose(es.data[0], data[2])
        assert np.allclose(es.data[1], data[3])


class TestSaveRoundTrip:
    def test_round_trip_preserves_everything(self, tmp_path):
        es = synth_population(SynthSpec("iid-gaussian-normalized", 5, 3, cells=7), seed=9)
        out = tmp_path / "saved.json"
        save_population(es, out)
        back = load_population(out)
        assert back.keys == es.keys
        assert back.instruments == es.instruments
        # one float32 quantization, then stable
        assert np.allclose(back.data, es.data, atol=1e-6)
        again = tmp_path / "again.json"
        save_population(back, again)
        assert np.array_equal(
            np.fromfile(tmp_path / "saved.f32", dtype="<f4"),
            np.fromfile(tmp_path / "again.f32", dtype="<f4"),
        )

    def test_round_trip_is_byte_stable(self, tmp_path):
        es = synth_population(SynthSpec("clustered-per-instrument", 4, 2, cells=5), seed=3)
        save_population(es, tmp_path / "a.json")
        first = load_population(tmp_path / "a.json")
        save_population(first, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_text() != ""
        a = json.loads((tmp_path / "a.json").read_text())
        b = json.loads((tmp_path / "b.json").read_text())
        a["data_file"] = b["data_file"] = "x"
        assert a == b


class TestViews:
    def test_views_in_manifest_order(self, tmp_path):
        path = write_manifest(tmp_path, small_manifest(), np.eye(3))
        es = load_population(path)
        views = instrument_views(es)
        assert [v.instrument_id for v in views] == ["alpha", "beta"]
        alpha = views[0]
        assert alpha.n_samples == 2
        assert list(alpha.present) == [0, 198]
        assert alpha.columns.shape == (3, 2)
        assert alpha.keys() == [SampleKey("alpha", 21, 25), SampleKey("alpha", 60, 100)]

    def test_views_require_single_frame(self, tmp_path):
        doc = small_manifest()
        doc["frames_per_sample"] = 2
        path = write_manifest(tmp_path, doc, np.ones((6, 3)))
        es = load_population(path)
        with pytest.raises(ValidationError, match="frames_per_sample"):
            instrument_views(es)

    def test_unknown_instrument(self, tmp_path):
        path = write_manifest(tmp_path, small_manifest(), np.eye(3))
        es = load_population(path)
        with pytest.raises(ValidationError, match="unknown instrument"):
            es.view("gamma")


class TestEmbeddingSetInvariants:
    def test_rejects_unsorted_keys(self):
        keys = [SampleKey("a", 60, 100), SampleKey("a", 21, 25)]
        with pytest.raises(ValidationError, match="ascending"):
            EmbeddingSet(2, 1, keys, np.eye(2), True, [InstrumentInfo("a")])

    def test_rejects_interleaved_instruments(self):
        keys = [SampleKey("a", 21, 25), SampleKey("b", 21, 25), SampleKey("a", 22, 25)]
        with pytest.raises(ValidationError):
            EmbeddingSet(
                2, 1, keys, np.ones((3, 2)), False,
                [InstrumentInfo("a"), InstrumentInfo("b")],
            )

    def test_rejects_empty_instrument(self):
        keys = [SampleKey("a", 21, 25)]
        with pytest.raises(ValidationError, match="no samples"):
            EmbeddingSet(
                2, 1, keys, np.ones((1, 2)), False,
                [InstrumentInfo("a"), InstrumentInfo("b")],
            )


class TestSynthPopulation:
    def test_deterministic_for_seed(self):
        spec = SynthSpec("iid-gaussian-normalized", 8, 2, cells=10)
        a = synth_population(spec, seed=42)
        b = synth_population(spec, seed=42)
        assert np.array_equal(a.data, b.data)
        c = synth_population(spec, seed=43)
        assert not np.array_equal(a.data, c.data)

    def test_full_grid_by_default(self):
        es = synth_population(SynthSpec("iid-gaussian-normalized", 4, 1), seed=1)
        assert es.n_samples == GRID_CELLS
        cells = [k.cell for k in es.keys]
        assert cells == list(range(GRID_CELLS))

    def test_rows_unit_norm(self):
        es = synth_population(SynthSpec("clustered-per-instrument", 6, 3, cells=4), seed=5)
        assert np.allclose(np.linalg.norm(es.data, axis=1), 1.0)

    def test_replicated_preset_repeats_one_vector(self):
        es = synth_population(SynthSpec("replicated-single-vector", 5, 2, cells=6), seed=7)
        v = es.view("synth000").columns
        assert np.allclose(v, v[:, :1])

    def test_clustered_preset_stays_near_center(self):
        es = synth_population(
            SynthSpec("clustered-per-instrument", 32, 2, cells=20, noise=0.02), seed=11
        )
        for view in instrument_views(es):
            c = view.columns
            cos = c.T @ c
            assert cos.min() > 0.9

    def test_rejects_unknown_preset(self):
        with pytest.raises(ValidationError, match="unknown preset"):
            SynthSpec("fancy", 4, 1)

    def test_rejects_bad_cells(self):
        with pytest.raises(ValidationError):
            SynthSpec("iid-gaussian-normalized", 4, 1, cells=441)


def toy_stats(dz=4):
    values = np.zeros((GRID_CELLS, GRID_CELLS))
    count = np.zeros((GRID_CELLS, GRID_CELLS), dtype=np.int32)
    cells = np.array([0, 5, 17])
    sub = np.array([
        [1.0, 0.5, 0.25],
        [0.5, 1.0, -0.125],
        [0.25, -0.125, 1.0],
    ])
    values[np.ix_(cells, cells)] = sub
    count[np.ix_(cells, cells)] = 2
    vectors = np.zeros((dz, GRID_CELLS))
    vcount = np.zeros(GRID_CELLS, dtype=np.int32)
    vectors[0, 0] = 1.0
    vectors[1, 5] = 1.0
    vectors[2, 17] = 1.0
    vcount[[0, 5, 17]] = 2
    return CosineGrid(values, count), MeanGrid(vectors, vcount)


class TestStatsBundle:
    def test_round_trip(self, tmp_path):
        # toy values are all exactly representable in float32
        cosine, mean = toy_stats()
        path = tmp_path / "ground.stats"
        save_stats(cosine, mean, path)
        c2, m2 = load_stats(path)
        assert np.array_equal(c2.values, cosine.values)
        assert np.array_equal(c2.count, cosine.count)
        assert np.array_equal(m2.vectors, mean.vectors)
        assert np.array_equal(m2.count, mean.count)

    def test_round_trip_quantizes_once(self, tmp_path):
        cosine, mean = toy_stats()
        mean.vectors[:, 17] = 0.0
        mean.vectors[:2, 17] = np.sqrt(0.5)  # not exact in float32
        path = tmp_path / "ground.stats"
        save_stats(cosine, mean, path)
        _, m2 = load_stats(path)
        assert not np.array_equal(m2.vectors, mean.vectors)
        assert np.allclose(m2.vectors, mean.vectors, atol=1e-7)

    def test_second_cycle_bitwise_identical(self, tmp_path):
        cosine, mean = toy_stats()
        save_stats(cosine, mean, tmp_path / "a.stats")
        c2, m2 = load_stats(tmp_path / "a.stats")
        save_stats(c2, m2, tmp_path / "b.stats")
        assert (tmp_path / "a.stats").read_bytes() == (tmp_path / "b.stats").read_bytes()

    def test_detects_corruption(self, tmp_path):
        cosine, mean = toy_stats()
        path = tmp_path / "ground.stats"
        save_stats(cosine, mean, path)
        blob = bytearray(path.read_bytes())
        blob[-3] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError, match="checksum"):
            load_stats(path)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "ground.stats"
        path.write_bytes(b"NOTSTATS" + b"\x00" * 16)
        with pytest.raises(ValidationError, match="magic"):
            load_stats(path)

    def test_restrict_returns_submatrices(self):
        cosine, _ = toy_stats()
        sub, cnt = cosine.restrict(np.array([0, 5]))
        assert np.allclose(sub, [[1.0, 0.5], [0.5, 1.0]])
        assert np.all(cnt == 2)

    def test_validate_rejects_nonzero_unobserved(self):
        cosine, _ = toy_stats()
        cosine.values[1, 2] = cosine.values[2, 1] = 0.3
        with pytest.raises(ValidationError, match="unobserved"):
            cosine.validate()

    def test_validate_rejects_non_unit_mean(self):
        _, mean = toy_stats()
        mean.vectors[0, 0] = 2.0
        with pytest.raises(ValidationError, match="unit-norm"):
            mean.validate()


class TestDatasetIndex:
    def test_from_manifest_ignores_data(self, tmp_path):
        doc = small_manifest("absent.f32")
        path = tmp_path / "pop.json"
        path.write_text(json.dumps(doc))
        ix = DatasetIndex.from_manifest(path)
        assert ix.instrument_ids() == ["alpha", "beta"]
        assert ix.instrument("alpha").cells == (0, 198)
        assert ix.has_cell("beta", 439)
        assert not ix.has_cell("beta", 0)

    def test_matches_embedding_set(self, tmp_path):
        path = write_manifest(tmp_path, small_manifest(), np.eye(3))
        es = load_population(path)
        assert DatasetIndex.from_embedding_set(es) == DatasetIndex.from_manifest(path)

    def test_unknown_instrument(self, tmp_path):
        path = write_manifest(tmp_path, small_manifest(), np.eye(3))
        ix = DatasetIndex.from_manifest(path)
        with pytest.raises(ValidationError, match="unknown instrument"):
            ix.instrument("gamma")

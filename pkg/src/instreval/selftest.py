"""Built-in oracle suite.

Every closed-form value and invariant the toolkit's correctness rests on,
re-checked at desk scale with fixed seeds.  Runs in seconds, produces the
same output on every run, and fails loudly if any numeric kernel drifts.
"""

from __future__ import annotations

import io

import numpy as np

from . import conditioning, linalg, metrics, refsynth, rng, store
from .grid import GRID_CELLS, SampleKey, grid_index, key_at

# 0.999 quantile of the chi-square distribution with 439 degrees of freedom,
# for the 440-cell uniformity check at 1e5 draws
CHI2_Q999_DOF439 = 536.2925927539656

_CHECKS = []


def _check(name):
    def wrap(fn):
        _CHECKS.append((name, fn))
        return fn
    return wrap


def _expect(cond: bool, detail: str) -> None:
    if not cond:
        raise AssertionError(detail)


def _unit_columns(dz, n, seed):
    g = np.random.Generator(np.random.Philox(seed))
    z = g.standard_normal((dz, n))
    return z / np.linalg.norm(z, axis=0)


def _random_psd(n, seed):
    # eigenvalues kept in [0.1, 2] so no mode sits near the noise floor
    g = np.random.Generator(np.random.Philox(seed))
    q = np.linalg.qr(g.standard_normal((n, n)))[0]
    return (q * (0.1 + 1.9 * g.random(n))) @ q.T


def _single_instrument(cells, columns, iid="inst", normalized=True):
    keys = [SampleKey(iid, *key_at(int(c))) for c in cells]
    return store.EmbeddingSet(
        columns.shape[0], 1, keys, np.ascontiguousarray(columns.T), normalized,
        [store.InstrumentInfo(iid)],
    )


@_check("rng-reference-vectors")
def _rng_vectors():
    gen = rng.SplitMix64(0)
    got = [gen.next_u64() for _ in range(3)]
    want = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    _expect(got == want, f"seed-0 outputs {got} != {want}")


@_check("stream-derivation")
def _stream_derivation():
    _expect(rng.derive_stream(1, 0) == rng.derive_stream(1, 0), "derivation not stable")
    seeds = {rng.derive_stream(1, i) for i in range(100)}
    _expect(len(seeds) == 100, "derived stream seeds collide")


@_check("eigensolver-closed-forms")
def _eigen_closed():
    d = linalg.sym_eigen(np.diag([3.0, 1.0]))
    _expect(np.allclose(d.eigenvalues, [3.0, 1.0]), f"diag spectrum {d.eigenvalues}")
    w = linalg.sym_eigen(np.ones((4, 4))).eigenvalues
    _expect(np.allclose(w, [4, 0, 0, 0], atol=1e-12), f"all-ones spectrum {w}")


@_check("psd-sqrt-closed-forms")
def _sqrt_closed():
    _expect(
        np.allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0])),
        "sqrt of diag(4, 9)",
    )
    j = np.ones((4, 4))
    _expect(np.allclose(linalg.psd_sqrt(j), j / 2, atol=1e-12), "sqrt of all-ones")


@_check("trace-sqrt-closed-forms")
def _tsp_closed():
    got = linalg.trace_sqrt_product(np.eye(2) / 2, np.eye(2) / 2)
    _expect(abs(got - 1.0) < 1e-12, f"identity case {got}")
    got = linalg.trace_sqrt_product(np.ones((4, 4)) / 4, np.eye(4) / 4)
    _expect(abs(got - 0.5) < 1e-9, f"rank-one case {got}")


@_check("trace-sqrt-oracle")
def _tsp_oracle():
    for i in range(10):
        a = _random_psd(8, 100 + i)
        b = _random_psd(8, 200 + i)
        lam = np.linalg.eigvals(a @ b).real
        oracle = float(np.sqrt(np.clip(lam, 0, None)).sum())
        got = linalg.trace_sqrt_product(a, b)
        _expect(abs(got - oracle) <= 1e-9 * max(abs(oracle), 1.0),
                f"pair {i}: {got} vs oracle {oracle}")
        swapped = linalg.trace_sqrt_product(b, a)
        _expect(abs(got - swapped) <= 1e-9 * max(abs(got), 1.0),
                f"pair {i}: asymmetry {got} vs {swapped}")


@_check("fad-closed-forms")
def _fad_closed():
    def one_d(values, iid="a"):
        cols = np.asarray(values, dtype=np.float64)[None, :]
        return _single_instrument(range(len(values)), cols, iid, normalized=False)

    got = metrics.fad(one_d([-1.0, 1.0]), one_d([1.0, 3.0])).value
    _expect(abs(got - 4.0) < 1e-12, f"shifted case {got}")
    got = metrics.fad(one_d([-1.0, 1.0]), one_d([-2.0, 2.0])).value
    _expect(abs(got - 1.0) < 1e-12, f"scaled case {got}")

    es = store.synth_population(store.SynthSpec("iid-gaussian-normalized", 16, 2, cells=32), 7)
    _expect(abs(metrics.fad(es, es).value) <= 1e-9, "identity not ~0")
    lit = metrics.fad(es, es, paper_literal=True).value
    tr = float(np.trace(metrics.moments(es).covariance))
    _expect(abs(lit - 3 * tr) <= 1e-9 * max(tr, 1.0), f"literal {lit} vs 3*Tr {3 * tr}")


@_check("tc-calibration")
def _tc_calibration():
    es = store.synth_population(store.SynthSpec("iid-gaussian-normalized", 64, 2, cells=24), 8)
    got = metrics.tc(es, es).value
    _expect(abs(got - 1.0) <= 1e-8, f"self-comparison {got}")

    flat = np.tile(_unit_columns(4, 1, 9), (1, 4))
    ref = _single_instrument([0, 1, 2, 3], flat)
    test = _single_instrument([0, 1, 2, 3], np.eye(4))
    got = metrics.tc(ref, test).value
    _expect(abs(got - 0.5) <= 1e-9, f"all-ones vs orthonormal {got}")

    for i in range(10):
        a = _single_instrument(range(6), _unit_columns(12, 6, 300 + i))
        b = _single_instrument(range(6), _unit_columns(12, 6, 400 + i))
        v = metrics.tc(a, b).value
        _expect(-1e-12 <= v <= 1 + 1e-8, f"pair {i} out of bounds: {v}")


@_check("clap-score-duality")
def _clap_duality():
    e1 = np.eye(2)[:, :1]
    e2 = np.eye(2)[:, 1:]
    ref = store.EmbeddingSet(
        2, 1,
        [SampleKey("a", 21, 25), SampleKey("a", 21, 50), SampleKey("b", 21, 25)],
        np.vstack([e1.T, e1.T, e1.T]), True,
        [store.InstrumentInfo("a"), store.InstrumentInfo("b")],
    )
    test = store.EmbeddingSet(
        2, 1, ref.keys, np.vstack([e1.T, e1.T, e2.T]), True, ref.instruments,
    )
    ps = metrics.clap_score(ref, test, "per_sample").value
    pi = metrics.clap_score(ref, test, "per_instrument").value
    _expect(abs(ps - 2 / 3) < 1e-12, f"per-sample {ps}")
    _expect(abs(pi - 0.5) < 1e-12, f"per-instrument {pi}")

    a = store.synth_population(store.SynthSpec("iid-gaussian-normalized", 6, 3, cells=5), 10)
    b = store.synth_population(store.SynthSpec("clustered-per-instrument", 6, 3, cells=5), 11)
    d = abs(metrics.clap_score(a, b, "per_sample").value
            - metrics.clap_score(a, b, "per_instrument").value)
    _expect(d <= 1e-12, f"equal-count modes differ by {d}")


@_check("ground-stats-masking")
def _masking():
    es = store.synth_population(store.SynthSpec("iid-gaussian-normalized", 8, 3, cells=None), 12)
    cosine, _ = metrics.build_ground_stats(es)
    dense = np.mean([linalg.cosine_gram(v.columns) for v in store.instrument_views(es)], axis=0)
    err = float(np.abs(cosine.values - dense).max())
    _expect(err <= 1e-12, f"masked vs dense max error {err}")


@_check("stats-round-trip")
def _stats_round_trip():
    es = store.synth_population(store.SynthSpec("clustered-per-instrument", 6, 2, cells=12), 13)
    cosine, mean = metrics.build_ground_stats(es)
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as td:
        a = Path(td) / "a.stats"
        b = Path(td) / "b.stats"
        store.save_stats(cosine, mean, a)
        c2, m2 = store.load_stats(a)
        store.save_stats(c2, m2, b)
        _expect(a.read_bytes() == b.read_bytes(), "second cycle not bitwise identical")


@_check("template-matching")
def _template_match():
    vectors = np.zeros((512, GRID_CELLS))
    count = np.zeros(GRID_CELLS, dtype=np.int32)
    for c in range(GRID_CELLS):
        vectors[c, c] = 1.0
        count[c] = 1
    templates = store.MeanGrid(vectors, count)

    v = np.zeros(512)
    v[0] = v[1] = np.sqrt(0.5)
    cell, _ = refsynth.estimate_pitch_velocity(refsynth.PromptEmbedding(v, "tie"), templates)
    _expect(cell == 0, f"tie resolved to {cell}, not 0")

    cell, _ = refsynth.estimate_pitch_velocity(
        refsynth.PromptEmbedding(np.eye(512)[:, 5].copy(), "e5"), templates
    )
    _expect(cell == 5 and key_at(cell) == (22, 25), f"e5 matched {cell} -> {key_at(cell)}")


@_check("reference-synthesis")
def _reference_synthesis():
    ref_pop = store.synth_population(
        store.SynthSpec("clustered-per-instrument", 32, 4, cells=16, noise=0.3), 14
    )
    cosine, mean = metrics.build_ground_stats(ref_pop)
    g = np.random.Generator(np.random.Philox(15))
    p = g.standard_normal(32)
    prompt = refsynth.PromptEmbedding(p / np.linalg.norm(p), "probe")

    naive = refsynth.synth_reference(prompt, mean, method="naive", cells=[0, 1, 2, 3])
    _expect(np.array_equal(naive.gram, np.ones((4, 4))), "naive Gram not all-ones")

    trans = refsynth.synth_reference(prompt, mean, method="translation")
    pos = int(np.flatnonzero(trans.cells == trans.matched_cell)[0])
    err = float(np.abs(trans.columns[:, pos] - prompt.vector).max())
    _expect(err <= 1e-12, f"matched column off prompt by {err}")

    colored = refsynth.synth_reference(prompt, mean, cosine, method="coloration")
    target, _ = cosine.restrict(colored.cells)
    rel = float(np.linalg.norm(colored.gram - target) / np.linalg.norm(target))
    _expect(rel <= 1e-5, f"coloration Gram error {rel}")
    _expect(
        float(np.abs(np.linalg.norm(colored.columns, axis=0) - 1).max()) <= 1e-6,
        "coloration columns not unit-norm",
    )


@_check("fixed-scheme-table")
def _fixed_table():
    cells = tuple(range(GRID_CELLS))
    expected = {
        "bass": 36, "brass": 48, "string": 48, "synth_lead": 48,
        "guitar": 60, "keyboard": 60, "organ": 60, "reed": 60, "vocal": 60,
        "flute": 72, "mallet": 72,
    }
    for family, pitch in expected.items():
        ix = store.DatasetIndex([
            store.InstrumentIndex(store.InstrumentInfo("i", family), cells)
        ])
        ex = conditioning.pair_fixed(SampleKey("i", 60, 100), ix)
        _expect(
            (ex.condition.pitch, ex.condition.velocity) == (pitch, 100),
            f"{family}: got {(ex.condition.pitch, ex.condition.velocity)}",
        )
    narrow = store.DatasetIndex([
        store.InstrumentIndex(
            store.InstrumentInfo("fl", "flute"),
            tuple(grid_index(p, 100) for p in range(60, 72)),
        )
    ])
    ex = conditioning.pair_fixed(SampleKey("fl", 60, 100), narrow)
    _expect(ex.condition.pitch == 71, f"nearest fallback gave {ex.condition.pitch}")


@_check("random-scheme-uniformity")
def _uniformity():
    cells = tuple(range(GRID_CELLS))
    ix = store.DatasetIndex([
        store.InstrumentIndex(store.InstrumentInfo("full", "keyboard"), cells)
    ])
    gen = rng.SplitMix64(20_240_101)
    target = SampleKey("full", 60, 100)
    n = 100_000
    counts = np.zeros(GRID_CELLS)
    for _ in range(n):
        ex = conditioning.pair_random(target, ix, gen)
        counts[ex.condition.cell] += 1
    expect = n / GRID_CELLS
    stat = float(((counts - expect) ** 2 / expect).sum())
    _expect(stat < CHI2_Q999_DOF439, f"chi-square {stat} >= {CHI2_Q999_DOF439}")


@_check("dropout-rates")
def _dropout():
    ex0 = conditioning.ConditioningExample(SampleKey("a", 60, 100), SampleKey("a", 60, 100))
    gen = rng.SplitMix64(5)
    kept = conditioning.apply_metadata_dropout(ex0, gen, 0.0)
    _expect(kept.family_kept and kept.source_kept, "p=0 dropped a tag")
    dropped = conditioning.apply_metadata_dropout(ex0, gen, 1.0)
    _expect(not dropped.family_kept and not dropped.source_kept, "p=1 kept a tag")

    gen = rng.SplitMix64(6)
    n = 100_000
    fam = src = 0
    for _ in range(n):
        ex = conditioning.apply_metadata_dropout(ex0, gen, 0.3)
        fam += not ex.family_kept
        src += not ex.source_kept
    _expect(abs(fam / n - 0.3) <= 0.01, f"family drop rate {fam / n}")
    _expect(abs(src / n - 0.3) <= 0.01, f"source drop rate {src / n}")


@_check("pair-file-determinism")
def _pair_files():
    cells = tuple(range(0, 100, 7))
    ix = store.DatasetIndex([
        store.InstrumentIndex(store.InstrumentInfo("a", "keyboard"), cells),
        store.InstrumentIndex(store.InstrumentInfo("b", "bass"), cells[:5]),
    ])

    def render():
        buf = io.StringIO()
        conditioning.write_pairs(
            conditioning.emit_pairs(ix, "random", 77, 0.3), buf, "random", 77
        )
        return buf.getvalue()

    _expect(render() == render(), "same seed produced different pair files")


def collect_results() -> list[tuple[str, bool, str]]:
    """Run all checks; (name, passed, failure detail) per check."""
    results = []
    for name, fn in _CHECKS:
        try:
            fn()
        except Exception as exc:
            results.append((name, False, str(exc)))
        else:
            results.append((name, True, ""))
    return results


def run_selftest(out) -> int:
    """Run all checks, write the pass/fail table; returns the failure count."""
    results = collect_results()
    width = max(len(name) for name, _, _ in results)
    failures = 0
    for i, (name, ok, detail) in enumerate(results, 1):
        if ok:
            out.write(f"[{i:2d}/{len(results)}] {name:<{width}}  pass\n")
        else:
            failures += 1
            out.write(f"[{i:2d}/{len(results)}] {name:<{width}}  FAIL  {detail}\n")
    out.write(f"result: {len(results) - failures}/{len(results)} passed\n")
    return failures

"""Objective scores over embedding populations.

Three score families, all on unit-norm CLAP-style embeddings:

* fad: Frechet distance between two unpaired populations from their first
  two moments.
* tc: timbral consistency; how well each generated instrument's internal
  cosine structure matches a reference, either a paired reference set or
  pre-aggregated ground statistics (star mode).
* clap_score: mean paired cosine between condition and output, aggregated
  per sample or per instrument.

Every score returns a MetricReport carrying the resolved configuration, so
serialized reports are self-describing and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import GRID_CELLS
from .linalg import cosine_gram, trace_sqrt_product
from .store import CosineGrid, EmbeddingSet, MeanGrid, instrument_views

COVERAGE_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class PopulationMoments:
    """Mean and covariance of a population, frames flattened to vectors."""

    mean: np.ndarray
    covariance: np.ndarray
    n_effective: int


@dataclass
class MetricReport:
    metric: str
    value: float
    per_instrument: dict[str, float] | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NumericalError(f"{self.metric} produced a non-finite value")

    def to_dict(self) -> dict:
        """Serializable form with fixed field order and sorted config keys."""
        return {
            "metric": self.metric,
            "value": self.value,
            "per_instrument": self.per_instrument,
            "config": {k: self.config[k] for k in sorted(self.config)},
        }


def moments(es: EmbeddingSet, ddof: int = 0) -> PopulationMoments:
    """First two moments over all T*N frame vectors."""
    n = es.data.shape[0]
    if n < 2:
        raise ValidationError(f"population has {n} vectors; moments need at least 2")
    if not 0 <= ddof < n:
        raise ValidationError(f"ddof {ddof} invalid for {n} vectors")
    mean = es.data.mean(axis=0)
    centered = es.data - mean
    cov = centered.T @ centered / (n - ddof)
    cov = (cov + cov.T) / 2.0
    return PopulationMoments(mean, cov, n)


def fad(
    ref: EmbeddingSet,
    test: EmbeddingSet,
    paper_literal: bool = False,
    ddof: int = 0,
) -> MetricReport:
    """Frechet distance between two populations.

    Default mode scores d^2 = |mu1 - mu2|^2 + Tr(A1 + A2 - 2 (A1 A2)^{1/2}),
    which is 0 on identical populations.  paper_literal flips the sign of the
    cross term to +(A1 A2)^{1/2}; that variant evaluates to 3 Tr(A) on
    identical populations and exists only for comparison against tooling
    that uses it.
    """
    if ref.dz != test.dz:
        raise ValidationError(f"dimension mismatch: ref dz={ref.dz}, test dz={test.dz}")
    m1 = moments(ref, ddof)
    m2 = moments(test, ddof)
    delta = m1.mean - m2.mean
    cross = trace_sqrt_product(m1.covariance, m2.covariance)
    base = float(delta @ delta) + float(np.trace(m1.covariance)) + float(np.trace(m2.covariance))
    value = base + cross if paper_literal else base - 2.0 * cross
    return MetricReport(
        "fad",
        float(value),
        None,
        {
            "paper_literal": paper_literal,
            "ddof": ddof,
            "dz": ref.dz,
            "n_ref": m1.n_effective,
            "n_test": m2.n_effective,
        },
    )


def build_ground_stats(ref: EmbeddingSet) -> tuple[CosineGrid, MeanGrid]:
    """Aggregate a reference set into grid statistics.

    CosineGrid entry (a, b) is the mean cosine over instruments that contain
    both cells; MeanGrid column g is the renormalized mean embedding at cell
    g over instruments that contain it.  Counts record contributors; pairs
    never co-present stay masked at 0.
    """
    ref.require_normalized("reference set")
    if not ref.instruments:
        raise ValidationError("empty reference set")
    acc = np.zeros((GRID_CELLS, GRID_CELLS))
    cnt = np.zeros((GRID_CELLS, GRID_CELLS), dtype=np.int32)
    vec_acc = np.zeros((ref.dz, GRID_CELLS))
    vec_cnt = np.zeros(GRID_CELLS, dtype=np.int32)

    for view in instrument_views(ref):
        ix = np.ix_(view.present, view.present)
        acc[ix] += cosine_gram(view.columns)
        cnt[ix] += 1
        vec_acc[:, view.present] += view.columns
        vec_cnt[view.present] += 1

    values = np.where(cnt > 0, acc / np.maximum(cnt, 1), 0.0)
    cosine = CosineGrid(values, cnt)

    vectors = np.zeros_like(vec_acc)
    seen = vec_cnt > 0
    means = vec_acc[:, seen] / vec_cnt[seen]
    norms = np.linalg.norm(means, axis=0)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(seen)[np.argmin(norms)])
        raise NumericalError(
            f"mean embedding at grid cell {bad} cancels to zero; cannot renormalize"
        )
    vectors[:, seen] = means / norms
    mean = MeanGrid(vectors, vec_cnt)
    cosine.validate()
    mean.validate()
    return cosine, mean


def _tc_views(test: EmbeddingSet):
    test.require_normalized("test set")
    if not test.instruments:
        raise ValidationError("test set has no instruments")
    views = {v.instrument_id: v for v in instrument_views(test)}
    return [views[iid] for iid in sorted(views)]


def tc(ref_or_stats, test: EmbeddingSet, star: bool = False) -> MetricReport:
    """Timbral-consistency score, mean over instruments of
    (1/N_k) Tr((C1 C2)^{1/2}) with unit-diagonal cosine Grams.

    star=False compares against a paired reference set (same instruments,
    same sample keys).  star=True compares against accumulated CosineGrid
    ground statistics restricted to each instrument's cells; masked entries
    contribute 0 and a coverage warning is recorded when more than 1% of an
    instrument's needed entries are masked.
    """
    views = _tc_views(test)
    config: dict = {"star": star, "instruments": len(views)}
    scores: dict[str, float] = {}

    if star:
        if not isinstance(ref_or_stats, CosineGrid):
            raise ValidationError("tc with star=True needs ground CosineGrid statistics")
        stats = ref_or_stats
        coverage: dict[str, float] = {}
        for view in views:
            sub, cnt = stats.restrict(view.present)
            missing = np.flatnonzero(np.diag(cnt) == 0)
            if missing.size:
                cells = ", ".join(str(int(view.present[i])) for i in missing[:8])
                raise ValidationError(
                    f"instrument {view.instrument_id!r} uses grid cells absent "
                    f"from the ground stats: {cells}"
                )
            masked = float(np.mean(cnt == 0))
            if masked > COVERAGE_WARN_FRACTION:
                coverage[view.instrument_id] = masked
            c2 = cosine_gram(view.columns)
            scores[view.instrument_id] = trace_sqrt_product(sub, c2) / view.n_samples
        if coverage:
            config["coverage_warnings"] = coverage
    else:
        if not isinstance(ref_or_stats, EmbeddingSet):
            raise ValidationError("tc with star=False needs a reference EmbeddingSet")
        ref = ref_or_stats
        ref.require_normalized("reference set")
        ref_ids = set(ref.instrument_ids())
        for view in views:
            if view.instrument_id not in ref_ids:
                raise ValidationError(
                    f"instrument {view.instrument_id!r} missing from the reference set"
                )
            ref_view = ref.view(view.instrument_id)
            if not np.array_equal(ref_view.present, view.present):
                raise ValidationError(
                    f"sample-set mismatch for instrument {view.instrument_id!r}"
                )
            c1 = cosine_gram(ref_view.columns)
            c2 = cosine_gram(view.columns)
            scores[view.instrument_id] = trace_sqrt_product(c1, c2) / view.n_samples

    value = sum(scores.values()) / len(scores)
    config["aggregation"] = "mean"
    return MetricReport("tc", float(value), scores, config)


def clap_score(
    ref: EmbeddingSet, test: EmbeddingSet, mode: str = "per_sample"
) -> MetricReport:
    """Mean cosine between paired condition/output embeddings.

    per_sample averages over all N pairs; per_instrument averages each
    instrument's mean cosine, then averages over the K instruments.  The two
    coincide exactly when every instrument has the same sample count.
    """
    if mode not in ("per_sample", "per_instrument"):
        raise ValidationError(f"unknown mode {mode!r}; use per_sample or per_instrument")
    ref.require_normalized("reference set")
    test.require_normalized("test set")
    if ref.dz != test.dz:
        raise ValidationError(f"dimension mismatch: ref dz={ref.dz}, test dz={test.dz}")
    if set(ref.instrument_ids()) != set(test.instrument_ids()):
        only_ref = sorted(set(ref.instrument_ids()) - set(test.instrument_ids()))
        only_test = sorted(set(test.instrument_ids()) - set(ref.instrument_ids()))
        raise ValidationError(
            f"populations are not paired (only in ref: {only_ref}, only in test: {only_test})"
        )

    traces: dict[str, float] = {}
    counts: dict[str, int] = {}
    for iid in sorted(ref.instrument_ids()):
        rv = ref.view(iid)
        tv = test.view(iid)
        if not np.array_equal(rv.present, tv.present):
            raise ValidationError(f"sample-set mismatch for instrument {iid!r}")
        cosines = np.einsum("ij,ij->j", rv.columns, tv.columns)
        traces[iid] = float(cosines.mean())
        counts[iid] = tv.n_samples

    n_total = sum(counts.values())
    if mode == "per_sample":
        value = sum(traces[i] * counts[i] for i in sorted(traces)) / n_total
        aggregation = "sample_weighted_mean"
    else:
        value = sum(traces.values()) / len(traces)
        aggregation = "mean"
    return MetricReport(
        "clap_score",
        float(value),
        traces,
        {
            "mode": mode,
            "aggregation": aggregation,
            "n_pairs": n_total,
            "instruments": len(traces),
            "pair_counts": counts,
        },
    )

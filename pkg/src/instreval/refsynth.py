"""Text-to-instrument reference synthesis.

A text prompt arrives as one precomputed unit-norm embedding.  To score a
generated instrument against it, a reference ensemble is synthesized on the
instrument's grid cells by one of three methods:

* naive: replicate the prompt vector at every cell (Gram = all-ones).
* translation: shift the mean-embedding grid so its best-matching column
  lands on the prompt, renormalizing columns.
* coloration: recolor the translated ensemble so its Gram equals the ground
  cosine grid restricted to those cells.

The T2I score is then the mean paired cosine between reference and
generated columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import key_at
from .linalg import color_to_target
from .metrics import MetricReport
from .store import CosineGrid, EmbeddingSet, MeanGrid, load_population

METHODS = ("naive", "translation", "coloration")
UNIT_NORM_TOL = 1e-6
GRAM_MATCH_RTOL = 1e-5


@dataclass(frozen=True)
class PromptEmbedding:
    """One prompt: a unit-norm vector and its opaque text label."""

    vector: np.ndarray
    label: str

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("prompt vector must be a non-empty 1-D array")
        if not np.isfinite(v).all():
            raise ValidationError("prompt vector contains non-finite entries")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValidationError(f"prompt vector norm {norm:.8f} is not 1 within {UNIT_NORM_TOL:g}")
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class SynthesizedReference:
    """Reference ensemble on a cell subset, with its Gram for inspection."""

    columns: np.ndarray
    cells: np.ndarray
    method: str
    matched_cell: int
    gram: np.ndarray

    def __post_init__(self):
        norms = np.linalg.norm(self.columns, axis=0)
        if float(np.abs(norms - 1.0).max()) > UNIT_NORM_TOL:
            raise NumericalError("synthesized reference columns are not unit-norm")


def load_prompt(path) -> PromptEmbedding:
    """Read a prompt from a single-record population file.

    The file must hold exactly one instrument with one single-frame sample;
    the instrument id is taken as the prompt label.
    """
    es = load_population(path, enforce_norm=True)
    if len(es.instruments) != 1 or es.n_samples != 1 or es.frames_per_sample != 1:
        raise ValidationError(
            f"{path}: a prompt file must hold exactly one single-frame sample "
            f"(got {len(es.instruments)} instruments, {es.n_samples} samples, "
            f"{es.frames_per_sample} frames)"
        )
    return PromptEmbedding(es.data[0].copy(), es.instruments[0].instrument_id)


def estimate_pitch_velocity(prompt: PromptEmbedding, templates: MeanGrid) -> tuple[int, np.ndarray]:
    """Best-matching grid cell for a prompt by cosine against templates.

    Ties break toward the lowest cell index.  Returns (cell, template
    column).
    """
    avail = np.flatnonzero(templates.available)
    if avail.size == 0:
        raise ValidationError("no available template columns")
    if templates.vectors.shape[0] != prompt.vector.shape[0]:
        raise ValidationError(
            f"dimension mismatch: prompt dz={prompt.vector.shape[0]}, "
            f"templates dz={templates.vectors.shape[0]}"
        )
    scores = prompt.vector @ templates.vectors[:, avail]
    best = int(avail[int(np.argmax(scores))])
    return best, templates.vectors[:, best].copy()


def _require_covered(cells: np.ndarray, mask: np.ndarray, what: str) -> None:
    missing = [int(c) for c in cells if not mask[int(c)]]
    if missing:
        shown = ", ".join(str(c) for c in missing[:8])
        raise ValidationError(f"cell-coverage mismatch: {what} missing cells {shown}")


def synth_reference(
    prompt: PromptEmbedding,
    templates: MeanGrid,
    ground: CosineGrid | None = None,
    method: str = "naive",
    cells=None,
    paper_literal: bool = False,
    gram_rtol: float = GRAM_MATCH_RTOL,
) -> SynthesizedReference:
    """Synthesize a reference ensemble for a prompt on the given cells.

    cells=None uses every available template cell.  paper_literal flips the
    translation offset to the printed direction (template minus prompt),
    which negates the prompt at the matched cell; the default aligns the
    matched column to the prompt exactly.  gram_rtol bounds the relative
    Frobenius error allowed between the colored Gram and its target.
    """
    if not gram_rtol > 0.0:
        raise ValidationError(f"gram_rtol must be positive, got {gram_rtol}")
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    matched_cell, matched_template = estimate_pitch_velocity(prompt, templates)
    if cells is None:
        cells = np.flatnonzero(templates.available)
    cells = np.asarray(cells, dtype=np.int64)
    if cells.size == 0:
        raise ValidationError("no cells requested for synthesis")
    _require_covered(cells, templates.available, "templates")
    n = int(cells.size)

    if method == "naive":
        columns = np.tile(prompt.vector[:, None], (1, n))
        gram = np.ones((n, n))
        return SynthesizedReference(columns, cells, method, matched_cell, gram)

    offset = (
        matched_template - prompt.vector if paper_literal
        else prompt.vector - matched_template
    )
    shifted = templates.vectors[:, cells] + offset[:, None]
    norms = np.linalg.norm(shifted, axis=0)
    if np.any(norms == 0.0):
        bad = int(cells[int(np.argmin(norms))])
        raise NumericalError(f"translated column at cell {bad} cancels to zero")
    columns = shifted / norms

    if method == "coloration":
        if ground is None:
            raise ValidationError("coloration needs ground cosine statistics")
        _require_covered(cells, np.diag(ground.count) > 0, "ground stats")
        target, _ = ground.restrict(cells)
        columns = color_to_target(columns, target)
        gram = columns.T @ columns
        gram = (gram + gram.T) / 2.0
        err = float(np.linalg.norm(gram - target) / max(np.linalg.norm(target), 1e-300))
        if err > gram_rtol:
            raise NumericalError(
                f"coloration missed the target Gram: relative error {err:.3e}"
            )
    else:
        gram = columns.T @ columns
        gram = (gram + gram.T) / 2.0

    return SynthesizedReference(columns, cells, method, matched_cell, gram)


def t2i_score(
    prompt: PromptEmbedding,
    generated: EmbeddingSet,
    templates: MeanGrid,
    ground: CosineGrid | None = None,
    method: str = "naive",
    paper_literal: bool = False,
    gram_rtol: float = GRAM_MATCH_RTOL,
) -> MetricReport:
    """Mean paired cosine between a synthesized reference and one generated
    instrument, on exactly the instrument's present cells."""
    generated.require_normalized("generated set")
    if len(generated.instruments) != 1:
        raise ValidationError(
            f"t2i scoring takes exactly one generated instrument, got {len(generated.instruments)}"
        )
    view = generated.view(generated.instruments[0].instrument_id)
    if generated.dz != templates.vectors.shape[0]:
        raise ValidationError(
            f"dimension mismatch: generated dz={generated.dz}, "
            f"templates dz={templates.vectors.shape[0]}"
        )
    ref = synth_reference(
        prompt, templates, ground, method,
        cells=view.present, paper_literal=paper_literal, gram_rtol=gram_rtol,
    )
    cosines = np.einsum("ij,ij->j", ref.columns, view.columns)
    pitch, velocity = key_at(ref.matched_cell)
    return MetricReport(
        "t2i_clap",
        float(cosines.mean()),
        {view.instrument_id: float(cosines.mean())},
        {
            "method": method,
            "paper_literal": paper_literal,
            "prompt_label": prompt.label,
            "matched_cell": ref.matched_cell,
            "matched_pitch": pitch,
            "matched_velocity": velocity,
            "n_samples": view.n_samples,
        },
    )

"""Regenerate the pinned 56-word medium-corpus matrix fixture.

The output is committed as ``src/cowordmap/data/medium_matrix.csv``; rerunning
this script with the defaults reproduces it byte for byte. Documents mix five
themes with Dirichlet proportions; each theme favours its own block of words
over a Zipf-like background, so words co-occur mostly within their block.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from cowordmap.matrix import WordDocumentMatrix, write_matrix_csv

WORDS = (
    "citation", "impact", "journal", "h-index", "ranking", "university",
    "indicator", "bibliometrics", "peer", "review", "quality", "assessment",
    "funding", "policy", "excellence", "scholar", "google", "database",
    "coverage", "web", "scopus", "altmetrics", "twitter", "social",
    "media", "download", "usage", "open", "access", "repository",
    "patent", "industry", "innovation", "collaboration", "network", "co-authorship",
    "country", "national", "international", "field", "normalization", "percentile",
    "discipline", "humanities", "book", "language", "evaluation", "researcher",
    "performance", "productivity", "gender", "career", "mobility", "editor",
    "publisher", "retraction",
)

DEFAULTS = dict(seed=2, docs=687, themes=5, alpha=0.3, length=4, mix=0.08, zipf=0.7)


def generate(seed, docs, themes, alpha, length, mix, zipf) -> WordDocumentMatrix:
    rng = np.random.default_rng(seed)
    w = len(WORDS)
    theme = np.arange(w) % themes
    base = 1.0 / (np.arange(w) + 1) ** zipf
    rng.shuffle(base)
    phi = base * np.where(theme[None, :] == np.arange(themes)[:, None], 1.0, mix)
    phi /= phi.sum(axis=1, keepdims=True)

    counts = np.zeros((docs, w), dtype=np.int64)
    for d in range(docs):
        theta = rng.dirichlet(np.full(themes, alpha))
        counts[d] = rng.multinomial(1 + rng.poisson(length), theta @ phi)
    counts = counts[counts.sum(axis=1) > 0]
    return WordDocumentMatrix(WORDS, tuple(str(i + 1) for i in range(len(counts))), counts)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parents[1] / "src/cowordmap/data/medium_matrix.csv")
    for key, value in DEFAULTS.items():
        ap.add_argument(f"--{key}", type=type(value), default=value)
    args = ap.parse_args()
    m = generate(**{k: getattr(args, k) for k in DEFAULTS})
    write_matrix_csv(m, args.out)
    print(f"wrote {m.shape[0]} documents x {m.shape[1]} words to {args.out}")


if __name__ == "__main__":
    main()

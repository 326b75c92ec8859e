"""Compare labelings: topic/cluster word alignment, contingency tables, chi-square and Cramer's V."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.special import gammaincc

from .lda import TopicModel
from .network import Partition, read_pajek_net, read_pajek_vector, relabel

logger = logging.getLogger(__name__)


class CompareError(ValueError):
    pass


class UntestableError(CompareError):
    """The table is too small (fewer than two rows or columns) for a chi-square test."""


@dataclass(frozen=True)
class WordAlignment:
    # (word, topic, cluster); cluster is None when no clustering was supplied
    matched: tuple[tuple[str, int, int | None], ...]
    unmatched_topic_words: tuple[str, ...]
    # word -> (topics whose list contains it, topic chosen)
    multi_topic_words: dict[str, tuple[tuple[int, ...], int]]
    # every (word, topic) slot whose word is in the co-word vocabulary
    instances: tuple[tuple[str, int, int | None], ...] = ()

    @property
    def words(self) -> list[str]:
        return [m[0] for m in self.matched]


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_labels: tuple
    col_labels: tuple

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def testable(self) -> bool:
        r, c = self.counts.shape
        return r >= 2 and c >= 2


@dataclass(frozen=True)
class AssociationResult:
    chi_square: float
    df: int
    p_value: float
    cramers_v: float
    n: int
    table: list[list[int]]
    row_labels: list
    col_labels: list

    def to_dict(self) -> dict:
        return {
            "chi_square": self.chi_square,
            "df": self.df,
            "p_value": self.p_value,
            "cramers_v": self.cramers_v,
            "n": self.n,
            "table": self.table,
            "row_labels": self.row_labels,
            "col_labels": self.col_labels,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AssociationResult":
        return cls(d["chi_square"], d["df"], d["p_value"], d["cramers_v"], d["n"],
                   d["table"], d["row_labels"], d["col_labels"])


def match_topic_words(
    lists: Sequence[Sequence[tuple[str, float]]],
    vocab: Mapping[str, int] | Sequence[str],
    model: TopicModel | None = None,
    canonical: Mapping[str, str] | None = None,
) -> WordAlignment:
    """Intersect the union of topic word lists with the co-word vocabulary.

    ``vocab`` is either a plain word list or a word -> cluster mapping. A word
    listed under several topics goes to the topic where it has the highest
    phi (from ``model``, else from the list probabilities); ties go to the
    lowest topic id. ``canonical`` maps surface forms from the topic lists to
    the forms used in the vocabulary (e.g. plurals to singulars); forms that
    collapse onto one word within a topic keep the larger probability.
    """
    clusters = dict(vocab) if isinstance(vocab, Mapping) else {w: None for w in vocab}
    where: dict[str, list[int]] = {}
    prob: dict[tuple[str, int], float] = {}
    order: list[str] = []
    col = {w: j for j, w in enumerate(model.words)} if model is not None else {}
    for t, lst in enumerate(lists):
        for surface, p in lst:
            if surface in col:
                p = float(model.phi[t, col[surface]])
            word = canonical.get(surface, surface) if canonical else surface
            if word not in where:
                where[word] = []
                order.append(word)
            if t not in where[word]:
                where[word].append(t)
                prob[word, t] = p
            else:
                prob[word, t] = max(prob[word, t], p)

    matched, unmatched, instances = [], [], []
    multi: dict[str, tuple[tuple[int, ...], int]] = {}
    for word in order:
        topics = where[word]
        if word not in clusters:
            unmatched.append(word)
            continue
        best = min(topics, key=lambda t: (-prob[word, t], t))
        if len(topics) > 1:
            multi[word] = (tuple(topics), best)
        matched.append((word, best, clusters[word]))
        instances.extend((word, t, clusters[word]) for t in topics)
    if not matched:
        raise CompareError("no topic word occurs in the co-word vocabulary")
    matched.sort(key=lambda m: (m[1], m[0]))
    instances.sort(key=lambda m: (m[1], m[0]))
    return WordAlignment(tuple(matched), tuple(unmatched), multi, tuple(instances))


def _sort_key(label):
    return (0, label, "") if isinstance(label, (int, np.integer)) else (1, 0, str(label))


def contingency(labels_a: Mapping | Sequence, labels_b: Mapping | Sequence) -> ContingencyTable:
    """Cross-tabulate two labelings of the same items.

    Mappings are joined on their common keys; sequences are paired by
    position. Labels that end up with no items are not given a row or column.
    """
    if isinstance(labels_a, Mapping) and isinstance(labels_b, Mapping):
        common = [k for k in labels_a if k in labels_b]
        if not common:
            raise CompareError("the two labelings share no items")
        pairs = [(labels_a[k], labels_b[k]) for k in common]
    else:
        if len(labels_a) != len(labels_b):
            raise CompareError(f"labelings differ in length: {len(labels_a)} vs {len(labels_b)}")
        if len(labels_a) == 0:
            raise CompareError("no items to tabulate")
        pairs = list(zip(labels_a, labels_b))
    rows = sorted({a for a, _ in pairs}, key=_sort_key)
    cols = sorted({b for _, b in pairs}, key=_sort_key)
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: j for j, c in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for a, b in pairs:
        counts[ri[a], ci[b]] += 1
    return ContingencyTable(counts, tuple(rows), tuple(cols))


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution (regularized upper incomplete gamma)."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def chi_square(t: ContingencyTable | np.ndarray) -> tuple[float, int, float]:
    """Pearson chi-square without continuity correction; returns (chi2, df, p)."""
    obs = np.asarray(t.counts if isinstance(t, ContingencyTable) else t, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 2 or obs.shape[1] < 2:
        raise UntestableError(f"need at least a 2x2 table, got {obs.shape}")
    n = obs.sum()
    rows, cols = obs.sum(axis=1), obs.sum(axis=0)
    assert n > 0 and (rows > 0).all() and (cols > 0).all(), "zero marginal in contingency table"
    expected = np.outer(rows, cols) / n
    if (expected < 5).any():
        logger.info("%d of %d expected counts are below 5", int((expected < 5).sum()), expected.size)
    chi2 = float(((obs - expected) ** 2 / expected).sum())
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return chi2, df, chi_square_sf(chi2, df)


def cramers_v(chi2: float, n: int, r: int, c: int) -> float:
    if min(r, c) < 2:
        raise UntestableError("Cramer's V needs at least two rows and two columns")
    if n <= 0:
        raise CompareError("n must be positive")
    v = math.sqrt(chi2 / (n * (min(r, c) - 1)))
    return min(max(v, 0.0), 1.0)


def associate(labels_a: Mapping | Sequence, labels_b: Mapping | Sequence) -> AssociationResult:
    """Contingency table, chi-square and Cramer's V for two labelings."""
    table = contingency(labels_a, labels_b)
    if not table.testable:
        raise UntestableError(f"{table.counts.shape[0]}x{table.counts.shape[1]} table cannot be tested")
    chi2, df, p = chi_square(table)
    r, c = table.counts.shape
    return AssociationResult(
        chi_square=chi2, df=df, p_value=p, cramers_v=cramers_v(chi2, table.n, r, c), n=table.n,
        table=table.counts.tolist(),
        row_labels=[_plain(x) for x in table.row_labels],
        col_labels=[_plain(x) for x in table.col_labels],
    )


def _plain(x):
    return int(x) if isinstance(x, (int, np.integer)) else x


def word_level_association(alignment: WordAlignment, mode: str = "unique") -> AssociationResult:
    """Topic vs. cluster association over matched words.

    ``unique`` counts each matched word once under its resolved topic;
    ``instances`` counts every (word, topic) list slot.
    """
    if mode == "unique":
        rows = alignment.matched
    elif mode == "instances":
        rows = alignment.instances
    else:
        raise CompareError(f"unknown counting mode {mode!r}")
    if any(r[2] is None for r in rows):
        raise CompareError("alignment carries no cluster labels")
    return associate([r[1] for r in rows], [r[2] for r in rows])


def document_level_association(topics: Sequence[int], factors: Sequence[int]) -> AssociationResult:
    """Association between per-document dominant topics and dominant factors."""
    if len(topics) != len(factors):
        raise CompareError("topic and factor labels must cover the same documents")
    if len(topics) < 2:
        raise UntestableError("need at least two documents")
    return associate(list(topics), list(factors))


def permutation_p_value(counts: np.ndarray, n_perm: int = 2000, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo p-value of the chi-square statistic under random relabeling.

    Column labels are shuffled against row labels with the margins held
    fixed. Returns the p-value and its binomial standard error; for the
    error, the estimate is clipped to [1/n_perm, 1 - 1/n_perm] so that zero
    or all hits do not claim a zero error.
    """
    counts = np.asarray(counts, dtype=np.int64)
    rows = np.repeat(np.arange(counts.shape[0]), counts.sum(axis=1))
    cols = np.concatenate([np.repeat(np.arange(counts.shape[1]), counts[i]) for i in range(counts.shape[0])])
    observed, _, _ = chi_square(counts)
    rng = np.random.default_rng(seed)
    r, c = counts.shape
    hits = 0
    for _ in range(n_perm):
        perm = rng.permutation(cols)
        tab = np.zeros((r, c), dtype=np.int64)
        np.add.at(tab, (rows, perm), 1)
        stat, _, _ = chi_square(tab)
        if stat >= observed - 1e-9:
            hits += 1
    p = hits / n_perm
    q = min(max(p, 1.0 / n_perm), 1.0 - 1.0 / n_perm)
    return p, math.sqrt(q * (1 - q) / n_perm)


def import_partition(
    path: str | Path,
    net_path: str | Path | None = None,
    known_words: Sequence[str] | None = None,
) -> Partition:
    """Read an external clustering as a Partition over words.

    Accepts a CSV with header ``word,cluster`` or a Pajek ``.clu`` file
    together with the ``.net`` file that names its vertices. Cluster ids are
    renumbered from 0 in ascending order of the original ids. Words absent
    from ``known_words`` are kept and reported in a warning.
    """
    path = Path(path)
    if path.suffix.lower() == ".clu":
        if net_path is None:
            raise CompareError(".clu partitions need the matching .net file for vertex names")
        words = list(read_pajek_net(net_path).words)
        raw = read_pajek_vector(path, int)
        if len(raw) != len(words):
            raise CompareError(f"{path} has {len(raw)} entries but {net_path} has {len(words)} vertices")
    else:
        words, raw = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["word", "cluster"]:
                raise CompareError(f"{path}: expected header 'word,cluster'")
            seen = set()
            for lineno, row in enumerate(reader, 2):
                if not row or not "".join(row).strip():
                    continue
                if len(row) != 2:
                    raise CompareError(f"{path}:{lineno}: malformed row {row!r}")
                word, label = row[0].strip(), row[1].strip()
                if not word:
                    raise CompareError(f"{path}:{lineno}: empty word")
                try:
                    label = int(label)
                except ValueError:
                    raise CompareError(f"{path}:{lineno}: cluster id {label!r} is not an integer") from None
                if word in seen:
                    raise CompareError(f"{path}:{lineno}: duplicate word {word!r}")
                seen.add(word)
                words.append(word)
                raw.append(label)
    if not words:
        raise CompareError(f"{path}: no rows")
    if known_words is not None:
        unknown = [w for w in words if w not in set(known_words)]
        if unknown:
            logger.warning("partition has %d word(s) not in the vocabulary: %s", len(unknown), ", ".join(unknown))
    ids = {c: i for i, c in enumerate(sorted(set(raw)))}
    return Partition(tuple(words), tuple(ids[c] for c in raw))


def write_partition_csv(partition: Partition, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "cluster"])
        for word, c in zip(partition.nodes, partition.assignment):
            w.writerow([word, c])

"""End-to-end run: corpus -> co-word map and factor model, corpus -> topic model, then comparisons.

Config files are flat ``key = value`` text; ``#`` starts a comment and an
empty value means "use the default". Keys:

    input         corpus file or directory (empty: bundled Manifesto text)
    split         paragraphs | files
    stopwords     stopword file (empty: bundled 429-word list)
    min_freq      minimum corpus frequency for the co-word vocabulary
    filter_order  stop-first | freq-first
    tau           cosine threshold; edges need cosine > tau
    factors       number of principal components kept for varimax
    topics        number of LDA topics
    alpha, beta   LDA smoothing (empty alpha: 5 / topics)
    sweeps        Gibbs sweeps
    seed          LDA seed; also seeds the map layout
    top_k         words listed per topic
    out           output directory
    svg, figures  write the SVG map / PNG figures (true | false)
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import compare, corpus as corpus_mod, factors, lda, matrix, network
from .compare import UntestableError
from .corpus import bundled_path

logger = logging.getLogger(__name__)

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    """A stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    input: str | None = None
    split: str = "paragraphs"
    stopwords: str | None = None
    min_freq: int = 3
    filter_order: str = "stop-first"
    tau: float = 0.2
    factors: int = 5
    topics: int = 5
    alpha: float | None = None
    beta: float = 0.01
    sweeps: int = 1000
    seed: int = 0
    top_k: int = 10
    out: str = "cowordmap-out"
    svg: bool = True
    figures: bool = True

    def __post_init__(self):
        if self.split not in ("paragraphs", "files", "one-doc-per-file"):
            raise ConfigError(f"split must be paragraphs or files, got {self.split!r}")
        if self.filter_order not in ("stop-first", "freq-first", *corpus_mod.FILTER_ORDERS):
            raise ConfigError(f"filter_order must be stop-first or freq-first, got {self.filter_order!r}")
        if self.min_freq < 1:
            raise ConfigError("min_freq must be >= 1")
        if not 0.0 <= self.tau < 1.0:
            raise ConfigError("tau must lie in [0, 1)")
        for name in ("factors", "topics", "sweeps", "top_k"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if not self.beta > 0:
            raise ConfigError("beta must be > 0")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "PipelineConfig":
        """Build from a mapping whose values may still be strings (as read from a file)."""
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for raw_key, value in values.items():
            key = raw_key.strip().replace("-", "_")
            if key not in kinds:
                raise ConfigError(f"unknown config key {raw_key!r}")
            kwargs[key] = _coerce(key, kinds[key], value)
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            text = Path(path).read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """SHA-256 over every setting that can change the results (``out`` excluded)."""
        lines = [l for l in self.to_text().splitlines() if not l.startswith("out =")]
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()

    @property
    def lda_config(self) -> lda.LdaConfig:
        return lda.LdaConfig(T=self.topics, alpha=self.alpha, beta=self.beta,
                             sweeps=self.sweeps, seed=self.seed, top_k=self.top_k)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, kind: str, value: Any) -> Any:
    if not isinstance(value, str):
        return value
    if value == "":
        default = next(f.default for f in dataclasses.fields(PipelineConfig) if f.name == key)
        return default
    try:
        if kind == "bool":
            return _BOOL[value.lower()]
        if kind == "int":
            return int(value)
        if kind in ("float", "float | None"):
            return float(value)
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


# -- report -------------------------------------------------------------------

@dataclass
class Report:
    """Everything a run produced, as plain JSON-compatible values."""

    corpus: dict
    network: dict
    factors: dict
    topics: dict
    alignment: dict
    associations: dict
    files: dict
    warnings: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Report":
        names = [f.name for f in dataclasses.fields(cls)]
        missing = [n for n in names if n not in d]
        if missing:
            raise ValueError(f"report is missing {', '.join(missing)}")
        return cls(**{n: d[n] for n in names})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def report_schema() -> dict:
    return json.loads(bundled_path("report.schema.json").read_text("utf-8"))


class _Collector(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record):
        self.messages.append(f"{record.name.rsplit('.', 1)[-1]}: {record.getMessage()}")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except PipelineError:
                raise
            except (ValueError, RuntimeError, OSError) as exc:
                raise PipelineError(name, exc) from exc
        return run
    return wrap


@_stage("ingest")
def _ingest(cfg: PipelineConfig):
    source = cfg.input or bundled_path("manifesto.txt")
    raw = corpus_mod.load_corpus(source, cfg.split)
    stoplist = corpus_mod.load_stopwords(cfg.stopwords)
    return raw, stoplist


@_stage("matrix")
def build_working_set(cfg: PipelineConfig, raw, stoplist):
    """Plural map, vocabulary and word/document matrix for the co-word branch."""
    stop_first = corpus_mod.resolve_filter_order(cfg.filter_order) == corpus_mod.FILTER_ORDERS[0]
    pre = corpus_mod.canonicalize(raw, stoplist if stop_first else None, plurals=False)
    canon = corpus_mod.equate_plurals(pre.word_counts())
    working = pre.map_tokens(lambda toks: [canon[t] for t in toks])
    vocab = corpus_mod.build_vocabulary(working, cfg.min_freq, cfg.filter_order, stoplist)
    m = matrix.build_word_document_matrix(working, vocab)
    return canon, vocab, m


@_stage("network")
def _coword(cfg: PipelineConfig, vocab, m):
    net = network.build_network(matrix.cosine_matrix(m), vocab.frequencies, cfg.tau)
    skipped = net.total_weight <= 0
    if skipped:
        logger.warning("no pair of words has cosine > %s: network fully isolated, Louvain skipped", cfg.tau)
        part = network.Partition(net.words, tuple(range(len(net))), 0.0)
        rerun = part
    else:
        part = network.louvain_partition(net)
        rerun = network.louvain_partition(net)
    return net, part, rerun, skipped


@_stage("factors")
def _factor_model(cfg: PipelineConfig, m):
    fm = factors.pca_varimax(factors.correlation_matrix(m), cfg.factors)
    scores = factors.factor_scores(m, fm)
    return fm, scores


@_stage("topics")
def _topic_model(cfg: PipelineConfig, raw, stoplist):
    surface = corpus_mod.canonicalize(raw, stoplist, plurals=False)
    return lda.fit_lda(surface, cfg.lda_config)


def _assoc(name: str, fn, *args):
    try:
        return fn(*args).to_dict()
    except UntestableError as exc:
        logger.warning("%s not testable: %s", name, exc)
        return None


@_stage("compare")
def _compare(cfg, canon, net, part, rerun, skipped, fm, scores, m, lm):
    k = cfg.top_k
    if k > len(lm.words):
        logger.warning("top_k %d exceeds the %d modelled words; listing all of them", k, len(lm.words))
        k = len(lm.words)
    lists = lda.top_words(lm, k)
    clusters = part.as_dict()
    alignment = compare.match_topic_words(lists, clusters, lm, canon)
    out: dict[str, dict | None] = {}
    if skipped:
        out["word_topic_vs_cluster"] = None
        out["word_topic_vs_cluster_instances"] = None
        out["cluster_vs_cluster_rerun"] = None
        out["cluster_vs_factor_words"] = None
    else:
        out["word_topic_vs_cluster"] = _assoc(
            "word-level association", compare.word_level_association, alignment, "unique")
        out["word_topic_vs_cluster_instances"] = _assoc(
            "instance-level association", compare.word_level_association, alignment, "instances")
        out["cluster_vs_cluster_rerun"] = _assoc(
            "Louvain rerun association", compare.associate, clusters, rerun.as_dict())
        word_factor = dict(zip(fm.words, (int(j) for j in np.argmax(np.abs(fm.loadings), axis=1))))
        out["cluster_vs_factor_words"] = _assoc(
            "cluster/factor association", compare.associate, clusters, word_factor)
    doc_factor = dict(zip(m.doc_ids, factors.dominant_factor(scores)))
    doc_topic = dict(zip(lm.doc_ids, lda.dominant_topics(lm)))
    common = [d for d in m.doc_ids if d in doc_topic]
    out["document_topic_vs_factor"] = _assoc(
        "document-level association", compare.document_level_association,
        [doc_topic[d] for d in common], [doc_factor[d] for d in common])
    return lists, alignment, out


def run_pipeline(cfg: PipelineConfig) -> Report:
    """Run every stage, write all exports into ``cfg.out`` and return the report.

    The co-word branch (matrix, network, factors) and the topic branch share
    one tokenized corpus and one stopword list. Errors surface as
    PipelineError naming the failing stage.
    """
    collector = _Collector()
    pkg_logger = logging.getLogger("cowordmap")
    pkg_logger.addHandler(collector)
    try:
        return _run(cfg, collector)
    finally:
        pkg_logger.removeHandler(collector)


def _run(cfg: PipelineConfig, collector: _Collector) -> Report:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PipelineError("output", exc) from exc

    raw, stoplist = _ingest(cfg)
    canon, vocab, m = build_working_set(cfg, raw, stoplist)
    net, part, rerun, skipped = _coword(cfg, vocab, m)
    fm, scores = _factor_model(cfg, m)
    lm = _topic_model(cfg, raw, stoplist)
    lists, alignment, assoc = _compare(cfg, canon, net, part, rerun, skipped, fm, scores, m, lm)

    files = _write_exports(cfg, out, m, net, part, fm, scores, lm, lists, assoc)
    files["report_json"] = "report.json"
    files["report_text"] = "report.txt"

    stats = corpus_mod.corpus_statistics(raw, stoplist)
    stats["vocabulary"] = len(vocab)
    stats["min_frequency"] = cfg.min_freq
    stats["filter_order"] = vocab.order
    stats["provenance"] = raw.provenance if cfg.input else "bundled:manifesto.txt"

    report = Report(
        corpus=stats,
        network={
            "threshold": cfg.tau,
            "nodes": len(net),
            "edges": len(net.edges),
            "isolates": network.isolate_count(net),
            "fully_isolated": skipped,
            "louvain_skipped": skipped,
            "communities": part.n_communities,
            "modularity": part.modularity_q,
            "modularity_history": list(part.history),
            "clusters": part.members(),
        },
        factors={
            "k": fm.k,
            "rotation": fm.rotation,
            "explained_variance": fm.explained_variance_fraction,
            "eigenvalues": [float(v) for v in fm.eigenvalues],
            "top_loadings": [[{"word": w, "loading": x} for w, x in col] for col in fm.top_loadings(5)],
        },
        topics={
            "T": lm.T,
            "alpha": float(lm.config.alpha),
            "beta": lm.config.beta,
            "sweeps": lm.config.sweeps,
            "seed": lm.config.seed,
            "top_words": [[{"word": w, "p": p} for w, p in lst] for lst in lists],
            "perplexity": lda.perplexity(lm),
            "dropped_documents": list(lm.dropped_docs),
        },
        alignment={
            "matched_words": len(alignment.matched),
            "matched_instances": len(alignment.instances),
            "matched": [{"word": w, "topic": t, "cluster": c} for w, t, c in alignment.matched],
            "unmatched_topic_words": list(alignment.unmatched_topic_words),
            "multi_topic_words": [
                {"word": w, "topics": list(ts), "assigned": best}
                for w, (ts, best) in sorted(alignment.multi_topic_words.items())
            ],
        },
        associations=assoc,
        files=files,
        warnings=list(collector.messages),
        provenance={
            "config_sha256": cfg.digest(),
            "seed": cfg.seed,
            "version": _version(),
            "config": {k: v for k, v in dataclasses.asdict(cfg).items() if k != "out"},
        },
    )
    for fmt in ("json", "text"):
        emit_report(report, out, fmt)
    return report


def _write_exports(cfg, out, m, net, part, fm, scores, lm, lists, assoc) -> dict[str, str]:
    files: dict[str, str] = {}
    try:
        matrix.write_matrix_csv(m, out / "matrix.csv")
        files["matrix"] = "matrix.csv"
        for kind, path in network.export_pajek(net, part, out / "network").items():
            files[f"pajek_{kind}"] = path.name
        compare.write_partition_csv(part, out / "partition.csv")
        files["partition"] = "partition.csv"

        with open(out / "loadings.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["word", *(f"component{j + 1}" for j in range(fm.k))])
            for word, row in zip(fm.words, fm.loadings):
                w.writerow([word, *(repr(float(x)) for x in row)])
        files["loadings"] = "loadings.csv"

        with open(out / "doc_topics.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["doc", *(f"topic{t}" for t in range(lm.T))])
            for doc_id, row in zip(lm.doc_ids, lm.theta):
                w.writerow([doc_id, *(repr(float(x)) for x in row)])
        files["doc_topics"] = "doc_topics.csv"

        (out / "topics.txt").write_text(format_topic_table(lists), encoding="utf-8")
        files["topics"] = "topics.txt"

        if cfg.svg:
            from .svgmap import emit_svg_map

            emit_svg_map(net, part, out / "map.svg", seed=cfg.seed)
            files["svg_map"] = "map.svg"
        if cfg.figures:
            from .figures import contingency_heatmap, scree_plot

            scree_plot(fm.all_eigenvalues, fm.k, out / "scree.png")
            files["scree_plot"] = "scree.png"
            word = assoc.get("word_topic_vs_cluster")
            if word is not None:
                contingency_heatmap(word["table"], word["row_labels"], word["col_labels"],
                                    out / "word_contingency.png", title="matched words: topic x cluster")
                files["word_contingency"] = "word_contingency.png"
    except OSError as exc:
        raise PipelineError("export", exc) from exc
    return files


# -- rendering ----------------------------------------------------------------

def format_topic_table(lists) -> str:
    """One line per topic: ``topicId | word word ...``."""
    lines = ["topicId | words"]
    for t, lst in enumerate(lists):
        lines.append(f"{t} | " + " ".join(w for w, _ in lst))
    return "\n".join(lines) + "\n"


def _fmt_assoc(name: str, a: dict | None) -> str:
    if a is None:
        return f"  {name}: not testable"
    return (f"  {name}: chi2 = {a['chi_square']:.3f}, df = {a['df']}, "
            f"p = {a['p_value']:.3f}, V = {a['cramers_v']:.3f}, n = {a['n']}")


def format_text(report: Report) -> str:
    c, n, f, t = report.corpus, report.network, report.factors, report.topics
    lines = [
        "Corpus",
        f"  documents                 {c['documents']}",
        f"  tokens                    {c['tokens']}",
        f"  unique words              {c['unique_words']}",
        f"  unique after stopwords    {c['unique_after_stopwords']}",
        f"  vocabulary (freq >= {c['min_frequency']})    {c['vocabulary']}",
        "",
        f"Co-word network (cosine > {n['threshold']})",
        f"  nodes {n['nodes']}, edges {n['edges']}, isolates {n['isolates']}, "
        f"communities {n['communities']}, Q = {n['modularity']:.3f}",
    ]
    if n["louvain_skipped"]:
        lines.append("  network fully isolated; clustering skipped")
    else:
        for i, members in enumerate(n["clusters"]):
            lines.append(f"  cluster {i}: {', '.join(members)}")
    lines += [
        "",
        f"Factor model ({f['k']} components, {f['rotation']})",
        f"  explained variance {100 * f['explained_variance']:.2f}%",
        "  component | top loadings",
    ]
    for j, col in enumerate(f["top_loadings"]):
        lines.append(f"  {j + 1} | " + " ".join(f"{e['word']} ({e['loading']:.3f})" for e in col))
    lines += [
        "",
        f"Topic model (T = {t['T']}, alpha = {t['alpha']:g}, beta = {t['beta']:g}, "
        f"{t['sweeps']} sweeps, seed {t['seed']})",
        f"  perplexity {t['perplexity']:.2f}",
    ]
    lines += ["  " + row for row in format_topic_table(
        [[(e["word"], e["p"]) for e in lst] for lst in t["top_words"]]).splitlines()]
    a = report.alignment
    lines += [
        "",
        f"Matched words: {a['matched_words']} unique, {a['matched_instances']} instances",
    ]
    for m in a["multi_topic_words"]:
        lines.append(f"  {m['word']} listed under topics {m['topics']}, assigned to {m['assigned']}")
    lines += ["", "Associations (Cramer's V)"]
    lines += [_fmt_assoc(k, v) for k, v in report.associations.items()]
    if report.warnings:
        lines += ["", "Warnings"] + [f"  {w}" for w in report.warnings]
    lines += ["", f"config sha256 {report.provenance['config_sha256']}  version {report.provenance['version']}"]
    return "\n".join(lines) + "\n"


def emit_report(report: Report, out_dir: str | Path, fmt: str = "json") -> Path:
    """Write ``report.json`` or ``report.txt`` into ``out_dir``."""
    out_dir = Path(out_dir)
    if fmt == "json":
        path, text = out_dir / "report.json", report.to_json()
    elif fmt == "text":
        path, text = out_dir / "report.txt", format_text(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path.write_text(text, encoding="utf-8")
    return path

"""Command-line interface: ``cowordmap <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import compare, corpus as corpus_mod, factors, lda, matrix, network
from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineError,
    build_working_set,
    format_text,
    format_topic_table,
    parse_config_text,
    run_pipeline,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

# shared flags that map one-to-one onto PipelineConfig fields
_SHARED = (
    "input", "split", "stopwords", "min_freq", "filter_order", "tau", "factors",
    "topics", "alpha", "beta", "sweeps", "seed", "top_k", "out",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _shared_parser() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("shared options")
    g.add_argument("--config", metavar="PATH", help="key = value config file; flags override its values")
    g.add_argument("--input", metavar="PATH", help="corpus file or directory (default: bundled Manifesto text)")
    g.add_argument("--split", choices=["paragraphs", "files"])
    g.add_argument("--stopwords", metavar="PATH")
    g.add_argument("--min-freq", type=int, metavar="N")
    g.add_argument("--filter-order", choices=["stop-first", "freq-first"])
    g.add_argument("--tau", type=float, metavar="FLOAT")
    g.add_argument("--factors", type=int, metavar="K")
    g.add_argument("--topics", type=int, metavar="T")
    g.add_argument("--alpha", type=float, metavar="F")
    g.add_argument("--beta", type=float, metavar="F")
    g.add_argument("--sweeps", type=int, metavar="N")
    g.add_argument("--seed", type=int, metavar="N")
    g.add_argument("--top-k", type=int, metavar="N")
    g.add_argument("--out", metavar="DIR")
    g.add_argument("--format", choices=["json", "text"], default="text")
    g.add_argument("-v", "--verbose", action="store_true")
    g.add_argument("-q", "--quiet", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_parser()
    parser = _Parser(prog="cowordmap", description="Co-word maps, topic models and their statistical comparison.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    sub.add_parser("ingest", parents=[shared], help="load a corpus and print its statistics")
    sub.add_parser("matrix", parents=[shared], help="build the vocabulary and word/document matrix")
    p = sub.add_parser("network", parents=[shared], help="threshold cosines, cluster with Louvain, export maps")
    p.add_argument("--matrix", metavar="CSV", help="start from a saved word/document matrix instead of a corpus")
    p = sub.add_parser("factors", parents=[shared], help="principal components with varimax rotation")
    p.add_argument("--matrix", metavar="CSV", help="start from a saved word/document matrix instead of a corpus")
    sub.add_parser("topics", parents=[shared], help="fit an LDA topic model")
    p = sub.add_parser("compare", parents=[shared], help="Cramer's V between two word clusterings")
    p.add_argument("--a", required=True, metavar="PATH", help="partition CSV (word,cluster) or Pajek .clu")
    p.add_argument("--b", required=True, metavar="PATH", help="partition CSV (word,cluster) or Pajek .clu")
    p.add_argument("--net", metavar="PATH", help="Pajek .net naming the vertices of .clu inputs")
    sub.add_parser("pipeline", parents=[shared], help="run everything and write the full report")
    p = sub.add_parser("synth", parents=[shared], help="write a synthetic block-structured corpus")
    p.add_argument("--docs", type=int, default=200)
    p.add_argument("--doc-length", type=int, default=80)
    p.add_argument("--block-size", type=int, default=20)
    return parser


def resolve_config(args: argparse.Namespace) -> tuple[PipelineConfig, bool]:
    """Defaults, then the config file, then explicit flags. Also reports whether ``out`` was set."""
    values: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values.update(parse_config_text(text))
    out_given = "out" in values
    for name in _SHARED:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    out_given = out_given or args.out is not None
    return PipelineConfig.from_mapping(values), out_given


def _emit(payload, text: str, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _outdir(cfg: PipelineConfig, out_given: bool) -> Path | None:
    if not out_given:
        return None
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(cfg: PipelineConfig):
    raw = corpus_mod.load_corpus(cfg.input or corpus_mod.bundled_path("manifesto.txt"), cfg.split)
    return raw, corpus_mod.load_stopwords(cfg.stopwords)


def _matrix(cfg: PipelineConfig, matrix_csv: str | None = None):
    if matrix_csv:
        m = matrix.read_matrix_csv(matrix_csv)
        return m, m.column_sums()
    raw, stoplist = _load(cfg)
    _, vocab, m = build_working_set(cfg, raw, stoplist)
    return m, vocab.frequencies


def cmd_ingest(cfg, out, fmt, args) -> int:
    raw, stoplist = _load(cfg)
    stats = corpus_mod.corpus_statistics(raw, stoplist)
    if out:
        (out / "corpus_stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    _emit(stats, "\n".join(f"{k:<24}{v}" for k, v in stats.items()), fmt)
    return EXIT_OK


def cmd_matrix(cfg, out, fmt, args) -> int:
    m, freqs = _matrix(cfg)
    if out:
        matrix.write_matrix_csv(m, out / "matrix.csv")
    info = {"documents": m.shape[0], "words": m.shape[1], "frequencies": freqs}
    text = f"{m.shape[0]} documents x {m.shape[1]} words\n" + "\n".join(f"  {w} {f}" for w, f in freqs.items())
    _emit(info, text, fmt)
    return EXIT_OK


def cmd_network(cfg, out, fmt, args) -> int:
    m, freqs = _matrix(cfg, args.matrix)
    net = network.build_network(matrix.cosine_matrix(m), freqs, cfg.tau)
    part = network.louvain_partition(net)
    if out:
        network.export_pajek(net, part, out / "network")
        compare.write_partition_csv(part, out / "partition.csv")
        from .svgmap import emit_svg_map

        emit_svg_map(net, part, out / "map.svg", seed=cfg.seed)
    info = {
        "threshold": cfg.tau, "nodes": len(net), "edges": len(net.edges),
        "isolates": network.isolate_count(net), "communities": part.n_communities,
        "modularity": part.modularity_q, "clusters": part.members(),
    }
    text = (f"cosine > {cfg.tau}: {len(net)} nodes, {len(net.edges)} edges, "
            f"{info['isolates']} isolates, {part.n_communities} communities, Q = {part.modularity_q:.3f}\n"
            + "\n".join(f"  cluster {i}: {', '.join(g)}" for i, g in enumerate(part.members())))
    _emit(info, text, fmt)
    return EXIT_OK


def cmd_factors(cfg, out, fmt, args) -> int:
    m, _ = _matrix(cfg, args.matrix)
    fm = factors.pca_varimax(factors.correlation_matrix(m), cfg.factors)
    if out:
        with open(out / "loadings.csv", "w", encoding="utf-8") as fh:
            fh.write("word," + ",".join(f"component{j + 1}" for j in range(fm.k)) + "\n")
            for w, row in zip(fm.words, fm.loadings):
                fh.write(w + "," + ",".join(repr(float(x)) for x in row) + "\n")
        from .figures import scree_plot

        scree_plot(fm.all_eigenvalues, fm.k, out / "scree.png")
    tops = fm.top_loadings(5)
    info = {
        "k": fm.k, "explained_variance": fm.explained_variance_fraction,
        "eigenvalues": [float(v) for v in fm.eigenvalues],
        "top_loadings": [[{"word": w, "loading": x} for w, x in col] for col in tops],
    }
    text = (f"explained variance {100 * fm.explained_variance_fraction:.2f}%\ncomponent | top loadings\n"
            + "\n".join(f"{j + 1} | " + " ".join(f"{w} ({x:.3f})" for w, x in col) for j, col in enumerate(tops)))
    _emit(info, text, fmt)
    return EXIT_OK


def cmd_topics(cfg, out, fmt, args) -> int:
    raw, stoplist = _load(cfg)
    lm = lda.fit_lda(corpus_mod.canonicalize(raw, stoplist, plurals=False), cfg.lda_config)
    lists = lda.top_words(lm, min(cfg.top_k, len(lm.words)))
    table = format_topic_table(lists)
    if out:
        (out / "topics.txt").write_text(table, encoding="utf-8")
        with open(out / "doc_topics.csv", "w", encoding="utf-8") as fh:
            fh.write("doc," + ",".join(f"topic{t}" for t in range(lm.T)) + "\n")
            for d, row in zip(lm.doc_ids, lm.theta):
                fh.write(d + "," + ",".join(repr(float(x)) for x in row) + "\n")
    info = {"T": lm.T, "perplexity": lda.perplexity(lm),
            "top_words": [[{"word": w, "p": p} for w, p in lst] for lst in lists]}
    _emit(info, f"perplexity {info['perplexity']:.2f}\n{table}", fmt)
    return EXIT_OK


def cmd_compare(cfg, out, fmt, args) -> int:
    a = compare.import_partition(args.a, args.net)
    b = compare.import_partition(args.b, args.net)
    result = compare.associate(a.as_dict(), b.as_dict())
    d = result.to_dict()
    if out:
        (out / "association.json").write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")
    text = (f"chi2 = {d['chi_square']:.3f}, df = {d['df']}, p = {d['p_value']:.3f}, "
            f"V = {d['cramers_v']:.3f}, n = {d['n']}")
    _emit(d, text, fmt)
    return EXIT_OK


def cmd_pipeline(cfg, out, fmt, args) -> int:
    report = run_pipeline(cfg)
    if fmt == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(format_text(report))
    return EXIT_OK


def cmd_synth(cfg, out, fmt, args) -> int:
    corpus, theta = corpus_mod.generate_synthetic_corpus(
        cfg.topics, args.docs, args.doc_length, args.block_size, seed=cfg.seed)
    out = out or Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_corpus(corpus, out / "corpus.txt")
    np.savetxt(out / "theta.csv", theta, delimiter=",", fmt="%.17g")
    info = {"documents": len(corpus), "tokens": corpus.token_count(), "corpus": str(out / "corpus.txt")}
    _emit(info, f"wrote {len(corpus)} documents to {out / 'corpus.txt'}", fmt)
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest, "matrix": cmd_matrix, "network": cmd_network, "factors": cmd_factors,
    "topics": cmd_topics, "compare": cmd_compare, "pipeline": cmd_pipeline, "synth": cmd_synth,
}


def _exit_code(exc: BaseException) -> int:
    chain = exc
    while chain is not None:
        if isinstance(chain, factors.ConvergenceError):
            return EXIT_CONVERGENCE
        chain = chain.__cause__
    return EXIT_DATA


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        cfg, out_given = resolve_config(args)
        if args.command == "pipeline":
            out = None
        else:
            out = _outdir(cfg, out_given)
    except (UsageError, ConfigError) as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cowordmap: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        return COMMANDS[args.command](cfg, out, args.format, args)
    except (PipelineError, factors.ConvergenceError, ValueError, OSError) as exc:
        print(f"cowordmap {args.command}: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())

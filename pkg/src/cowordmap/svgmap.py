"""Static SVG rendering of a clustered co-word map."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import networkx as nx
import numpy as np

from .network import CowordNetwork, NetworkError, Partition, node_sizes

# colour-blind friendly qualitative palette; cycles past 12 communities
PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
)

CELL = 240.0  # side of the square cell given to one connected component
MARGIN = 40.0
RADIUS_UNIT = 4.0


def _components(net: CowordNetwork) -> list[list[int]]:
    g = nx.Graph()
    g.add_nodes_from(range(len(net)))
    g.add_edges_from((u, v) for u, v, _ in net.edges)
    comps = [sorted(c) for c in nx.connected_components(g)]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def _grid(n_cells: int) -> tuple[int, int]:
    cols = max(1, math.ceil(math.sqrt(n_cells)))
    return cols, math.ceil(n_cells / cols)


def layout(net: CowordNetwork, seed: int = 0) -> np.ndarray:
    """Node coordinates in SVG user units.

    Every connected component gets a force-directed (Fruchterman-Reingold)
    layout of its own inside a square cell, and cells are packed row by row,
    largest component first. Components therefore never overlap, and the
    result depends only on the network and ``seed``.
    """
    n = len(net)
    if n == 0:
        raise NetworkError("cannot lay out an empty network")
    comps = _components(net)
    per_row, _ = _grid(len(comps))
    pos = np.zeros((n, 2))
    inner = CELL / 2 - MARGIN
    for idx, comp in enumerate(comps):
        cx = MARGIN + (idx % per_row) * CELL + CELL / 2
        cy = MARGIN + (idx // per_row) * CELL + CELL / 2
        if len(comp) == 1:
            pos[comp[0]] = (cx, cy)
            continue
        g = nx.Graph()
        g.add_nodes_from(comp)
        g.add_weighted_edges_from((u, v, w) for u, v, w in net.edges if u in g and v in g)
        xy = nx.spring_layout(g, seed=seed, weight="weight", center=(0.0, 0.0), scale=1.0)
        for node in comp:
            pos[node] = (cx + xy[node][0] * inner, cy + xy[node][1] * inner)
    return pos


def render_svg(net: CowordNetwork, partition: Partition | None = None, seed: int = 0) -> str:
    """SVG document text: circles sized 1 + ln f, coloured by community, labelled by word."""
    if partition is not None and tuple(partition.nodes) != tuple(net.words):
        raise NetworkError("partition does not match the network nodes")
    pos = layout(net, seed)
    comm = partition.assignment if partition is not None else (0,) * len(net)
    radii = [RADIUS_UNIT * s for s in node_sizes(net.frequencies)]
    cols, rows = _grid(len(_components(net)))
    width, height = 2 * MARGIN + cols * CELL, 2 * MARGIN + rows * CELL
    top = max((w for _, _, w in net.edges), default=1.0)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g class="edges" stroke="#999999" stroke-opacity="0.6">',
    ]
    for u, v, w in net.edges:
        out.append(
            f'<line x1="{pos[u, 0]:.2f}" y1="{pos[u, 1]:.2f}" x2="{pos[v, 0]:.2f}" y2="{pos[v, 1]:.2f}" '
            f'stroke-width="{0.5 + 2.5 * w / top:.2f}"/>'
        )
    out.append("</g>")
    out.append('<g class="nodes">')
    for i, word in enumerate(net.words):
        colour = PALETTE[comm[i] % len(PALETTE)]
        x, y, r = pos[i, 0], pos[i, 1], radii[i]
        out.append(
            f'<g class="node" data-word={quoteattr(word)} data-community="{comm[i]}">'
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{colour}" stroke="#333333" stroke-width="0.5"/>'
            f'<text x="{x:.2f}" y="{y - r - 2:.2f}" font-size="10" text-anchor="middle">{escape(word)}</text>'
            "</g>"
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_map(net: CowordNetwork, partition: Partition | None, path: str | Path, seed: int = 0) -> Path:
    path = Path(path)
    path.write_text(render_svg(net, partition, seed), encoding="utf-8")
    return path

"""Thresholded co-word networks, modularity, Louvain clustering and map-file export."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .matrix import SimilarityMatrix

logger = logging.getLogger(__name__)

# relative slack below which a modularity gain counts as a tie
_GAIN_EPS = 1e-12


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class CowordNetwork:
    """Undirected weighted word graph stored as a dense symmetric adjacency matrix."""

    words: tuple[str, ...]
    frequencies: tuple[int, ...]
    adjacency: np.ndarray
    threshold: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=np.float64)
        n = len(self.words)
        if a.shape != (n, n):
            raise NetworkError(f"adjacency shape {a.shape} does not match {n} nodes")
        if len(self.frequencies) != n:
            raise NetworkError("one frequency per node required")
        if np.any(np.diag(a) != 0):
            raise NetworkError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise NetworkError("adjacency must be symmetric")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    def __len__(self) -> int:
        return len(self.words)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(iu, ju)]

    @property
    def total_weight(self) -> float:
        return float(np.triu(self.adjacency, 1).sum())

    def degrees(self) -> np.ndarray:
        return (self.adjacency > 0).sum(axis=1)

    @classmethod
    def from_edges(cls, n: int, edges, words=None, frequencies=None, threshold=0.0) -> "CowordNetwork":
        """Convenience constructor from ``(u, v[, w])`` tuples over nodes ``0..n-1``."""
        a = np.zeros((n, n))
        for e in edges:
            u, v = e[0], e[1]
            w = e[2] if len(e) > 2 else 1.0
            if u == v:
                raise NetworkError("self-loops are not allowed")
            a[u, v] = a[v, u] = w
        words = tuple(words) if words is not None else tuple(f"n{i}" for i in range(n))
        frequencies = tuple(frequencies) if frequencies is not None else (1,) * n
        return cls(words, frequencies, a, threshold)


@dataclass(frozen=True)
class Partition:
    """Node-to-community labeling; ``assignment[i]`` is the community of node ``i``."""

    nodes: tuple[str, ...]
    assignment: tuple[int, ...]
    modularity_q: float = 0.0
    # modularity after each local-move pass and aggregation, for diagnostics
    history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.nodes) != len(self.assignment):
            raise NetworkError("one community id per node required")
        if self.assignment and set(self.assignment) != set(range(max(self.assignment) + 1)):
            raise NetworkError("community ids must be contiguous from 0")

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment))

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.nodes, self.assignment))

    def members(self) -> list[list[str]]:
        groups: list[list[str]] = [[] for _ in range(self.n_communities)]
        for node, c in zip(self.nodes, self.assignment):
            groups[c].append(node)
        return groups


def relabel(assignment: Sequence) -> tuple[int, ...]:
    """Renumber labels 0, 1, ... in order of first appearance."""
    seen: dict = {}
    return tuple(seen.setdefault(c, len(seen)) for c in assignment)


def build_network(sim: SimilarityMatrix, freqs: Mapping[str, int] | Sequence[int], threshold: float) -> CowordNetwork:
    """Keep an edge between two distinct words iff their cosine is strictly above ``threshold``."""
    if not 0.0 <= threshold < 1.0:
        raise NetworkError(f"threshold must be in [0, 1), got {threshold}")
    values = np.asarray(sim.values, dtype=np.float64)
    a = np.where(values > threshold, values, 0.0)
    np.fill_diagonal(a, 0.0)
    if isinstance(freqs, Mapping):
        f = tuple(int(freqs[w]) for w in sim.words)
    else:
        f = tuple(int(x) for x in freqs)
    return CowordNetwork(tuple(sim.words), f, a, threshold)


def isolate_count(net: CowordNetwork) -> int:
    return int((net.degrees() == 0).sum())


def _modularity(a: np.ndarray, assignment: Sequence[int]) -> float:
    k = a.sum(axis=1)
    m2 = float(k.sum())
    if m2 <= 0:
        raise NetworkError("modularity is undefined for a graph with zero total edge weight")
    labels = np.asarray(assignment)
    q = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        inner = float(a[np.ix_(idx, idx)].sum())
        tot = float(k[idx].sum())
        q += inner / m2 - (tot / m2) ** 2
    return q


def modularity(net: CowordNetwork, assignment: Partition | Sequence[int]) -> float:
    """Weighted Newman-Girvan modularity of a node labeling.

    Q = (1/2m) * sum_ij [A_ij - k_i k_j / 2m] * delta(c_i, c_j).
    """
    if isinstance(assignment, Partition):
        assignment = assignment.assignment
    if len(assignment) != len(net):
        raise NetworkError("assignment must cover every node")
    return _modularity(net.adjacency, assignment)


def _local_moves(a: np.ndarray, k: np.ndarray, m2: float, comm: np.ndarray) -> bool:
    """Sweep nodes in ascending order until no move improves modularity.

    Each node goes to the neighbouring community with the largest strictly
    positive gain over staying; equal gains keep the current community, and
    among other candidates the lowest community id wins.
    """
    n = len(k)
    tot = np.zeros(n)
    np.add.at(tot, comm, k)
    neighbours = [np.flatnonzero(a[i]) for i in range(n)]
    moved_any = False
    scale = max(m2, 1.0)
    while True:
        moved = False
        for i in range(n):
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j in neighbours[i]:
                if j != i:
                    links[comm[j]] = links.get(comm[j], 0.0) + a[i, j]
            tot[ci] -= ki
            best, best_gain = ci, links.get(ci, 0.0) - tot[ci] * ki / m2
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - tot[c] * ki / m2
                if gain > best_gain + _GAIN_EPS * scale:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved = True
        if not moved:
            return moved_any
        moved_any = True


def louvain_partition(net: CowordNetwork) -> Partition:
    """Two-phase Louvain modularity maximization with a deterministic sweep order.

    Phase one moves single nodes (ascending id) between communities; phase two
    collapses communities into super-nodes. The two alternate until a pass
    moves nothing. An edgeless graph yields the singleton partition with Q = 0.
    """
    n = len(net)
    if n == 0:
        raise NetworkError("empty network")
    if net.total_weight <= 0:
        logger.warning("edgeless network: returning singleton partition with Q = 0")
        return Partition(net.words, tuple(range(n)), 0.0)

    a = net.adjacency.copy()
    node_comm = np.arange(n)
    history = [_modularity(net.adjacency, node_comm)]
    while True:
        k = a.sum(axis=1)
        m2 = float(k.sum())
        comm = np.arange(len(k))
        if not _local_moves(a, k, m2, comm):
            break
        labels = np.array(relabel(comm))
        node_comm = labels[node_comm]
        history.append(_modularity(net.adjacency, node_comm))
        n_comm = labels.max() + 1
        if n_comm == len(k):
            break
        member = np.zeros((len(k), n_comm))
        member[np.arange(len(k)), labels] = 1.0
        a = member.T @ a @ member

    assignment = relabel(node_comm)
    q = modularity(net, assignment)
    return Partition(net.words, assignment, q, tuple(history))


def node_sizes(frequencies: Sequence[int]) -> list[float]:
    """Map size 1 + ln(f), so a word seen once still has size 1."""
    return [1.0 + math.log(f) if f > 0 else 1.0 for f in frequencies]


def _fmt(w: float) -> str:
    # shortest repr that round-trips; integral weights print without a decimal tail
    return repr(int(w)) if float(w).is_integer() else repr(float(w))


def export_pajek(
    net: CowordNetwork,
    partition: Partition | None,
    stem: str | Path,
    sizes: Sequence[float] | None = None,
) -> dict[str, Path]:
    """Write ``stem.net`` (plus ``.clu`` and ``.vec`` when available); returns the paths."""
    stem = Path(stem)
    n = len(net)
    paths = {"net": stem.with_suffix(".net")}
    lines = [f"*Vertices {n}"]
    lines += [f'{i + 1} "{w}"' for i, w in enumerate(net.words)]
    lines.append("*Edges")
    lines += [f"{u + 1} {v + 1} {_fmt(w)}" for u, v, w in net.edges]
    paths["net"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    if partition is not None:
        if partition.nodes != net.words:
            raise NetworkError("partition does not match the network nodes")
        paths["clu"] = stem.with_suffix(".clu")
        body = [f"*Vertices {n}", *(str(c + 1) for c in partition.assignment)]
        paths["clu"].write_text("\n".join(body) + "\n", encoding="utf-8")

    if sizes is None:
        sizes = node_sizes(net.frequencies)
    paths["vec"] = stem.with_suffix(".vec")
    body = [f"*Vertices {n}", *(f"{s:.6f}" for s in sizes)]
    paths["vec"].write_text("\n".join(body) + "\n", encoding="utf-8")
    return paths


def read_pajek_net(path: str | Path) -> CowordNetwork:
    """Parse a Pajek ``.net`` file with ``*Vertices`` and ``*Edges``/``*Arcs`` sections."""
    words: list[str] = []
    edges: list[tuple[int, int, float]] = []
    n = None
    section = None
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("*"):
            head = line.split()
            section = head[0].lower()
            if section == "*vertices":
                n = int(head[1])
            continue
        if section == "*vertices":
            idx, _, rest = line.partition(" ")
            rest = rest.strip()
            label = rest[1:rest.index('"', 1)] if rest.startswith('"') else rest.split()[0]
            if int(idx) != len(words) + 1:
                raise NetworkError(f"{path}:{lineno}: vertex numbers must be sequential")
            words.append(label)
        elif section in ("*edges", "*arcs"):
            parts = line.split()
            w = float(parts[2]) if len(parts) > 2 else 1.0
            edges.append((int(parts[0]) - 1, int(parts[1]) - 1, w))
        else:
            raise NetworkError(f"{path}:{lineno}: unexpected line {line!r}")
    if n is None or n != len(words):
        raise NetworkError(f"{path}: vertex count does not match *Vertices header")
    return CowordNetwork.from_edges(n, edges, words=words)


def read_pajek_vector(path: str | Path, cast=float) -> list:
    """Read a ``.clu`` or ``.vec`` file into a list of values."""
    lines = [l.strip() for l in Path(path).read_text("utf-8").splitlines() if l.strip()]
    if not lines or not lines[0].lower().startswith("*vertices"):
        raise NetworkError(f"{path}: missing *Vertices header")
    n = int(lines[0].split()[1])
    values = [cast(v) for v in lines[1:]]
    if len(values) != n:
        raise NetworkError(f"{path}: expected {n} values, found {len(values)}")
    return values


def export_graphml(net: CowordNetwork, partition: Partition | None, path: str | Path) -> Path:
    import networkx as nx

    g = nx.Graph()
    sizes = node_sizes(net.frequencies)
    for i, w in enumerate(net.words):
        attrs = {"frequency": int(net.frequencies[i]), "size": float(sizes[i])}
        if partition is not None:
            attrs["community"] = int(partition.assignment[i])
        g.add_node(w, **attrs)
    for u, v, wt in net.edges:
        g.add_edge(net.words[u], net.words[v], weight=wt)
    nx.write_graphml(g, path)
    return Path(path)

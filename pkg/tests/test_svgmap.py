from __future__ import annotations

import xml.etree.ElementTree as ET

import pytest

from cowordmap.network import CowordNetwork, NetworkError, Partition
from cowordmap.svgmap import emit_svg_map, render_svg

NS = {"svg": "http://www.w3.org/2000/svg"}


def _nodes(svg_text):
    root = ET.fromstring(svg_text)
    out = {}
    for g in root.iterfind(".//svg:g[@class='node']", NS):
        c = g.find("svg:circle", NS)
        x, y, r = (float(c.get(k)) for k in ("cx", "cy", "r"))
        out[g.get("data-word")] = (x, y, r, c.get("fill"), int(g.get("data-community")))
    return root, out


def test_single_node_graph():
    net = CowordNetwork.from_edges(1, [], words=["solo"], frequencies=[3])
    root, nodes = _nodes(render_svg(net))
    assert list(nodes) == ["solo"]
    x, y, _, _, _ = nodes["solo"]
    assert 0 < x < float(root.get("width")) and 0 < y < float(root.get("height"))


def test_same_seed_is_byte_identical(tmp_path):
    net = CowordNetwork.from_edges(5, [(0, 1, 0.5), (1, 2, 0.3), (3, 4, 0.9)])
    a = emit_svg_map(net, None, tmp_path / "a.svg", seed=3).read_bytes()
    b = emit_svg_map(net, None, tmp_path / "b.svg", seed=3).read_bytes()
    assert a == b


def test_disjoint_triangles_are_separated_and_coloured():
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    net = CowordNetwork.from_edges(6, edges, words=list("abcdef"), frequencies=[1, 2, 3, 4, 5, 6])
    part = Partition(net.words, (0, 0, 0, 1, 1, 1))
    _, nodes = _nodes(render_svg(net, part, seed=0))

    def box(words):
        pts = [nodes[w] for w in words]
        return (min(x - r for x, _, r, _, _ in pts), min(y - r for _, y, r, _, _ in pts),
                max(x + r for x, _, r, _, _ in pts), max(y + r for _, y, r, _, _ in pts))

    b1, b2 = box("abc"), box("def")
    overlap = not (b1[2] < b2[0] or b2[2] < b1[0] or b1[3] < b2[1] or b2[3] < b1[1])
    assert not overlap
    assert {nodes[w][3] for w in "abc"} != {nodes[w][3] for w in "def"}
    assert len({nodes[w][3] for w in "abc"}) == 1
    # radius grows with frequency
    assert nodes["f"][2] > nodes["a"][2]


def test_words_are_escaped():
    net = CowordNetwork.from_edges(2, [(0, 1)], words=['a<b', 'c"d'])
    _, nodes = _nodes(render_svg(net))
    assert set(nodes) == {'a<b', 'c"d'}


def test_partition_must_match():
    net = CowordNetwork.from_edges(2, [(0, 1)])
    with pytest.raises(NetworkError):
        render_svg(net, Partition(("x", "y"), (0, 1)))

"""Pajek .net export of homogeneity graphs (layout is left to Pajek)."""

from __future__ import annotations

from ..inference import ComparisonGraph


def pajek_lines(graph: ComparisonGraph) -> list[str]:
    labels = sorted(graph.nodes)
    if not labels:
        raise ValueError("cannot write an empty graph")
    ids = {label: i for i, label in enumerate(labels, start=1)}
    lines = [f"*Vertices {len(labels)}"]
    # Pajek has no escape for quotes inside labels
    lines += [f'{ids[v]} "{v.replace(chr(34), chr(39))}"' for v in labels]
    lines.append("*Edges")
    pairs = sorted(tuple(sorted((ids[a], ids[b]))) for a, b in graph.edges)
    lines += [f"{a} {b}" for a, b in pairs]
    return lines


def emit_pajek(graph: ComparisonGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(pajek_lines(graph)) + "\n")

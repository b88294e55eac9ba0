"""Attention matrix export: text dump format, PGM image, ASCII art."""

from __future__ import annotations

import numpy as np

_SHADES = " .:-=+*#%@"


def write_attention_dump(fh, entries):
    """One block per sentence: index, source/target tokens, matrix rows."""
    for idx, (src_tokens, trg_tokens, matrix) in enumerate(entries):
        fh.write(f"# sentence {idx}\n")
        fh.write("# src: " + " ".join(src_tokens) + "\n")
        fh.write("# trg: " + " ".join(trg_tokens) + "\n")
        for row in np.asarray(matrix):
            fh.write(" ".join(f"{x:.6f}" for x in row) + "\n")
        fh.write("\n")


def read_attention_dump(path):
    """Inverse of write_attention_dump; returns the list of entries."""
    entries = []
    src = trg = None
    rows = []

    def flush():
        if src is None:
            return
        matrix = np.array(rows, dtype=float) if rows \
            else np.zeros((0, len(src)))
        entries.append((src, trg, matrix))

    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# sentence"):
                flush()
                src = trg = None
                rows = []
            elif line.startswith("# src: "):
                src = line[len("# src: "):].split()
            elif line.startswith("# trg: "):
                trg = line[len("# trg: "):].split()
            elif line.strip():
                rows.append([float(x) for x in line.split()])
    flush()
    return entries


def render_pgm(matrix, cell=8):
    """Plain (P2) portable graymap; the matrix maximum maps to white."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("render_pgm: need a non-empty 2-D matrix")
    peak = m.max()
    scaled = np.zeros_like(m) if peak <= 0 else m / peak
    pixels = np.rint(scaled * 255).astype(int)
    pixels = np.repeat(np.repeat(pixels, cell, axis=0), cell, axis=1)
    lines = ["P2", f"{pixels.shape[1]} {pixels.shape[0]}", "255"]
    for row in pixels:
        lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def render_ascii(matrix, src_tokens, trg_tokens):
    """Shaded character grid, source across the top, targets per row."""
    m = np.asarray(matrix, dtype=float)
    width = max([len(t) for t in trg_tokens], default=0)
    out = []
    header = " " * (width + 1) + " ".join(t[0] for t in src_tokens)
    out.append(header)
    peak = m.max() if m.size else 0.0
    for i, trg in enumerate(trg_tokens):
        cells = []
        for j in range(len(src_tokens)):
            value = m[i, j] / peak if peak > 0 else 0.0
            shade = _SHADES[min(int(value * len(_SHADES)), len(_SHADES) - 1)]
            cells.append(shade)
        out.append(f"{trg:>{width}} " + " ".join(cells))
    legend = "columns: " + " ".join(src_tokens)
    out.append(legend)
    return "\n".join(out) + "\n"

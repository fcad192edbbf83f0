"""Dataset directories, feature normalization and synthetic SBM graphs.

On-disk layout of a dataset directory::

    nodes.tsv   node_id <TAB> label <TAB> features
    edges.tsv   src <TAB> dst
    meta.tsv    key <TAB> value     (optional expected counts)

Features are either dense (``0 1.5 0 ...``) or sparse (``3:1 17:0.5``); a
file may mix both per row, but sparse rows need a known width, taken from the
widest dense row or from ``num_features`` in ``meta.tsv``. Node ids must be
contiguous ``0..n-1``. Edges are undirected. Lines starting with ``#`` and
blank lines are skipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import Graph, build_graph, connected_components
from .rng import generator

log = logging.getLogger(__name__)

META_KEYS = ("num_nodes", "num_edges", "num_components", "num_classes", "num_features")


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    class_names: list[str]
    name: str
    raw_edges: np.ndarray  # edge rows as read, before dedup and symmetrization

    @property
    def raw_edge_count(self) -> int:
        return int(self.raw_edges.shape[0])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def summary(self) -> dict[str, int]:
        """Counts in the order nodes / edges / components / classes / features.

        ``num_edges`` is the raw row count of ``edges.tsv``; the deduplicated
        undirected count is ``num_undirected_edges``.
        """
        return {
            "num_nodes": self.graph.num_nodes,
            "num_edges": self.raw_edge_count,
            "num_undirected_edges": self.graph.num_edges,
            "num_components": connected_components(self.graph).num_components,
            "num_classes": self.num_classes,
            "num_features": int(self.features.shape[1]),
        }


def _data_lines(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _read_meta(path: Path) -> dict[str, int]:
    meta = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'key<TAB>value'")
        key, value = parts[0].strip(), parts[1].strip()
        try:
            meta[key] = int(value)
        except ValueError:
            raise DataError(f"{path}:{lineno}: value for {key!r} is not an integer") from None
    return meta


def _parse_features(path: Path, lineno: int, text: str):
    tokens = text.split()
    # an empty field is an all-zero sparse row
    if not tokens or any(":" in t for t in tokens):
        entries = {}
        for t in tokens:
            idx, sep, val = t.partition(":")
            try:
                entries[int(idx)] = float(val)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad sparse feature token {t!r}") from None
            if not sep or int(idx) < 0:
                raise DataError(f"{path}:{lineno}: bad sparse feature token {t!r}")
        return entries
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-numeric dense feature value") from None


def load_dataset(dir_path, *, validate_meta: bool = True) -> DatasetBundle:
    """Load a dataset directory; errors name the offending file and line."""
    root = Path(dir_path)
    nodes_path, edges_path, meta_path = root / "nodes.tsv", root / "edges.tsv", root / "meta.tsv"
    for p in (nodes_path, edges_path):
        if not p.is_file():
            raise DataError(f"missing dataset file: {p}")
    meta = _read_meta(meta_path) if meta_path.is_file() else {}

    label_strings: list[str] = []
    rows = []
    dense_width = None
    for lineno, line in _data_lines(nodes_path):
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"{nodes_path}:{lineno}: expected 'node_id<TAB>label<TAB>features'")
        try:
            node_id = int(parts[0])
        except ValueError:
            raise DataError(f"{nodes_path}:{lineno}: node id {parts[0]!r} is not an integer") from None
        if node_id != len(rows):
            raise DataError(
                f"{nodes_path}:{lineno}: node id {node_id} out of sequence (expected {len(rows)})"
            )
        label = parts[1].strip()
        if not label:
            raise DataError(f"{nodes_path}:{lineno}: empty label")
        feats = _parse_features(nodes_path, lineno, parts[2] if len(parts) > 2 else "")
        if isinstance(feats, list):
            if dense_width is None:
                dense_width = len(feats)
            elif len(feats) != dense_width:
                raise DataError(
                    f"{nodes_path}:{lineno}: ragged feature row ({len(feats)} values, expected {dense_width})"
                )
        label_strings.append(label)
        rows.append((lineno, feats))

    n = len(rows)
    max_sparse = max(
        (max(f) + 1 for _, f in rows if isinstance(f, dict) and f), default=0
    )
    width = meta.get("num_features", dense_width if dense_width is not None else max_sparse)
    if max_sparse > width or (dense_width is not None and dense_width != width):
        raise DataError(
            f"{nodes_path}: feature width {width} conflicts with rows "
            f"(dense width {dense_width}, max sparse index {max_sparse - 1})"
        )
    features = np.zeros((n, width))
    for i, (lineno, f) in enumerate(rows):
        if isinstance(f, dict):
            for j, v in f.items():
                features[i, j] = v
        else:
            features[i] = f
        if not np.all(np.isfinite(features[i])):
            raise DataError(f"{nodes_path}:{lineno}: non-finite feature value")

    class_names = sorted(set(label_strings))
    index = {name: k for k, name in enumerate(class_names)}
    labels = np.array([index[s] for s in label_strings], dtype=np.int64)

    edges = []
    for lineno, line in _data_lines(edges_path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(
                f"{edges_path}:{lineno}: expected 'src<TAB>dst' (weighted edges are not supported)"
            )
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(f"{edges_path}:{lineno}: non-integer endpoint") from None
        if not (0 <= u < n and 0 <= v < n):
            raise DataError(f"{edges_path}:{lineno}: dangling edge endpoint ({u}, {v}) for {n} nodes")
        edges.append((u, v))

    raw_edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    bundle = DatasetBundle(
        graph=build_graph(raw_edges, n),
        features=features,
        labels=labels,
        class_names=class_names,
        name=root.name,
        raw_edges=raw_edges,
    )
    if validate_meta and meta:
        check_counts(bundle, meta)
    s = bundle.summary()
    log.info(
        "%s: nodes=%d edges=%d (undirected %d) components=%d classes=%d features=%d",
        bundle.name,
        s["num_nodes"],
        s["num_edges"],
        s["num_undirected_edges"],
        s["num_components"],
        s["num_classes"],
        s["num_features"],
    )
    return bundle


def check_counts(bundle: DatasetBundle, expected: dict[str, int]) -> None:
    """Raise ``DataError`` naming every count that differs from ``expected``."""
    actual = bundle.summary()
    bad = [
        f"{key}: expected {expected[key]}, got {actual[key]}"
        for key in META_KEYS
        if key in expected and expected[key] != actual[key]
    ]
    if bad:
        raise DataError(f"{bundle.name}: count mismatch - " + "; ".join(bad))


def _format_value(v: float) -> str:
    return repr(float(v))


def save_dataset(bundle: DatasetBundle, dir_path, *, sparse: bool | None = None, meta: bool = True) -> Path:
    """Write ``bundle`` so that ``load_dataset`` reproduces it exactly.

    Features are written sparse when under 10% dense unless ``sparse`` is given.
    Values are written with ``repr`` so floats survive bit-exactly.
    """
    root = Path(dir_path)
    root.mkdir(parents=True, exist_ok=True)
    feats = bundle.features
    if sparse is None:
        sparse = feats.size > 0 and np.count_nonzero(feats) < 0.1 * feats.size
    with open(root / "nodes.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for i in range(bundle.graph.num_nodes):
            row = feats[i]
            if sparse:
                cols = np.flatnonzero(row)
                text = " ".join(f"{j}:{_format_value(row[j])}" for j in cols)
            else:
                text = " ".join(_format_value(v) for v in row)
            fh.write(f"{i}\t{bundle.class_names[bundle.labels[i]]}\t{text}\n")
    with open(root / "edges.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for u, v in bundle.raw_edges:
            fh.write(f"{u}\t{v}\n")
    if meta:
        with open(root / "meta.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"num_nodes\t{bundle.graph.num_nodes}\n")
            fh.write(f"num_classes\t{bundle.num_classes}\n")
            fh.write(f"num_features\t{feats.shape[1]}\n")
    return root


def row_normalize_features(f: np.ndarray) -> np.ndarray:
    """Divide each nonzero row by its L1 norm; zero rows stay zero."""
    f = np.asarray(f, dtype=np.float64)
    norms = np.abs(f).sum(axis=1, keepdims=True)
    return np.divide(f, norms, out=np.zeros_like(f), where=norms > 0)


def generate_sbm(
    num_nodes: int,
    num_classes: int,
    p_in: float,
    p_out: float,
    feature_dim: int,
    feature_signal: float = 1.0,
    seed: int = 0,
) -> DatasetBundle:
    """Stochastic block model with contiguous, near-equal blocks.

    Node ``i`` belongs to class ``i * num_classes // num_nodes``. Features are
    ``feature_signal`` on the class's template coordinate (``class % feature_dim``)
    plus standard normal noise.
    """
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if num_nodes < 1 or num_classes < 1 or num_classes > num_nodes:
        raise ValueError(f"need 1 <= num_classes <= num_nodes, got {num_classes}, {num_nodes}")
    if feature_dim < 1:
        raise ValueError(f"feature_dim must be >= 1, got {feature_dim}")

    labels = np.arange(num_nodes) * num_classes // num_nodes
    rng = generator(seed, "sbm-edges")
    edges = []
    for i in range(num_nodes - 1):
        others = np.arange(i + 1, num_nodes)
        prob = np.where(labels[others] == labels[i], p_in, p_out)
        hit = others[rng.random(others.size) < prob]
        edges.append(np.column_stack([np.full(hit.size, i), hit]))
    edge_arr = np.concatenate(edges) if edges else np.empty((0, 2), dtype=np.int64)

    noise = generator(seed, "sbm-features").standard_normal((num_nodes, feature_dim))
    features = noise
    features[np.arange(num_nodes), labels % feature_dim] += feature_signal

    width = len(str(num_classes - 1))
    return DatasetBundle(
        graph=build_graph(edge_arr, num_nodes),
        features=features,
        labels=labels.astype(np.int64),
        class_names=[f"c{k:0{width}d}" for k in range(num_classes)],
        name=f"sbm-n{num_nodes}-k{num_classes}-s{seed}",
        raw_edges=edge_arr.astype(np.int64),
    )


def convert_linqs(content_path, cites_path, out_dir) -> dict[str, int]:
    """Convert a LINQS ``.content`` / ``.cites`` pair to a dataset directory.

    ``.content`` rows are ``paper_id feat... label`` (whitespace separated),
    ``.cites`` rows are ``cited citing``. Citations touching papers missing
    from ``.content`` are dropped and counted. Returns conversion counts.
    """
    ids: dict[str, int] = {}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = None
    with open(content_path, encoding="utf-8") as src, open(out / "nodes.tsv", "w", encoding="utf-8", newline="\n") as dst:
        for lineno, line in enumerate(src, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"{content_path}:{lineno}: too few columns")
            if parts[0] in ids:
                raise DataError(f"{content_path}:{lineno}: duplicate paper id {parts[0]!r}")
            if width is None:
                width = len(parts) - 2
            elif len(parts) - 2 != width:
                raise DataError(f"{content_path}:{lineno}: ragged feature row")
            ids[parts[0]] = len(ids)
            nz = [f"{j}:{v}" for j, v in enumerate(parts[1:-1]) if float(v) != 0.0]
            dst.write(f"{ids[parts[0]]}\t{parts[-1]}\t{' '.join(nz)}\n")
    kept = dropped = 0
    with open(cites_path, encoding="utf-8") as src, open(out / "edges.tsv", "w", encoding="utf-8", newline="\n") as dst:
        for lineno, line in enumerate(src, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{cites_path}:{lineno}: expected two paper ids")
            if parts[0] in ids and parts[1] in ids:
                dst.write(f"{ids[parts[0]]}\t{ids[parts[1]]}\n")
                kept += 1
            else:
                dropped += 1
    with open(out / "meta.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"num_nodes\t{len(ids)}\nnum_features\t{width or 0}\n")
    if dropped:
        log.warning("dropped %d citations with endpoints missing from %s", dropped, content_path)
    return {"num_nodes": len(ids), "num_edges": kept, "dropped_edges": dropped}

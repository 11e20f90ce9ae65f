"""Data-motif benchmark toolkit.

Seeded data generators, the eight motif kernel families, a DAG workload
runner, Top-Down pipeline-slot analysis and workload clustering. Reports
come back as plain dicts with the same layout as the command-line JSON.
"""

import json
import os

from . import _core
from ._core import (
    Dataset,
    Error,
    InvalidArgument,
    IoError,
    MissingEvents,
    ParseError,
    SpecError,
    check_order_item,
    generate_tables,
    graph,
    kv,
    list_motifs,
    load_dataset,
    matrix,
    required_events,
    tensor,
    text,
    validate_spec,
)

__all__ = [
    "Dataset",
    "Error",
    "InvalidArgument",
    "IoError",
    "MissingEvents",
    "ParseError",
    "SpecError",
    "analyze",
    "analyze_counts",
    "check_order_item",
    "cluster",
    "generate",
    "generate_tables",
    "graph",
    "invoke",
    "kv",
    "list_motifs",
    "load_dataset",
    "matrix",
    "md5_hex",
    "required_events",
    "run_spec",
    "tensor",
    "text",
    "validate_spec",
]


def _param(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (list, tuple)):
        return "x".join(str(v) for v in value)
    return str(value)


def md5_hex(data):
    """Hex MD5 of bytes, or of a str encoded as UTF-8."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return _core.md5_hex(bytes(data))


def generate(kind, **params):
    """Run a generator: generate("matrix", rows=4, cols=4, dist="gaussian:0,1", seed=7).

    Keyword names match the workload-file generator parameters. A tensor shape may
    be given as a tuple.
    """
    return _core.generate(kind, {k: _param(v) for k, v in params.items()})


def invoke(motif, operands, **params):
    """Run one kernel: invoke("graph.pagerank", [g], damping=0.9)."""
    return _core.invoke(motif, list(operands), {k: _param(v) for k, v in params.items()})


def run_spec(path, repeat=1, out_dir=None, order_seed=None):
    """Execute a workload spec and return its run report.

    Outputs are written only when out_dir is given.
    """
    out = os.fspath(out_dir) if out_dir is not None else None
    return json.loads(_core.run_spec_json(os.fspath(path), repeat, out, order_seed))


def analyze(event_files, tree="builtin", mapping=None, width=None, label="", metrics=None):
    """Top-Down breakdown of one or more event dumps (averaged).

    With metrics, the metric vector is appended to that CSV file.
    """
    if isinstance(event_files, (str, os.PathLike)):
        event_files = [event_files]
    files = [os.fspath(f) for f in event_files]
    return json.loads(
        _core.analyze_json(
            files,
            os.fspath(tree) if tree != "builtin" else tree,
            os.fspath(mapping) if mapping is not None else None,
            width,
            label,
            os.fspath(metrics) if metrics is not None else None,
        )
    )


def analyze_counts(events, width=4, label=""):
    """Top-Down breakdown of in-memory counts; `cycles` is read from the events."""
    return json.loads(_core.analyze_counts_json(dict(events), float(width), label))


def cluster(metrics, variance=0.9, linkage="average", cut=None, standardize=True):
    """PCA plus hierarchical clustering of a metric-vector CSV."""
    return json.loads(_core.cluster_json(os.fspath(metrics), variance, linkage, cut, standardize))

"""Deterministic text output helpers.

All floating-point numbers are printed with 17 significant digits so that
identical configurations produce byte-identical, diffable files.  Output is
written atomically (temp file then rename) so failed runs leave no partial
files.
"""

from __future__ import annotations

import math
import os
import tempfile


def fmt(x) -> str:
    """Format a float with 17 significant digits; passthrough for ints/str."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def json_dumps(obj, indent: int = 2) -> str:
    """JSON serializer with .17g floats (stdlib json prints shortest repr)."""
    out = []
    _write_json(obj, out, indent, 0)
    return "".join(out) + "\n"


def _write_json(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, float)):
        if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
            out.append('"%s"' % fmt(obj))
        else:
            out.append(fmt(obj))
    elif isinstance(obj, str):
        import json as _json

        out.append(_json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            import json as _json

            out.append(pad + _json.dumps(str(k)) + ": ")
            _write_json(v, out, indent, level + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _write_json(v, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        try:
            import numpy as np

            if isinstance(obj, np.generic):
                _write_json(obj.item(), out, indent, level)
                return
            if isinstance(obj, np.ndarray):
                _write_json(obj.tolist(), out, indent, level)
                return
        except ImportError:
            pass
        raise TypeError(f"cannot serialize {type(obj)} to JSON")


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".heatlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path_or_none, header: list, rows: list) -> str:
    """Render rows as CSV text; write atomically when a path is given."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path_or_none:
        atomic_write_text(path_or_none, text)
    return text


def parallel_map(fn, items):
    """Map preserving order; worker count capped by HEATLAB_THREADS.

    Results are collected by index so any schedule yields identical output.
    """
    items = list(items)
    n_workers = int(os.environ.get("HEATLAB_THREADS", "1") or "1")
    if n_workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))

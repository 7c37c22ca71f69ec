"""Run directory layout and atomic file output.

    <root>/<config-hash>/config.json
                        manifest.json
                        results.csv
                        plots/*.svg

``<root>`` is ``$LEAKYWIRE_OUT`` if set, else ``./runs``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

CSV_COLUMNS = ("alpha", "h", "s", "kappa", "alpha0", "budget", "gamma_sup", "condition_met",
               "n_below", "lambda_min", "residual", "grid_n", "box_L")


def output_root() -> Path:
    return Path(os.environ.get("LEAKYWIRE_OUT", "runs"))


def run_dir(config_hash: str, root: Path | None = None) -> Path:
    return (root or output_root()) / config_hash


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def save_run(config_dict: dict, config_hash: str, manifest: dict, rows: list[dict] | None = None,
             plots: dict[str, str] | None = None, root: Path | None = None) -> Path:
    out = run_dir(config_hash, root)
    write_atomic(out / "config.json", dumps(config_dict))
    if rows is not None:
        write_atomic(out / "results.csv", rows_to_csv(rows))
    for name, svg in (plots or {}).items():
        write_atomic(out / "plots" / name, svg)
    write_atomic(out / "manifest.json", dumps(manifest))
    return out

"""Deterministic CSV emission plus a JSON metadata sidecar.

CSV bodies are byte-identical across reruns of the same configuration: fixed
column order, shortest round-trip float formatting, LF newlines, and no
timing data (wall times live in the sidecar only). Undefined g2 entries are
written as empty cells.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .scenarios import ResultTable

__all__ = ["table_columns", "write_csv", "write_sidecar", "emit_plot_script"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return repr(v)


def table_columns(table: ResultTable) -> list[str]:
    """Fixed header: sweep vars, extras, intensities, the g2 upper triangle,
    their standard errors, then provenance columns."""
    if not table.reports:
        raise ValueError(f"table {table.name} is empty")
    rep = next((r for r in table.reports if r is not None), None)
    if rep is None:
        raise ValueError(f"table {table.name} has no evaluated rows")
    L = rep.intensities.size
    cols = list(table.sweep_columns) + list(table.extra_columns)
    cols += [f"n_{l}" for l in range(L)]
    cols += [f"g2_{l}{m}" for l in range(L) for m in range(l, L)]
    cols += [f"se_n_{l}" for l in range(L)]
    cols += [f"se_g2_{l}{m}" for l in range(L) for m in range(l, L)]
    cols += ["pruned_weight", "seed", "cutoff", "engine_mode"]
    return cols


def _row_cells(table: ResultTable, idx: int, columns: list[str]) -> list[str]:
    row = table.rows[idx]
    rep = table.reports[idx]
    cells = []
    for c in table.sweep_columns + table.extra_columns:
        cells.append(_fmt(row.get(c)))
    if rep is None:
        pad = len(columns) - len(cells)
        return cells + [""] * pad
    L = rep.intensities.size
    cells += [_fmt(v) for v in rep.intensities]
    cells += [_fmt(rep.g2[l, m]) for l in range(L) for m in range(l, L)]
    cells += [_fmt(v) for v in rep.se_intensities]
    cells += [_fmt(rep.se_g2[l, m]) for l in range(L) for m in range(l, L)]
    cells.append(_fmt(rep.meta.get("pruned_weight", 0.0)))
    cells.append(_fmt(rep.meta.get("seed")))
    cells.append(_fmt(rep.meta.get("cutoff")))
    cells.append(str(rep.meta.get("engine_mode", "")))
    return cells


def write_csv(table: ResultTable, path: str | Path) -> Path:
    path = Path(path)
    columns = table_columns(table)
    lines = [",".join(columns)]
    for i in range(len(table.rows)):
        lines.append(",".join(_row_cells(table, i, columns)))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_sidecar(
    tables: list[ResultTable], config_dict: dict, path: str | Path,
    timings: dict | None = None, extra: dict | None = None,
) -> Path:
    """JSON sidecar: config echo, per-table metadata, versions, timings."""
    import qpicsim

    path = Path(path)
    payload = {
        "config": config_dict,
        "qpicsim_version": qpicsim.__version__,
        "numpy_version": np.__version__,
        "tables": [
            {
                "name": t.name,
                "rows": len(t.rows),
                "sweep_columns": t.sweep_columns,
                "meta": t.meta,
                "suppressed_g2_entries": sorted(
                    {pair for r in t.reports if r is not None for pair in r.suppressed}
                ),
            }
            for t in tables
        ],
        "timings_s": timings or {},
    }
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


_PLOT_TEMPLATE = '''"""Auto-generated plotting helper: intensities and g2 diagonals per table."""
import csv
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSVS = {csvs!r}
SWEEP = {sweep!r}

for name in CSVS:
    with open(Path(__file__).parent / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        continue
    x = [float(r[SWEEP]) for r in rows]
    n_cols = [c for c in rows[0] if c.startswith("n_")]
    g2_cols = [c for c in rows[0] if c.startswith("g2_") and c[3] == c[4]]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7, 8), sharex=True)
    for c in n_cols:
        ax0.semilogy(x, [float(r[c]) if r[c] else math.nan for r in rows], label=c)
    for c in g2_cols:
        ax1.plot(x, [float(r[c]) if r[c] else math.nan for r in rows], label=c)
    ax1.axhline(1.0, color="gray", ls=":", lw=1)
    ax0.set_ylabel("intensity")
    ax1.set_ylabel("g2 (diagonal)")
    ax1.set_xlabel(SWEEP)
    ax0.legend(fontsize=7)
    ax1.legend(fontsize=7)
    fig.suptitle(name)
    fig.savefig(str(Path(__file__).parent / name.replace(".csv", ".png")), dpi=150)
    plt.close(fig)
print("wrote one PNG per table")
'''


def emit_plot_script(tables: list[ResultTable], out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    csvs = [f"{t.name}.csv" for t in tables]
    sweep = tables[0].sweep_columns[-1] if tables else "phi_lo"
    path = out_dir / "plot_results.py"
    path.write_text(_PLOT_TEMPLATE.format(csvs=csvs, sweep=sweep))
    return path

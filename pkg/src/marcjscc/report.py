"""Reports and their text / structured (JSON) / CSV renderings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import __version__

CSV_VERSION = 1
CHECK_HEADER = ("scheme", "id", "lhs_bits", "rhs_bits", "margin_bits", "satisfied", "boundary")
SIM_HEADER = (
    "scheme", "n", "blocks", "rate1", "rate2", "epsilon", "trials", "seed", "session_errors",
    "session_error_rate", "relay_block_error_rate", "dest_block_error_rate", "wilson_low", "wilson_high",
)
QUANTITY_HEADER = ("quantity", "value_bits")
TRACE_HEADER = ("restart", "best_value_bits", "running_best_bits")


@dataclass
class Report:
    command: str
    options: dict
    scenario: dict
    results: dict
    version: str = __version__
    timing_s: float | None = field(default=None)

    def document(self) -> dict:
        doc = {
            "tool": "marcjscc",
            "version": self.version,
            "csv_version": CSV_VERSION,
            "command": self.command,
            "options": self.options,
            "scenario": self.scenario,
            "results": self.results,
        }
        if self.timing_s is not None:
            doc["timing_s"] = self.timing_s
        return plain(doc)


def plain(x):
    """Convert numpy scalars/arrays, tuples and enums into JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def emit(report: Report, fmt: str = "text") -> str:
    if fmt == "structured":
        return json.dumps(report.document(), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _csv(report)
    if fmt == "text":
        return _text(report)
    raise ValueError(f"unknown format {fmt!r}")


def parse_structured(text: str) -> dict:
    return json.loads(text)


# ---------------------------------------------------------------------- csv


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _quantities(results: dict):
    for k, v in results.items():
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            yield (k, repr(float(v)))


def _csv(report: Report) -> str:
    r = plain(report.results)
    if report.command == "check":
        rows = [
            (s["scheme"], c["id"], repr(c["lhs_bits"]), repr(c["rhs_bits"]), repr(c["margin_bits"]),
             c["satisfied"], c["boundary"])
            for s in r["schemes"] for c in s["conditions"]
        ]
        return _rows_csv(CHECK_HEADER, rows)
    if report.command == "simulate":
        lo, hi = r["wilson_interval"]
        row = [r["scheme"]] + [r.get(k, "") for k in ("n", "blocks", "rate1", "rate2", "epsilon")]
        row += [r["trials"], r["seed"], r["session_errors"], repr(r["session_error_rate"]),
                repr(r["relay_block_error_rate"]), repr(r["dest_block_error_rate"]), repr(lo), repr(hi)]
        return _rows_csv(SIM_HEADER, [row])
    if report.command == "optimize":
        env = np.maximum.accumulate(r["trace"]).tolist() if r["trace"] else []
        return _rows_csv(TRACE_HEADER, [(i, repr(v), repr(e)) for i, (v, e) in enumerate(zip(r["trace"], env))])
    results = dict(r)
    results.update(results.pop("entropies", {}))
    results.update(results.pop("information", {}))
    return _rows_csv(QUANTITY_HEADER, list(_quantities(results)))


# --------------------------------------------------------------------- text


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _table(header, rows) -> list[str]:
    rows = [tuple(_fmt(c) for c in r) for r in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in rows)) if rows else len(str(h)) for i, h in enumerate(header)]
    line = lambda cells: "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]


def _kv(items) -> list[str]:
    items = [(k, _fmt(v)) for k, v in items]
    width = max((len(k) for k, _ in items), default=0)
    return [f"{k.ljust(width)}  {v}" for k, v in items]


def _text(report: Report) -> str:
    r = plain(report.results)
    out = [f"marcjscc {report.version}  {report.command}  scenario {report.scenario.get('name', '')} "
           f"[{report.scenario.get('digest', '')[:12]}]"]
    if report.command == "check":
        for s in r["schemes"]:
            out.append("")
            out.append(f"scheme {s['scheme']}: overall {'satisfied' if s['overall'] else 'not satisfied'}, "
                       f"min margin {s['min_margin_bits']:.6f} bits")
            out += _table(("id", "lhs", "rhs", "lhs_bits", "rhs_bits", "margin", "ok", "boundary"),
                          [(c["id"], c["lhs"], c["rhs"], c["lhs_bits"], c["rhs_bits"], c["margin_bits"],
                            c["satisfied"], c["boundary"]) for c in s["conditions"]])
    elif report.command == "optimize":
        out += _kv([(k, r[k]) for k in ("objective", "family", "method", "best_value_bits", "evaluations")])
        out.append("")
        for name, rows in r["best_chain"].items():
            out.append(f"{name}: " + "; ".join(" ".join(f"{p:.4f}" for p in row) for row in rows))
        if "v_sizes_cap" in r:
            out.append("")
            out.append("V1, V2 alphabet sizes capped at {} x {} (no cardinality bound is known)".format(*r["v_sizes_cap"]))
    elif report.command == "simulate":
        keys = [k for k in ("scheme", "n", "blocks", "rate1", "rate2", "epsilon", "network", "trials", "seed",
                            "session_errors", "session_error_rate", "relay_block_error_rate",
                            "dest_block_error_rate") if k in r]
        out += _kv([(k, r[k]) for k in keys])
        lo, hi = r["wilson_interval"]
        out.append(f"wilson 95%  [{lo:.6f}, {hi:.6f}]")
    else:
        flat = dict(r)
        nested = {k: flat.pop(k) for k in ("entropies", "information", "inputs") if k in flat}
        out += _kv([(k, v) for k, v in flat.items() if k != "verdict"])
        for k, v in nested.items():
            out.append("")
            out.append(f"{k}:")
            out += ["  " + line for line in _kv(v.items())]
        if "verdict" in r:
            out.append("")
            out.append(r["verdict"])
    if report.timing_s is not None:
        out.append(f"elapsed {report.timing_s:.3f} s")
    return "\n".join(out) + "\n"

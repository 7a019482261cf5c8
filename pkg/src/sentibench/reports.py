"""Render JSON reports as Markdown or TSV tables."""

from __future__ import annotations

import json


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.1f}"
    return str(value)


def table(headers: list[str], rows: list[list], fmt: str, title: str = "") -> str:
    cells = [[_fmt(v) for v in row] for row in rows]
    if fmt == "tsv":
        lines = ["\t".join(headers)] + ["\t".join(r) for r in cells]
        return "\n".join(lines) + "\n"
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    def line(parts):
        return "| " + " | ".join(p.ljust(w) for p, w in zip(parts, widths)) + " |"
    out = [f"### {title}", ""] if title else []
    out.append(line(headers))
    out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    out.extend(line(r) for r in cells)
    return "\n".join(out) + "\n"


def _stats(result: dict, fmt: str) -> str:
    ds = result["datasets"]
    names = list(ds)
    parts = []
    rows = []
    for n in names:
        s = ds[n].get("samples")
        if s:
            for task in ("polarity", "rating"):
                rows.append([f"{n} ({task.capitalize()})", 2 if task == "polarity" else 5,
                             s[task]["train"], s[task]["validation"], s[task]["test"]])
    if rows:
        parts.append(table(["Dataset", "Classes", "Train", "Validation", "Test"], rows, fmt, "Samples per split"))
    rows = [[n, ds[n]["mean_length"], ds[n]["median_length"], ds[n]["vocab_size_1gram"], ds[n]["vocab_size_1_2gram"]]
            for n in names]
    parts.append(table(["Dataset", "Mean length", "Median length", "Vocab (1-gram)", "Vocab (1-2 grams)"],
                       rows, fmt, "Document length and vocabulary size"))
    rows = [[lab] + [ds[n]["label_distribution"]["rating"][lab] for n in names] for lab in "12345"]
    rows += [[f"polarity {lab}"] + [ds[n]["label_distribution"]["polarity"][lab] for n in names] for lab in "01"]
    parts.append(table(["Label"] + names, rows, fmt, "Label distribution (%)"))
    ov = result.get("overlap")
    if ov:
        rows = [[n] + ov["cells"][i] + [ov["row_avg"][i]] for i, n in enumerate(ov["names"])]
        rows.append(["Average"] + ov["col_avg"] + [None])
        parts.append(table(["Dataset"] + ov["names"] + ["Avg"], rows, fmt,
                           "Words in common (% of column dataset's vocabulary found in row dataset)"))
    return "\n".join(parts)


def _cross(result: dict, fmt: str) -> str:
    cols = result["eval_names"]
    rows = [[t] + row for t, row in zip(result["train_names"], result["grid"])]
    rows.append(["Delta"] + [result["delta"].get(c) for c in cols])
    return table(["Model"] + cols, rows, fmt, "ROC-AUC (%) per training / evaluation dataset")


def _sweep(result: dict, fmt: str) -> str:
    rows = [[p["requested_size"], p["vocab_size"], p["roc_auc"], p["n_samples"]] for p in result["points"]]
    return table(["requested_size", "vocab_size", "roc_auc", "n_test"], rows, fmt,
                 f"ROC-AUC (%) per vocabulary size: {result['dataset']}")


def _kv(result: dict, fmt: str) -> str:
    rows = [[k, v if not isinstance(v, dict) else json.dumps(v, sort_keys=True)] for k, v in sorted(result.items())]
    return table(["field", "value"], rows, fmt)


def render(report: dict, fmt: str = "md") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    result = report["result"]
    kind = report.get("command")
    if kind == "stats":
        return _stats(result, fmt)
    if kind == "cross-eval":
        return _cross(result, fmt)
    if kind == "sweep":
        return _sweep(result, fmt)
    if kind == "eval":
        return table(["dataset", "split", "roc_auc", "n_samples"],
                     [[result["dataset"], result["split"], result["roc_auc"], result["n_samples"]]], fmt)
    return _kv(result, fmt)

"""Run reports: structured text or JSON, the per-level table and its chart."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
import plotly.express as px

logger = logging.getLogger("greens.report")

LEVEL_COLUMNS = ["level", "stream", "class", "min_valuation", "nonzero_terms"]


def level_table(rows):
    """Per-level, per-class increments, indexed from 1."""
    df = pd.DataFrame(rows, columns=LEVEL_COLUMNS)
    df.index = range(1, len(df) + 1)
    return df


def level_minima(df):
    """Smallest increment valuation per (level, stream)."""
    if df.empty:
        return df
    return df.groupby(["level", "stream"], as_index=False)["min_valuation"].min()


def decay_per_level(df):
    """Least-squares slope of the per-level minimum valuation, or None with fewer than two levels."""
    minima = level_minima(df)
    if minima.empty:
        return None
    per_level = minima.groupby("level")["min_valuation"].min()
    if len(per_level) < 2:
        return None
    slope, _ = np.polyfit(per_level.index.to_numpy(dtype=float), per_level.to_numpy(dtype=float), 1)
    return round(float(slope), 4)


def plot_levels(df, path):
    """Tail valuation per level and stream as a standalone HTML chart."""
    minima = level_minima(df)
    fig = px.line(
        minima, x="level", y="min_valuation", color="stream", markers=True, title="Level increment valuation"
    )
    fig.write_html(path)
    logger.info(f"level chart written to {path}")
    return fig


def write_levels_csv(df, path):
    df.to_csv(path, index=True)
    logger.info(f"level table written to {path}")


@dataclass
class Report:
    p: int
    k: int
    precision: int
    working_precision: int
    series_order: int
    level_cutoff: int
    branch: str
    divisor: list
    target: list | None = None
    degree_check: str = ""
    degree_witness: dict = field(default_factory=dict)
    symmetric: bool = False
    levels_used: int = 0
    level_rows: list = field(default_factory=list)
    tail_valuations: dict = field(default_factory=dict)
    decay_per_level: float | None = None
    tolerance: int = 0
    defect_residuals: dict = field(default_factory=dict)
    post_residuals: dict = field(default_factory=dict)
    kernel: list = field(default_factory=list)
    automorph: list | None = None
    pell: list | None = None
    raising_constant: str = ""
    pairing_constant: str = ""
    value_valuation: int | None = None
    value_digits: str = ""
    branch_values: dict = field(default_factory=dict)
    branch_affine_agreement: int | None = None
    expected: str = ""
    agreement: int | None = None

    def to_dict(self):
        return asdict(self)

    def to_text(self):
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                if not value:
                    lines.append(f"{key}: -")
                for sub, item in value.items():
                    lines.append(f"{key}.{sub}: {item}")
            elif isinstance(value, list):
                lines.append(f"{key}: {json.dumps(value)}")
            else:
                lines.append(f"{key}: {'-' if value is None else value}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        """Atomic write; JSON when the path ends in .json, key: value text otherwise."""
        text = json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n" if path.endswith(".json") else self.to_text()
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except OSError:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        logger.info(f"report written to {path}")

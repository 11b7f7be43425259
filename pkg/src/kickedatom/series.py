"""Engine-agnostic observable records and their on-disk format.

Both engines emit the same schema so the analysis layer never needs to know
which engine produced a file.  Series are stored as columnar text with a
fixed float format, which keeps outputs byte-identical across worker counts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ObservableSeries", "geometric_checkpoints"]

_FMT = "%.17e"


def _coerce(text: str):
    """Recover int/float metadata values from their text form."""
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


@dataclass
class ObservableSeries:
    """P_sur, <n> and optional P(n) histograms at checkpointed kick counts."""

    K: np.ndarray            # kick counts, int64, strictly increasing
    t_au: np.ndarray         # time in atomic units, K * T
    P_sur: np.ndarray
    mean_n: np.ndarray       # NaN where P_sur = 0
    norm: np.ndarray         # total norm (quantum) or alive fraction proxy
    engine: str = "unknown"
    n_bins: np.ndarray | None = None        # integer n bin centers
    hist: np.ndarray | None = None          # shape (len(K), len(n_bins))
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=np.int64)
        if not np.all(np.diff(self.K) > 0):
            raise ValueError("checkpoint kick counts must be strictly increasing")

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# engine: {self.engine}\n")
        for key in sorted(self.meta):
            buf.write(f"# {key}: {self.meta[key]}\n")
        buf.write("# columns: K t_au P_sur mean_n norm\n")
        data = np.column_stack([
            self.K.astype(float), self.t_au, self.P_sur, self.mean_n, self.norm,
        ])
        np.savetxt(buf, data, fmt=_FMT)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "ObservableSeries":
        engine = "unknown"
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("engine:"):
                    engine = body.split(":", 1)[1].strip()
                elif ":" in body and not body.startswith("columns"):
                    key, val = body.split(":", 1)
                    meta[key.strip()] = _coerce(val.strip())
            elif line.strip():
                rows.append([float(x) for x in line.split()])
        arr = np.array(rows)
        return cls(K=arr[:, 0].astype(np.int64), t_au=arr[:, 1], P_sur=arr[:, 2],
                   mean_n=arr[:, 3], norm=arr[:, 4], engine=engine, meta=meta)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())
        if self.hist is not None:
            hist_path = str(path) + ".hist.npz"
            np.savez(hist_path, K=self.K, n_bins=self.n_bins, hist=self.hist)

    @classmethod
    def load(cls, path) -> "ObservableSeries":
        with open(path) as fh:
            series = cls.from_text(fh.read())
        hist_path = str(path) + ".hist.npz"
        try:
            with np.load(hist_path) as npz:
                series.n_bins = npz["n_bins"]
                series.hist = npz["hist"]
        except FileNotFoundError:
            pass
        return series


def geometric_checkpoints(K_max: int, ratio: float = 1.25) -> np.ndarray:
    """Strictly increasing kick checkpoints: 0, 1, 2, ... geometric with `ratio`,
    always ending exactly at K_max."""
    if K_max < 0:
        raise ValueError("K_max must be non-negative")
    points = [0]
    k = 1.0
    while k < K_max:
        ki = int(round(k))
        if ki > points[-1]:
            points.append(ki)
        k *= ratio
    if K_max > 0 and points[-1] != K_max:
        points.append(K_max)
    return np.array(points, dtype=np.int64)

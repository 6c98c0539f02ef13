"""Dataset ingestion: UCI seizure CSV loading, label binarization, seeded
train/test splitting, and a synthetic surrogate generator for when the real
CSV is unavailable.

Expected CSV schema: 178 numeric EEG amplitude fields plus a trailing integer
label in 1..5 per row. An optional header row and an optional leading
row-identifier column are detected and skipped.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

N_FEATURES = 178


@dataclass
class Dataset:
    features: np.ndarray  # [rows, 178] float64
    labels: np.ndarray    # [rows] int64, values in {0, 1}
    source: str           # "real" or "synthetic"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[1] != N_FEATURES:
            raise DataError(
                f"feature matrix must be rows x {N_FEATURES}, got {self.features.shape}"
            )
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError("feature row count does not match label count")
        if not np.isfinite(self.features).all():
            raise DataError("feature matrix contains non-finite values")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0 or 1")

    def __len__(self):
        return self.features.shape[0]


@dataclass
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = True


def binarize_label(raw: int) -> int:
    """Map raw label 1 (seizure) to 1 and labels 2..5 (non-seizure) to 0."""
    if raw not in (1, 2, 3, 4, 5):
        raise DataError(f"label {raw} outside the valid range 1..5")
    return 1 if raw == 1 else 0


def _parse_row(fields: list[str], line_no: int) -> tuple[list[float], int]:
    if len(fields) == N_FEATURES + 2 and not _is_number(fields[0]):
        fields = fields[1:]  # leading row-identifier column
    if len(fields) != N_FEATURES + 1:
        raise DataError(
            f"row {line_no}: expected {N_FEATURES} features + 1 label, "
            f"got {len(fields)} fields"
        )
    values = []
    for j, tok in enumerate(fields[:N_FEATURES]):
        try:
            v = float(tok)
        except ValueError:
            raise DataError(f"row {line_no}: non-numeric feature {tok!r} (column {j + 1})")
        if not np.isfinite(v):
            raise DataError(f"row {line_no}: non-finite feature value (column {j + 1})")
        values.append(v)
    tok = fields[N_FEATURES]
    try:
        raw = int(float(tok))
        if float(tok) != raw:
            raise ValueError
    except ValueError:
        raise DataError(f"row {line_no}: label {tok!r} is not an integer")
    try:
        label = binarize_label(raw)
    except DataError:
        raise DataError(f"row {line_no}: label {raw} outside the valid range 1..5")
    return values, label


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def load_csv(path) -> Dataset:
    """Load the seizure CSV, binarizing labels; row order is preserved."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")

    rows, labels = [], []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not rows and not _is_number(fields[-1]):
            continue  # header row: the label position is never numeric there
        values, label = _parse_row(fields, line_no)
        rows.append(values)
        labels.append(label)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows), np.array(labels), source="real")


def load_features_csv(path) -> tuple[np.ndarray, list[int], list[tuple[int, str]]]:
    """Feature-only rows (178 values, no label column) for prediction.

    Malformed rows do not abort the load; they are returned as
    (line_no, message) problems so callers can keep processing good rows.
    Returns (features, line numbers of good rows, problems).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")

    rows, row_nos, problems = [], [], []
    seen_data = False
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not seen_data and not _is_number(fields[-1]):
            continue  # header row
        seen_data = True
        if len(fields) == N_FEATURES + 1 and not _is_number(fields[0]):
            fields = fields[1:]
        if len(fields) != N_FEATURES:
            problems.append((line_no, f"expected {N_FEATURES} values, got {len(fields)}"))
            continue
        try:
            values = [float(tok) for tok in fields]
        except ValueError:
            problems.append((line_no, "non-numeric value"))
            continue
        if not all(np.isfinite(v) for v in values):
            problems.append((line_no, "non-finite value"))
            continue
        rows.append(values)
        row_nos.append(line_no)
    features = np.array(rows) if rows else np.empty((0, N_FEATURES))
    return features, row_nos, problems


def partition_indices(labels, train_fraction, seed, stratified):
    """Disjoint (train, test) index arrays; train size = round(fraction * n).

    Stratified mode keeps each class's train count within one sample of the
    global fraction. Indices are returned sorted so partition row order
    follows the input. Deterministic in the seed.
    """
    n = len(labels)
    total = int(np.floor(train_fraction * n + 0.5))
    rng = np.random.default_rng(seed)
    if stratified:
        labels = np.asarray(labels)
        pos = np.flatnonzero(labels == 1)
        neg = np.flatnonzero(labels == 0)
        if len(pos) == 0 or len(neg) == 0:
            raise DataError("stratified split requires both classes to be present")
        t_pos = int(np.floor(train_fraction * len(pos) + 0.5))
        t_pos = min(max(t_pos, total - len(neg)), total, len(pos))
        t_neg = total - t_pos
        pos = rng.permutation(pos)
        neg = rng.permutation(neg)
        train = np.concatenate([pos[:t_pos], neg[:t_neg]])
        test = np.concatenate([pos[t_pos:], neg[t_neg:]])
    else:
        perm = rng.permutation(n)
        train, test = perm[:total], perm[total:]
    return np.sort(train), np.sort(test)


def split(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    if not 0.0 < spec.train_fraction < 1.0:
        raise ConfigError(
            f"train_fraction must be strictly between 0 and 1, got {spec.train_fraction}"
        )
    if len(d) == 0:
        raise DataError("cannot split an empty dataset")
    tr, te = partition_indices(d.labels, spec.train_fraction, spec.seed, spec.stratified)
    return (
        Dataset(d.features[tr], d.labels[tr], d.source),
        Dataset(d.features[te], d.labels[te], d.source),
    )


def synthesize(n_per_class: int, seed: int) -> Dataset:
    """Surrogate dataset: smoothed unit-scale noise for the negative class,
    the same noise plus a high-amplitude alternating spike train (amplitude
    >= 10) for the positive class. Deterministic in the seed.
    """
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = np.random.default_rng(seed)
    rows = 2 * n_per_class

    # 5-point boxcar smoothing band-limits the noise; rescale to unit std.
    raw = rng.standard_normal((rows, N_FEATURES + 4))
    feat = np.zeros((rows, N_FEATURES))
    for k in range(5):
        feat += raw[:, k:k + N_FEATURES]
    feat *= 1.0 / np.sqrt(5.0)

    for i in range(n_per_class, rows):
        period = int(rng.integers(3, 7))
        amp = float(rng.uniform(10.0, 20.0))
        start = int(rng.integers(0, period))
        sign = 1.0
        for t in range(start, N_FEATURES, period):
            feat[i, t] += sign * amp
            if t > 0:
                feat[i, t - 1] += sign * amp / 2.0
            if t < N_FEATURES - 1:
                feat[i, t + 1] += sign * amp / 2.0
            sign = -sign

    labels = np.concatenate([np.zeros(n_per_class, dtype=np.int64),
                             np.ones(n_per_class, dtype=np.int64)])
    return Dataset(feat, labels, source="synthetic")

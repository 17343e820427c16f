"""Dataset ingestion for Bayesian logistic regression runs.

CSV layout: numeric feature columns with the label in the last column.
A leading header row is detected and skipped. Labels may be any two
distinct values; the smaller maps to class 0. Features are standardized
with training-split statistics and a constant bias column is appended
after standardization.
"""

import csv

import numpy as np
from scipy.special import expit

from ..errors import ValidationError
from ..rng import RngStream
from ..targets.blr import LogisticRegressionPosterior


def _read_numeric_csv(path, min_width=2):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if i == 0:
                try:
                    [float(c) for c in row]
                except ValueError:
                    continue  # header row
            parsed = []
            for j, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValidationError(
                        f"non-numeric cell at row {i}, column {j}: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ValidationError(f"no data rows in {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"ragged rows in {path}: widths {sorted(widths)}")
    if widths.pop() < min_width:
        raise ValidationError(f"need at least {min_width} columns in {path}")
    return np.asarray(rows, dtype=np.float64)


def load_sample_csv(path):
    """Numeric CSV (optional header) to a (rows, columns) float array."""
    return _read_numeric_csv(path, min_width=1)


def load_blr_dataset(path, split_seed=0, train_fraction=0.8,
                     prior_precision=1.0, minibatch_size=64):
    """Returns (posterior target built on the train split, (x_test, y_test)).

    The split is deterministic in `split_seed`. Test features are scaled
    with train statistics, so accuracy numbers are leak-free.
    """
    if not 0 < train_fraction < 1:
        raise ValidationError("train_fraction must be in (0, 1)")
    table = _read_numeric_csv(path)
    x, labels = table[:, :-1], table[:, -1]
    classes = np.unique(labels)
    if len(classes) != 2:
        raise ValidationError(
            f"label column must have exactly 2 distinct values, got {len(classes)}"
        )
    y = (labels == classes[1]).astype(np.float64)

    n = len(y)
    perm = RngStream(split_seed).permutation(n)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValidationError(f"train fraction {train_fraction} leaves an empty split")
    tr, te = perm[:n_train], perm[n_train:]

    mu = x[tr].mean(axis=0)
    sd = x[tr].std(axis=0)
    sd[sd == 0] = 1.0
    x_tr = (x[tr] - mu) / sd
    x_te = (x[te] - mu) / sd
    x_tr = np.column_stack([x_tr, np.ones(len(tr))])
    x_te = np.column_stack([x_te, np.ones(len(te))])

    target = LogisticRegressionPosterior(
        x_tr, y[tr], prior_precision=prior_precision,
        minibatch_size=minibatch_size,
    )
    return target, (x_te, y[te])


def blr_test_accuracy(samples, x_test, y_test):
    """Posterior-mean predictive accuracy.

    Predicts class 1 when the average of sigmoid(f.w) over posterior
    samples is at least 0.5 (ties go to class 1).
    """
    w = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    x = np.atleast_2d(np.asarray(x_test, dtype=np.float64))
    y = np.asarray(y_test, dtype=np.float64).ravel()
    if w.shape[1] != x.shape[1]:
        raise ValidationError(
            f"samples have dimension {w.shape[1]}, features have {x.shape[1]}"
        )
    prob = expit(x @ w.T).mean(axis=1)
    predicted = (prob >= 0.5).astype(np.float64)
    return float(np.mean(predicted == y))

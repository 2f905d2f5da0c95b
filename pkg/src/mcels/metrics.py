"""Per-instance and aggregate evaluation of counterfactual explanations."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .validation import check_same_shape, check_series

REPORT_COLUMNS = (
    "dataset", "method", "n", "validity_rate",
    "mean_target_prob", "mean_l1", "mean_sparsity",
)


@dataclass
class InstanceMetrics:
    target_probability: float
    valid: bool
    l1_distance: float
    sparsity: float


@dataclass
class AggregateReport:
    dataset: str
    method: str
    n: int
    validity_rate: float
    mean_target_prob: float
    mean_l1: float
    mean_sparsity: float

    def row(self):
        return [self.dataset, self.method, str(self.n),
                repr(self.validity_rate), repr(self.mean_target_prob),
                repr(self.mean_l1), repr(self.mean_sparsity)]


def validity(clf, x_prime, wanted_class):
    """Target-class probability of the counterfactual and whether the
    classifier's argmax (lowest-index tie-break) equals the target class."""
    probs = clf.forward(x_prime)
    return float(probs[wanted_class]), int(np.argmax(probs)) == wanted_class


def l1_distance(x, x_prime):
    x = check_series(x)
    x_prime = check_series(x_prime, "x_prime")
    check_same_shape(x, x_prime, "x", "x_prime")
    return float(np.sum(np.abs(x - x_prime)))


def sparsity(x, x_prime, atol=0.0, verbatim_denominator=False):
    """Fraction of (t, d) points left unchanged.

    Change detection is exact floating-point inequality unless `atol` is set.
    `verbatim_denominator` divides the change count by T alone instead of
    T*D (audit variant; can exceed the [0, 1] range for D > 1).
    """
    x = check_series(x)
    x_prime = check_series(x_prime, "x_prime")
    check_same_shape(x, x_prime, "x", "x_prime")
    if atol > 0.0:
        changed = np.abs(x - x_prime) > atol
    else:
        changed = x != x_prime
    T, D = x.shape
    denominator = T if verbatim_denominator else T * D
    return 1.0 - float(np.sum(changed)) / denominator


def instance_metrics(clf, x, x_prime, wanted_class):
    prob, valid = validity(clf, x_prime, wanted_class)
    return InstanceMetrics(
        target_probability=prob,
        valid=valid,
        l1_distance=l1_distance(x, x_prime),
        sparsity=sparsity(x, x_prime),
    )


def aggregate(results, dataset="", method=""):
    """Arithmetic means over a list of InstanceMetrics."""
    if not results:
        raise DataError("cannot aggregate an empty result list")
    n = len(results)
    return AggregateReport(
        dataset=dataset,
        method=method,
        n=n,
        validity_rate=sum(1 for r in results if r.valid) / n,
        mean_target_prob=sum(r.target_probability for r in results) / n,
        mean_l1=sum(r.l1_distance for r in results) / n,
        mean_sparsity=sum(r.sparsity for r in results) / n,
    )


def write_report_csv(reports, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for report in reports:
            writer.writerow(report.row())


def read_report_csv(text):
    """Parse an aggregate CSV back into AggregateReport rows."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty aggregate CSV") from None
    missing = [c for c in REPORT_COLUMNS if c not in header]
    if missing:
        raise DataError(f"aggregate CSV missing column(s): {', '.join(missing)}")
    index = {name: header.index(name) for name in REPORT_COLUMNS}
    reports = []
    for row in reader:
        if not row:
            continue
        try:
            reports.append(AggregateReport(
                dataset=row[index["dataset"]],
                method=row[index["method"]],
                n=int(row[index["n"]]),
                validity_rate=float(row[index["validity_rate"]]),
                mean_target_prob=float(row[index["mean_target_prob"]]),
                mean_l1=float(row[index["mean_l1"]]),
                mean_sparsity=float(row[index["mean_sparsity"]]),
            ))
        except (ValueError, IndexError) as exc:
            raise DataError(f"bad aggregate CSV row {row!r}: {exc}") from None
    return reports

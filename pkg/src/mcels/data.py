"""Dataset container, file formats and per-dimension normalization.

Two on-disk formats are supported:

* the native format: a one-line header ``#MTS v1 T=<int> D=<int> C=<int>``
  followed by one instance per line, ``<label> <v(0,0)> ... <v(T-1,D-1)>``
  with values t-major then d;
* a subset of the UEA ``.ts`` format (equal-length, no missing values).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError
from .validation import check_labels, check_panel

_DEGENERATE_STD = 1e-12


@dataclass
class Dataset:
    """A labeled panel of equal-shape multivariate series.

    X has shape (n, T, D); y holds class indices in 0..n_classes-1.
    """

    X: np.ndarray
    y: np.ndarray
    n_classes: int
    name: str = ""
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        self.X = check_panel(self.X)
        self.y = check_labels(self.y, len(self.X), self.n_classes)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def series_length(self):
        return self.X.shape[1]

    @property
    def n_dims(self):
        return self.X.shape[2]

    def equals(self, other):
        return (
            self.n_classes == other.n_classes
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


# ---------------------------------------------------------------------------
# native format
# ---------------------------------------------------------------------------

def parse_native(text):
    """Parse the native text format into a Dataset."""
    lines = text.splitlines()
    if not lines:
        raise DataError("empty input: missing header line")
    header = lines[0].strip()
    parts = header.split()
    if len(parts) != 5 or parts[0] != "#MTS" or parts[1] != "v1":
        raise DataError(f"line 1: bad header {header!r}, expected '#MTS v1 T=.. D=.. C=..'")
    dims = {}
    for token in parts[2:]:
        key, _, value = token.partition("=")
        if key not in ("T", "D", "C") or not value:
            raise DataError(f"line 1: bad header token {token!r}")
        try:
            dims[key] = int(value)
        except ValueError:
            raise DataError(f"line 1: non-integer header value {token!r}") from None
    if sorted(dims) != ["C", "D", "T"]:
        raise DataError("line 1: header must define T, D and C exactly once")
    T, D, C = dims["T"], dims["D"], dims["C"]
    if T < 2 or D < 1 or C < 2:
        raise DataError(f"line 1: invalid sizes T={T} D={D} C={C}")

    instances = []
    labels = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 1 + T * D:
            raise DataError(
                f"line {lineno}: expected 1 label + {T * D} values, got {len(fields)} fields"
            )
        try:
            label = int(fields[0])
        except ValueError:
            raise DataError(f"line {lineno}: bad label {fields[0]!r}") from None
        if not 0 <= label < C:
            raise DataError(f"line {lineno}: label {label} outside 0..{C - 1}")
        try:
            values = [float(v) for v in fields[1:]]
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric value") from None
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"line {lineno}: non-finite value")
        instances.append(np.asarray(values, dtype=np.float64).reshape(T, D))
        labels.append(label)
    if not instances:
        raise DataError("no instances found after header")
    return Dataset(np.stack(instances), np.asarray(labels), C)


def serialize_native(ds):
    """Serialize a Dataset to the native text format with full float precision."""
    out = [f"#MTS v1 T={ds.series_length} D={ds.n_dims} C={ds.n_classes}"]
    for x, label in zip(ds.X, ds.y):
        values = " ".join(repr(float(v)) for v in x.reshape(-1))
        out.append(f"{label} {values}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# UEA .ts subset
# ---------------------------------------------------------------------------

def parse_uea_ts(text):
    """Parse an equal-length UEA .ts file with no missing values.

    Class labels are mapped to dense indices by their declaration order in
    the @classLabel directive.
    """
    problem_name = ""
    n_dims = None
    series_length = None
    class_labels = None
    in_data = False
    instances = []
    labels = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_data and line.startswith("@"):
            keyword, _, rest = line.partition(" ")
            keyword = keyword.lower()
            rest = rest.strip()
            if keyword == "@problemname":
                problem_name = rest
            elif keyword == "@dimensions":
                n_dims = _parse_int_directive(rest, lineno, "@dimensions")
            elif keyword == "@serieslength":
                series_length = _parse_int_directive(rest, lineno, "@seriesLength")
            elif keyword == "@equallength":
                if rest.lower() != "true":
                    raise DataError(f"line {lineno}: only equal-length series are supported")
            elif keyword == "@classlabel":
                tokens = rest.split()
                if not tokens or tokens[0].lower() != "true":
                    raise DataError(f"line {lineno}: @classLabel must be 'true <labels...>'")
                class_labels = tokens[1:]
                if len(class_labels) < 2:
                    raise DataError(f"line {lineno}: need at least 2 class labels")
            elif keyword == "@data":
                in_data = True
            # other directives (@univariate, @timestamps, ...) are ignored
            continue
        if not in_data:
            raise DataError(f"line {lineno}: data before @data directive")
        if class_labels is None:
            raise DataError("missing @classLabel directive")
        if "?" in line:
            raise DataError(f"line {lineno}: missing-value marker '?' is not supported")
        fields = line.split(":")
        if len(fields) < 2:
            raise DataError(f"line {lineno}: expected '<dim>:...:<label>'")
        label_token = fields[-1].strip()
        if label_token not in class_labels:
            raise DataError(f"line {lineno}: unknown class label {label_token!r}")
        dim_fields = fields[:-1]
        if n_dims is not None and len(dim_fields) != n_dims:
            raise DataError(
                f"line {lineno}: {len(dim_fields)} dimensions, expected {n_dims}"
            )
        columns = []
        for d, dim_field in enumerate(dim_fields):
            tokens = dim_field.split(",")
            try:
                col = [float(v) for v in tokens]
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric value in dimension {d}") from None
            if series_length is not None and len(col) != series_length:
                raise DataError(
                    f"line {lineno}: dimension {d} has {len(col)} values, "
                    f"expected {series_length}"
                )
            if not all(math.isfinite(v) for v in col):
                raise DataError(f"line {lineno}: non-finite value in dimension {d}")
            columns.append(col)
        if len({len(c) for c in columns}) != 1:
            raise DataError(f"line {lineno}: dimensions have differing lengths")
        instances.append(np.asarray(columns, dtype=np.float64).T)  # (T, D)
        labels.append(class_labels.index(label_token))

    if not instances:
        raise DataError("no data lines found")
    shapes = {inst.shape for inst in instances}
    if len(shapes) != 1:
        raise DataError("instances have differing shapes")
    return Dataset(
        np.stack(instances),
        np.asarray(labels),
        len(class_labels),
        name=problem_name,
        class_names=list(class_labels),
    )


def _parse_int_directive(rest, lineno, name):
    try:
        return int(rest.split()[0])
    except (IndexError, ValueError):
        raise DataError(f"line {lineno}: bad {name} value {rest!r}") from None


def load_dataset(path, fmt="native"):
    """Read a dataset file in the given format ('native' or 'uea-ts')."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if fmt == "native":
        return parse_native(text)
    if fmt == "uea-ts":
        return parse_uea_ts(text)
    raise DataError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def fit_normalization(ds):
    """Per-dimension mean and population std over all instances and time steps.

    Degenerate (near-constant) dimensions get std = 1 so that applying the
    stats never divides by zero.
    """
    values = ds.X.reshape(-1, ds.n_dims)
    mean = values.mean(axis=0)
    std = values.std(axis=0)  # population formula
    std = np.where(std < _DEGENERATE_STD, 1.0, std)
    return mean, std


def apply_normalization(x, mean, std):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != len(mean):
        raise DataError(
            f"dimension mismatch: series has D={x.shape[-1]}, stats have D={len(mean)}"
        )
    return (x - mean) / std


def invert_normalization(x, mean, std):
    return np.asarray(x, dtype=np.float64) * std + mean


class Normalizer(BaseEstimator, TransformerMixin):
    """Per-dimension z-normalization fit on a training panel.

    Works on (n, T, D) panels and on single (T, D) series alike.
    """

    def fit(self, X, y=None):
        X = check_panel(X)
        values = X.reshape(-1, X.shape[2])
        self.mean_ = values.mean(axis=0)
        std = values.std(axis=0)
        self.std_ = np.where(std < _DEGENERATE_STD, 1.0, std)
        return self

    def transform(self, X):
        return apply_normalization(X, self.mean_, self.std_)

    def inverse_transform(self, X):
        return invert_normalization(X, self.mean_, self.std_)

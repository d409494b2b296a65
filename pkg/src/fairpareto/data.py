"""Datasets with sensitive attributes: loading, encoding, splitting, batching.

Feature matrices are dense float arrays; labels live in {-1, +1}; each
sensitive attribute is stored as integer category codes plus a cached set of
0/1 indicator columns and their means, which the fairness objectives consume.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from fairpareto.errors import ParseError, SchemaError

DEFAULT_MISSING = ("", "?", "NA")


@dataclass(frozen=True)
class Attribute:
    """A sensitive attribute: its name and number of categories."""

    name: str
    cardinality: int
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.cardinality < 2:
            raise ValueError(f"attribute {self.name!r} needs >= 2 categories")


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    sensitive: dict[str, int]
    label: int


@dataclass(frozen=True)
class Dataset:
    """Immutable encoded dataset.

    ``features`` is (n, d); ``labels`` is (n,) in {-1, +1}; ``sensitive``
    maps attribute name to (n,) integer codes below the attribute's declared
    cardinality.
    """

    features: np.ndarray
    labels: np.ndarray
    sensitive: dict[str, np.ndarray]
    attributes: tuple[Attribute, ...]
    feature_names: tuple[str, ...] = ()
    _indicators: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels.astype(int))
        if feats.ndim != 2:
            raise SchemaError("features must be a 2-D array")
        n = feats.shape[0]
        if labels.shape != (n,):
            raise SchemaError("labels length does not match feature rows")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise SchemaError("labels must be -1 or +1")
        if not self.feature_names:
            object.__setattr__(
                self, "feature_names", tuple(f"x{i}" for i in range(feats.shape[1]))
            )
        if len(self.feature_names) != feats.shape[1]:
            raise SchemaError("feature_names length does not match feature columns")
        declared = {a.name for a in self.attributes}
        if declared != set(self.sensitive):
            raise SchemaError("sensitive columns do not match declared attributes")
        for attr in self.attributes:
            codes = np.asarray(self.sensitive[attr.name], dtype=int)
            self.sensitive[attr.name] = codes
            if codes.shape != (n,):
                raise SchemaError(f"sensitive column {attr.name!r} has wrong length")
            if codes.size and (codes.min() < 0 or codes.max() >= attr.cardinality):
                raise SchemaError(
                    f"sensitive codes for {attr.name!r} exceed cardinality "
                    f"{attr.cardinality}"
                )
        # Indicator cache: per attribute a (K, n) 0/1 matrix and its row means.
        for attr in self.attributes:
            codes = self.sensitive[attr.name]
            ind = np.zeros((attr.cardinality, n))
            ind[codes, np.arange(n)] = 1.0
            means = ind.mean(axis=1) if n else np.zeros(attr.cardinality)
            self._indicators[attr.name] = (ind, means)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def attribute(self, name: str) -> Attribute:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise SchemaError(f"unknown sensitive attribute {name!r}")

    def indicators(self, name: str) -> np.ndarray:
        """(K, n) matrix of 0/1 category indicators for one attribute."""
        self.attribute(name)
        return self._indicators[name][0]

    def indicator_means(self, name: str) -> np.ndarray:
        self.attribute(name)
        return self._indicators[name][1]

    def sample(self, j: int) -> Sample:
        return Sample(
            features=self.features[j],
            sensitive={name: int(codes[j]) for name, codes in self.sensitive.items()},
            label=int(self.labels[j]),
        )

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive={name: codes[idx] for name, codes in self.sensitive.items()},
            attributes=self.attributes,
            feature_names=self.feature_names,
        )


def concat(parts: list[Dataset]) -> Dataset:
    """Stack datasets sharing one schema (used by the streaming front)."""
    if not parts:
        raise SchemaError("nothing to concatenate")
    head = parts[0]
    for other in parts[1:]:
        if other.feature_names != head.feature_names:
            raise SchemaError("feature columns differ between dataset parts")
        if other.attributes != head.attributes:
            raise SchemaError("sensitive attributes differ between dataset parts")
    return Dataset(
        features=np.vstack([p.features for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        sensitive={
            name: np.concatenate([p.sensitive[name] for p in parts])
            for name in head.sensitive
        },
        attributes=head.attributes,
        feature_names=head.feature_names,
    )


# ---------------------------------------------------------------------------
# Splitting and batching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train: float
    valid: float
    test: float
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train, self.valid, self.test)
        if any(f < 0 for f in fracs):
            raise ValueError("split fractions must be nonnegative")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seed-deterministic disjoint index partition with largest-remainder sizing."""
    fracs = np.array([spec.train, spec.valid, spec.test])
    counts = np.floor(fracs * n).astype(int)
    remainder = n - counts.sum()
    order = np.argsort(-(fracs * n - counts), kind="stable")
    for i in range(remainder):
        counts[order[i]] += 1
    for frac, count, name in zip(fracs, counts, ("train", "valid", "test")):
        if frac > 0 and count == 0:
            raise ValueError(f"{name} part is empty: n={n} is too small for {frac}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    edges = np.cumsum(counts)
    return perm[: edges[0]], perm[edges[0] : edges[1]], perm[edges[1] :]


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Partition a dataset into train/valid/test parts."""
    tr, va, te = split_indices(len(dataset), spec)
    return dataset.subset(tr), dataset.subset(va), dataset.subset(te)


@dataclass(frozen=True)
class BatchSchedule:
    """Geometric batch-size growth: ceil(base * growth**k), capped at n."""

    base: int
    growth: float = 1.0

    def __post_init__(self):
        if self.base < 1:
            raise ValueError("base batch size must be >= 1")
        if self.growth < 1.0:
            raise ValueError("batch growth ratio must be >= 1")

    def size_at(self, k: int, n_samples: int) -> int:
        if k < 0:
            raise ValueError("iterate index must be >= 0")
        if self.growth == 1.0:
            return min(self.base, n_samples)
        # Work in log space first so huge k cannot overflow the float product.
        if math.log(self.base) + k * math.log(self.growth) > math.log(n_samples) + 1.0:
            return n_samples
        return min(math.ceil(self.base * self.growth**k), n_samples)


def draw_batch(n_samples: int, schedule: BatchSchedule, k: int, rng) -> np.ndarray:
    """Uniform-with-replacement index batch of the scheduled size."""
    size = schedule.size_at(k, n_samples)
    return rng.integers(0, n_samples, size=size)


def sample_batch(dataset: Dataset, schedule: BatchSchedule, k: int, rng) -> np.ndarray:
    return draw_batch(len(dataset), schedule, k, rng)


# ---------------------------------------------------------------------------
# CSV loading and encoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CsvSchema:
    """Column roles for a raw CSV file with a header row."""

    label: str
    positive_label: str
    sensitive: tuple[str, ...] = ()
    continuous: tuple[str, ...] = ()
    categorical: tuple[str, ...] = ()
    missing_values: tuple[str, ...] = DEFAULT_MISSING

    def columns(self) -> tuple[str, ...]:
        return (self.label, *self.sensitive, *self.continuous, *self.categorical)


def load_raw(path, schema: CsvSchema) -> pd.DataFrame:
    """Read a CSV as strings, validate columns, drop rows with missing values."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    df.columns = [c.strip() for c in df.columns]
    missing_cols = [c for c in schema.columns() if c not in df.columns]
    if missing_cols:
        raise SchemaError(f"columns missing from {path}: {missing_cols}")
    df = df[list(schema.columns())].apply(lambda col: col.str.strip())
    keep = ~df.isin(schema.missing_values).any(axis=1)
    return df[keep]


class Encoder:
    """Fit one-hot categories and z-score statistics, then encode rows.

    Categories (including sensitive ones) are collected from the full frame
    passed to :meth:`fit`; normalization statistics come from ``stats_rows``
    when given, so a caller can fit them on the training part only.
    """

    def __init__(self, schema: CsvSchema):
        self.schema = schema
        self._fitted = False

    def fit(self, df: pd.DataFrame, stats_rows=None) -> "Encoder":
        s = self.schema
        stats_df = df if stats_rows is None else df.iloc[np.asarray(stats_rows)]
        self.continuous_stats: dict[str, tuple[float, float]] = {}
        for col in s.continuous:
            vals = _numeric(stats_df, col)
            std = float(vals.std())  # population std
            if std == 0.0:
                warnings.warn(
                    f"continuous column {col!r} has zero variance; encoded as constant 0"
                )
            self.continuous_stats[col] = (float(vals.mean()), std)
        self.categorical_levels = {
            col: tuple(sorted(df[col].unique())) for col in s.categorical
        }
        self.sensitive_levels = {
            col: tuple(sorted(df[col].unique())) for col in s.sensitive
        }
        self._fitted = True
        return self

    def transform(self, df: pd.DataFrame) -> Dataset:
        if not self._fitted:
            raise SchemaError("encoder must be fitted before transforming")
        s = self.schema
        n = len(df)
        columns: list[np.ndarray] = []
        names: list[str] = []
        for col in s.continuous:
            mean, std = self.continuous_stats[col]
            vals = _numeric(df, col)
            columns.append(np.zeros(n) if std == 0.0 else (vals - mean) / std)
            names.append(col)
        for col in s.categorical:
            levels = self.categorical_levels[col]
            raw = df[col].to_numpy()
            for level in levels:
                columns.append((raw == level).astype(float))
                names.append(f"{col}={level}")
        features = (
            np.column_stack(columns) if columns else np.zeros((n, 0))
        )
        labels = np.where(df[s.label].to_numpy() == s.positive_label, 1, -1)
        sensitive = {}
        attributes = []
        for col in s.sensitive:
            levels = self.sensitive_levels[col]
            lookup = {v: i for i, v in enumerate(levels)}
            raw = df[col].to_numpy()
            unknown = [v for v in np.unique(raw) if v not in lookup]
            if unknown:
                raise SchemaError(f"unseen categories in {col!r}: {unknown}")
            sensitive[col] = np.array([lookup[v] for v in raw], dtype=int)
            attributes.append(Attribute(col, len(levels), levels))
        return Dataset(
            features=features,
            labels=labels,
            sensitive=sensitive,
            attributes=tuple(attributes),
            feature_names=tuple(names),
        )


def _numeric(df: pd.DataFrame, col: str) -> np.ndarray:
    vals = pd.to_numeric(df[col], errors="coerce")
    bad = np.flatnonzero(vals.isna().to_numpy())
    if bad.size:
        row = int(df.index[bad[0]])
        raise ParseError(
            f"non-numeric value {df[col].iloc[bad[0]]!r} in column {col!r} at row {row}",
            row=row,
        )
    return vals.to_numpy(dtype=float)


def load_csv(path, schema: CsvSchema) -> Dataset:
    """Load and encode a CSV, fitting normalization on the loaded data itself."""
    df = load_raw(path, schema)
    return Encoder(schema).fit(df).transform(df)


# ---------------------------------------------------------------------------
# Public benchmark datasets
# ---------------------------------------------------------------------------

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "country", "income",
)
_EDU_PRIMARY = ("Preschool", "1st-4th", "5th-6th", "7th-8th")
_EDU_SECONDARY = ("9th", "10th", "11th", "12th")

ADULT_SCHEMA = CsvSchema(
    label="income",
    positive_label=">50K",
    sensitive=("sex", "race"),
    continuous=("age", "education-num", "capital-gain", "capital-loss", "hours-per-week"),
    categorical=("workclass", "education", "marital-status", "occupation",
                 "relationship", "country"),
)


def preprocess_adult(raw_dir) -> Dataset:
    """Build the income-classification dataset from adult.data + adult.test.

    Both files are concatenated, rows with missing cells dropped, country
    merged to US / non-US, the lowest education levels merged into two
    groups, categoricals one-hot encoded and continuous columns normalized.
    Gender (K=2) and race (K=5) are exposed as sensitive attributes.
    """
    raw_dir = Path(raw_dir)
    train_file = raw_dir / "adult.data"
    test_file = raw_dir / "adult.test"
    for f in (train_file, test_file):
        if not f.exists():
            raise FileNotFoundError(
                f"{f} not found; download the public Adult census files "
                "(adult.data, adult.test) from the UCI Machine Learning "
                f"Repository into {raw_dir}"
            )
    frames = []
    for f, skip in ((train_file, 0), (test_file, 1)):
        frames.append(
            pd.read_csv(f, header=None, names=ADULT_COLUMNS, dtype=str,
                        keep_default_na=False, skipinitialspace=True, skiprows=skip)
        )
    df = pd.concat(frames, ignore_index=True)
    df = df.apply(lambda col: col.str.strip())
    df = df[~(df == "").all(axis=1)]
    df["income"] = df["income"].str.rstrip(".")
    df = df[~df.isin(("?",)).any(axis=1)]
    df["country"] = np.where(df["country"] == "United-States", "US", "Non-US")
    df["education"] = df["education"].replace(
        {lvl: "Primary" for lvl in _EDU_PRIMARY}
        | {lvl: "Secondary-nongrad" for lvl in _EDU_SECONDARY}
    )
    df = df.reset_index(drop=True)
    return Encoder(ADULT_SCHEMA).fit(df).transform(df)


COMPAS_SCHEMA = CsvSchema(
    label="two_year_recid",
    positive_label="0",  # non-recidivism is the positive outcome
    sensitive=("race",),
    continuous=("age", "priors_count"),
    categorical=("sex", "c_charge_degree"),
)


def load_compas(path) -> Dataset:
    """Load the ProPublica recidivism CSV restricted to Black/White defendants.

    Applies the standard record filters (screening-to-arrest window within 30
    days, valid recidivism flag, non-ordinary charge, scored cases); features
    are gender, age, prior-offense count and arrest-charge degree; the
    positive label marks defendants who did not reoffend.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(
            f"{path} not found; download the public ProPublica COMPAS "
            "two-years recidivism CSV and point the config at it"
        )
    df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    needed = ("days_b_screening_arrest", "is_recid", "c_charge_degree", "score_text",
              "race", "sex", "age", "priors_count", "two_year_recid")
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise SchemaError(f"columns missing from {path}: {missing}")
    days = pd.to_numeric(df["days_b_screening_arrest"], errors="coerce")
    df = df[
        days.between(-30, 30)
        & (df["is_recid"] != "-1")
        & (df["c_charge_degree"] != "O")
        & (df["score_text"] != "N/A")
        & df["race"].isin(("African-American", "Caucasian"))
    ].reset_index(drop=True)
    return Encoder(COMPAS_SCHEMA).fit(df).transform(df)


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticParams:
    """Class-conditional Gaussians for features; the sensitive bit follows a
    Bernoulli whose success probability is the positive-class likelihood ratio
    evaluated at the feature vector rotated by ``rotation`` radians."""

    mean_pos: tuple[float, float] = (2.0, 2.0)
    cov_pos: tuple = ((5.0, 1.0), (1.0, 5.0))
    mean_neg: tuple[float, float] = (-2.0, -2.0)
    cov_neg: tuple = ((10.0, 1.0), (1.0, 3.0))
    rotation: float = math.pi / 4
    attribute: str = "group"


def generate_synthetic(n: int, seed: int, params: SyntheticParams | None = None) -> Dataset:
    """Two-feature binary classification data with a correlated sensitive bit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = params or SyntheticParams()
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n) * 2 - 1
    features = np.empty((n, 2))
    pos = labels == 1
    features[pos] = rng.multivariate_normal(p.mean_pos, p.cov_pos, size=int(pos.sum()))
    features[~pos] = rng.multivariate_normal(p.mean_neg, p.cov_neg, size=int((~pos).sum()))
    theta = p.rotation
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    rotated = features @ rot.T
    dens_pos = _gaussian_pdf(rotated, p.mean_pos, np.asarray(p.cov_pos))
    dens_neg = _gaussian_pdf(rotated, p.mean_neg, np.asarray(p.cov_neg))
    prob = dens_pos / (dens_pos + dens_neg)
    codes = (rng.uniform(size=n) < prob).astype(int)
    return Dataset(
        features=features,
        labels=labels,
        sensitive={p.attribute: codes},
        attributes=(Attribute(p.attribute, 2, ("0", "1")),),
        feature_names=("x0", "x1"),
    )


def _gaussian_pdf(x: np.ndarray, mean, cov: np.ndarray) -> np.ndarray:
    diff = x - np.asarray(mean)
    inv = np.linalg.inv(cov)
    quad = np.einsum("ni,ij,nj->n", diff, inv, diff)
    norm = 2 * math.pi * math.sqrt(np.linalg.det(cov))
    return np.exp(-0.5 * quad) / norm


# ---------------------------------------------------------------------------
# Canonical encoded-dataset files
# ---------------------------------------------------------------------------


def save_canonical(dataset: Dataset, path) -> None:
    """Write an encoded dataset as CSV plus a JSON sidecar with the schema.

    Floats are written with shortest round-trip repr so reloading reproduces
    the dataset bit for bit.
    """
    path = Path(path)
    sidecar = path.with_suffix(".json")
    header = [*dataset.feature_names,
              *(a.name for a in dataset.attributes), "label"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for j in range(len(dataset)):
            row = [repr(float(v)) for v in dataset.features[j]]
            row += [str(int(dataset.sensitive[a.name][j])) for a in dataset.attributes]
            row.append(str(int(dataset.labels[j])))
            fh.write(",".join(row) + "\n")
    meta = {
        "feature_names": list(dataset.feature_names),
        "attributes": [
            {"name": a.name, "cardinality": a.cardinality,
             "categories": list(a.categories)}
            for a in dataset.attributes
        ],
    }
    sidecar.write_text(json.dumps(meta, indent=2))


def load_canonical(path) -> Dataset:
    """Reload a dataset written by :func:`save_canonical`."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    df = pd.read_csv(path, float_precision="round_trip")
    feature_names = meta["feature_names"]
    attributes = tuple(
        Attribute(a["name"], a["cardinality"], tuple(a.get("categories", ())))
        for a in meta["attributes"]
    )
    return Dataset(
        features=df[feature_names].to_numpy(dtype=float)
        if feature_names else np.zeros((len(df), 0)),
        labels=df["label"].to_numpy(dtype=int),
        sensitive={a.name: df[a.name].to_numpy(dtype=int) for a in attributes},
        attributes=attributes,
        feature_names=tuple(feature_names),
    )

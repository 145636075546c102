"""Data model and ingestion for precinct results and voter files.

Precinct results arrive as one row per (county, precinct, candidate); the
voter file has one row per registered voter. Joining them and binarizing the
vote to the two major candidates yields a :class:`Dataset` of precincts, each
holding the covariate matrix of its voters and the observed count ``D`` of
votes for the modeled candidate out of ``T``.
"""
from __future__ import annotations

import configparser
import csv
import logging
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import FormatError, InputError, SplitError, ValidationError
from .glm import LogisticParams, ModelParams, NeuralParams, precinct_probs

logger = logging.getLogger(__name__)

DEM_CANDIDATE = "HILLARY CLINTON"
REP_CANDIDATE = "DONALD TRUMP"

TAG_NONE, TAG_DEM, TAG_REP = 0, 1, 2
TAG_NAMES = {TAG_NONE: "none", TAG_DEM: "dem_primary", TAG_REP: "rep_primary"}


def normalize_name(text: str) -> str:
    """Trim, uppercase and collapse internal whitespace."""
    return re.sub(r"\s+", " ", text.strip()).upper()


@dataclass(frozen=True)
class PrecinctResult:
    county: str
    precinct: str
    dem_votes: int = 0
    rep_votes: int = 0
    other_votes: int = 0

    @property
    def key(self) -> tuple[str, str]:
        return (self.county, self.precinct)


@dataclass(frozen=True)
class VoterRecord:
    county: str
    precinct: str
    voter_id: str
    covariates: np.ndarray
    tag: int = TAG_NONE

    @property
    def key(self) -> tuple[str, str]:
        return (self.county, self.precinct)


@dataclass(frozen=True, eq=False)
class Precinct:
    county: str
    name: str
    X: np.ndarray
    D: int
    T: int
    voter_ids: tuple[str, ...] | None = None
    tags: np.ndarray | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        object.__setattr__(self, "X", X)
        if not 0 <= self.D <= self.T:
            raise ValidationError(f"precinct {self.key}: need 0 <= D <= T, got D={self.D} T={self.T}")
        if self.voter_ids is not None and len(self.voter_ids) != X.shape[0]:
            raise ValidationError(f"precinct {self.key}: voter id count does not match covariate rows")

    @property
    def key(self) -> tuple[str, str]:
        return (self.county, self.name)

    @property
    def n_voters(self) -> int:
        return self.X.shape[0]

    @property
    def mismatch_ratio(self) -> float:
        """Voter-file rows per recorded vote; 1.0 means the two agree."""
        return self.n_voters / self.T if self.T else float("inf")

    @property
    def share(self) -> float:
        return self.D / self.T if self.T else float("nan")


@dataclass(frozen=True, eq=False)
class Dataset:
    precincts: tuple[Precinct, ...]
    feature_names: tuple[str, ...]
    scaling: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "precincts", tuple(self.precincts))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        d = len(self.feature_names)
        for pr in self.precincts:
            if pr.X.shape[1] != d:
                raise ValidationError(
                    f"precinct {pr.key} has {pr.X.shape[1]} covariates, dataset declares {d}")

    def __len__(self) -> int:
        return len(self.precincts)

    def __iter__(self) -> Iterator[Precinct]:
        return iter(self.precincts)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_voters(self) -> int:
        return int(sum(p.n_voters for p in self.precincts))

    @cached_property
    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All voters' covariates in one matrix, plus precinct start offsets."""
        if not self.precincts:
            return np.empty((0, self.n_features)), np.empty(0, dtype=np.intp)
        sizes = np.array([p.n_voters for p in self.precincts], dtype=np.intp)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        return np.vstack([p.X for p in self.precincts]), offsets

    @cached_property
    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        D = np.array([p.D for p in self.precincts], dtype=float)
        T = np.array([p.T for p in self.precincts], dtype=float)
        return D, T

    @property
    def counties(self) -> list[str]:
        return list(OrderedDict.fromkeys(p.county for p in self.precincts))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.precincts[i] for i in indices), self.feature_names,
                       self.scaling, {})

    def voter_probs(self, params: ModelParams) -> np.ndarray:
        """Predicted probabilities of all voters, stacked in precinct order."""
        X, _ = self.stacked
        if X.shape[0] == 0:
            return np.empty(0)
        return precinct_probs(params, X)


# ---------------------------------------------------------------------------
# precinct results


def _open_csv(path) -> tuple[csv.DictReader, object]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    fh = open(path, newline="", encoding="utf-8-sig")
    return csv.DictReader(fh), fh


def _require_columns(reader: csv.DictReader, required: Sequence[str], path) -> None:
    header = [c.strip() for c in (reader.fieldnames or [])]
    reader.fieldnames = header
    missing = [c for c in required if c not in header]
    if missing:
        raise FormatError(f"{path}: missing required column(s) {', '.join(missing)}")


def load_precinct_results(path, dem_candidate: str = DEM_CANDIDATE,
                          rep_candidate: str = REP_CANDIDATE) -> list[PrecinctResult]:
    """Aggregate candidate rows of a results CSV into per-precinct counts.

    Candidate names are matched exactly (after trimming surrounding space);
    every other candidate counts toward ``other_votes``.
    """
    reader, fh = _open_csv(path)
    with fh:
        _require_columns(reader, ["county", "precinct", "candidate", "votes"], path)
        totals: dict[tuple[str, str], list[int]] = OrderedDict()
        bad_rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                votes = int(str(row["votes"]).strip())
            except ValueError:
                bad_rows.append((lineno, row["votes"]))
                continue
            if votes < 0:
                bad_rows.append((lineno, votes))
                continue
            key = (normalize_name(row["county"] or ""), normalize_name(row["precinct"] or ""))
            counts = totals.setdefault(key, [0, 0, 0])
            cand = (row["candidate"] or "").strip()
            if cand == dem_candidate:
                counts[0] += votes
            elif cand == rep_candidate:
                counts[1] += votes
            else:
                counts[2] += votes
    if bad_rows:
        listing = "; ".join(f"line {ln}: votes={v!r}" for ln, v in bad_rows[:20])
        raise ValidationError(f"{path}: invalid vote counts ({len(bad_rows)} rows): {listing}")
    return [PrecinctResult(c, p, *v) for (c, p), v in totals.items()]


# ---------------------------------------------------------------------------
# voter file and feature spec


@dataclass(frozen=True)
class FeatureRule:
    name: str
    kind: str  # indicator | numeric
    column: str
    values: tuple[str, ...] = ()
    offset: float = 0.0
    divisor: float = 1.0
    standardize: bool = False
    optional: bool = False
    source: str = "voter"  # voter | county


@dataclass(frozen=True)
class FeatureSpec:
    """Declarative mapping from raw CSV columns to model features, in output order."""

    features: tuple[FeatureRule, ...]
    county_file: Path | None = None
    filter_column: str | None = None
    filter_values: tuple[str, ...] = ()
    tag_column: str | None = None
    tag_dem_values: tuple[str, ...] = ()
    tag_rep_values: tuple[str, ...] = ()

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)


_RULE_KEYS = {"kind", "column", "values", "offset", "divisor", "standardize", "optional", "source"}
_SECTION_KEYS = {
    "county_file": {"path"},
    "filter": {"column", "values"},
    "tags": {"column", "dem_values", "rep_values"},
}


def _split_list(text: str) -> tuple[str, ...]:
    return tuple(normalize_name(v) for v in text.split(",") if v.strip())


def load_feature_spec(path) -> FeatureSpec:
    """Read a feature spec INI file.

    Each ``[feature:<name>]`` section declares one output feature; section
    order is output order. Optional sections: ``[county_file]`` (``path``),
    ``[filter]`` (``column``, ``values``) and ``[tags]`` (``column``,
    ``dem_values``, ``rep_values``). Unknown sections or keys are errors.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"feature spec not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    rules = []
    kwargs: dict = {}
    for section in cp.sections():
        sec = cp[section]
        if section.startswith("feature:"):
            unknown = set(sec) - _RULE_KEYS
            if unknown:
                raise FormatError(f"{path} [{section}]: unknown key(s) {sorted(unknown)}")
            name = section.split(":", 1)[1].strip()
            kind = sec.get("kind", "numeric").strip()
            if kind not in ("indicator", "numeric"):
                raise FormatError(f"{path} [{section}]: kind must be indicator or numeric")
            if "column" not in sec:
                raise FormatError(f"{path} [{section}]: missing 'column'")
            source = sec.get("source", "voter").strip()
            if source not in ("voter", "county"):
                raise FormatError(f"{path} [{section}]: source must be voter or county")
            try:
                rule = FeatureRule(
                    name=name, kind=kind, column=sec["column"].strip(),
                    values=_split_list(sec.get("values", "")),
                    offset=sec.getfloat("offset", 0.0),
                    divisor=sec.getfloat("divisor", 1.0),
                    standardize=sec.getboolean("standardize", False),
                    optional=sec.getboolean("optional", kind == "indicator"),
                    source=source,
                )
            except ValueError as exc:
                raise FormatError(f"{path} [{section}]: {exc}") from exc
            if kind == "indicator" and not rule.values:
                raise FormatError(f"{path} [{section}]: indicator needs 'values'")
            if rule.divisor == 0:
                raise FormatError(f"{path} [{section}]: divisor must be non-zero")
            rules.append(rule)
        elif section in _SECTION_KEYS:
            unknown = set(sec) - _SECTION_KEYS[section]
            if unknown:
                raise FormatError(f"{path} [{section}]: unknown key(s) {sorted(unknown)}")
            if section == "county_file":
                kwargs["county_file"] = (path.parent / sec["path"].strip()).resolve()
            elif section == "filter":
                kwargs["filter_column"] = sec["column"].strip()
                kwargs["filter_values"] = _split_list(sec.get("values", ""))
            else:
                kwargs["tag_column"] = sec["column"].strip()
                kwargs["tag_dem_values"] = _split_list(sec.get("dem_values", ""))
                kwargs["tag_rep_values"] = _split_list(sec.get("rep_values", ""))
        else:
            raise FormatError(f"{path}: unknown section [{section}]")
    if not rules:
        raise FormatError(f"{path}: no [feature:<name>] sections")
    return FeatureSpec(tuple(rules), **kwargs)


@dataclass
class VoterFile:
    """Voter records plus the resolved feature scaling."""

    records: list[VoterRecord]
    feature_names: tuple[str, ...]
    scaling: dict
    report: dict

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[VoterRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _load_county_table(path: Path) -> dict[str, dict[str, str]]:
    reader, fh = _open_csv(path)
    with fh:
        _require_columns(reader, ["county"], path)
        return {normalize_name(row["county"] or ""): row for row in reader}


def load_voter_file(path, spec: FeatureSpec) -> VoterFile:
    """One :class:`VoterRecord` per kept row of a voter-file CSV."""
    county_table = _load_county_table(spec.county_file) if spec.county_file else {}
    reader, fh = _open_csv(path)
    with fh:
        required = ["county", "precinct", "voter_id"]
        required += [r.column for r in spec.features if r.source == "voter" and not r.optional]
        if spec.filter_column:
            required.append(spec.filter_column)
        _require_columns(reader, required, path)
        header = set(reader.fieldnames or [])
        keys, ids, tags, rows = [], [], [], []
        filtered = 0
        missing_county = set()
        for lineno, row in enumerate(reader, start=2):
            if spec.filter_column:
                if normalize_name(row[spec.filter_column] or "") not in spec.filter_values:
                    filtered += 1
                    continue
            county = normalize_name(row["county"] or "")
            crow = county_table.get(county)
            values = []
            for rule in spec.features:
                if rule.source == "county":
                    if crow is None:
                        missing_county.add(county)
                    raw = (crow or {}).get(rule.column)
                else:
                    raw = row.get(rule.column) if rule.column in header else None
                raw = "" if raw is None else str(raw).strip()
                if rule.kind == "indicator":
                    values.append(1.0 if normalize_name(raw) in rule.values else 0.0)
                    continue
                try:
                    x = float(raw)
                    if not np.isfinite(x):
                        raise ValueError
                except ValueError:
                    if rule.optional:
                        values.append(np.nan)
                        continue
                    raise ValidationError(
                        f"{path} line {lineno}: non-numeric value {raw!r} for feature {rule.name!r}"
                    ) from None
                values.append((x - rule.offset) / rule.divisor)
            tag = TAG_NONE
            if spec.tag_column:
                t = normalize_name(row.get(spec.tag_column) or "")
                if t in spec.tag_dem_values:
                    tag = TAG_DEM
                elif t in spec.tag_rep_values:
                    tag = TAG_REP
            keys.append((county, normalize_name(row["precinct"] or "")))
            ids.append((row["voter_id"] or "").strip())
            tags.append(tag)
            rows.append(values)
    if missing_county:
        raise ValidationError(f"{path}: counties missing from county file: {sorted(missing_county)}")
    d = len(spec.features)
    F = np.array(rows, dtype=float).reshape(len(rows), d)
    scaling = {}
    for j, rule in enumerate(spec.features):
        offset, divisor = rule.offset, rule.divisor
        if rule.kind == "numeric" and rule.standardize and F.shape[0] > 0:
            col = F[:, j]
            mean = float(np.nanmean(col)) if np.any(~np.isnan(col)) else 0.0
            std = float(np.nanstd(col)) if np.any(~np.isnan(col)) else 1.0
            std = std if std > 0 else 1.0
            F[:, j] = (col - mean) / std
            # compose with the declared affine map: ((x - o)/s - m)/sd
            offset, divisor = offset + mean * divisor, divisor * std
        scaling[rule.name] = {"offset": offset, "divisor": divisor}
    np.nan_to_num(F, copy=False, nan=0.0)
    records = [VoterRecord(k[0], k[1], i, F[r], t)
               for r, (k, i, t) in enumerate(zip(keys, ids, tags))]
    report = {"voter_rows_loaded": len(records), "voter_rows_filtered": filtered}
    return VoterFile(records, spec.feature_names, scaling, report)


# ---------------------------------------------------------------------------
# join


def binarize(dem: int, rep: int, other: int) -> tuple[int, int]:
    """Return ``(D, T)``: the modeled candidate's major-party share scaled up to all votes.

    ``D`` is rounded half-to-even from ``T * dem / (dem + rep)``.
    """
    if dem + rep < 1:
        raise ValidationError("binarization needs at least one major-party vote")
    T = dem + rep + other
    return round(Fraction(T * dem, dem + rep)), T


def binarize_and_join(results: Sequence[PrecinctResult], voters,
                      feature_names: Sequence[str] | None = None,
                      scaling: dict | None = None) -> Dataset:
    """Join binarized precinct results with voter records into a :class:`Dataset`.

    Precincts present in only one source, or without any major-party vote,
    are dropped and listed in ``Dataset.report``.
    """
    if isinstance(voters, VoterFile):
        feature_names = voters.feature_names if feature_names is None else feature_names
        scaling = voters.scaling if scaling is None else scaling
        base_report = dict(voters.report)
        voters = voters.records
    else:
        base_report = {}
    voters = list(voters)
    if feature_names is None:
        d = voters[0].covariates.size if voters else 0
        feature_names = tuple(f"x{j + 1}" for j in range(d))
    by_key: dict[tuple[str, str], list[VoterRecord]] = OrderedDict()
    for rec in voters:
        by_key.setdefault(rec.key, []).append(rec)

    precincts = []
    dropped_no_voters, dropped_no_major = [], []
    result_keys = set()
    for res in results:
        result_keys.add(res.key)
        recs = by_key.get(res.key)
        if not recs:
            dropped_no_voters.append(res.key)
            continue
        if res.dem_votes + res.rep_votes < 1:
            logger.warning("dropping precinct %s: no major-party votes", res.key)
            dropped_no_major.append(res.key)
            continue
        ids = [r.voter_id for r in recs]
        if len(set(ids)) != len(ids):
            seen, dup = set(), []
            for i in ids:
                if i in seen:
                    dup.append(i)
                seen.add(i)
            raise ValidationError(f"precinct {res.key}: duplicate voter id(s) {sorted(set(dup))[:10]}")
        D, T = binarize(res.dem_votes, res.rep_votes, res.other_votes)
        precincts.append(Precinct(
            county=res.county, name=res.precinct,
            X=np.vstack([r.covariates for r in recs]), D=D, T=T,
            voter_ids=tuple(ids), tags=np.array([r.tag for r in recs], dtype=np.int8)))
    orphan_keys = [k for k in by_key if k not in result_keys]
    orphan_voters = sum(len(by_key[k]) for k in orphan_keys)
    dropped_voters = orphan_voters + sum(len(by_key[k]) for k in dropped_no_major)
    ratios = np.array([p.mismatch_ratio for p in precincts]) if precincts else np.empty(0)
    report = {
        **base_report,
        "precincts_in_results": len(result_keys),
        "precincts_retained": len(precincts),
        "precincts_dropped": len(dropped_no_voters) + len(dropped_no_major) + len(orphan_keys),
        "dropped_no_voter_records": [list(k) for k in dropped_no_voters],
        "dropped_no_major_party_votes": [list(k) for k in dropped_no_major],
        "dropped_voter_file_only": [list(k) for k in orphan_keys],
        "voters_in_input": len(voters),
        "voters_retained": int(sum(p.n_voters for p in precincts)),
        "voters_dropped": dropped_voters,
        "votes_retained": int(sum(p.T for p in precincts)),
        "mismatch_ratio": {
            "min": float(ratios.min()) if ratios.size else None,
            "median": float(np.median(ratios)) if ratios.size else None,
            "max": float(ratios.max()) if ratios.size else None,
            "per_precinct": {f"{p.county}|{p.name}": p.mismatch_ratio for p in precincts},
        },
    }
    return Dataset(tuple(precincts), tuple(feature_names), dict(scaling or {}), report)


# ---------------------------------------------------------------------------
# splitting


def split(dataset: Dataset, mode: str = "precinct", train_frac: float = 0.7,
          seed: int = 0) -> tuple[Dataset, Dataset]:
    """Random train/test split by precinct or by whole county.

    County mode adds shuffled counties to the train side until it first holds
    at least ``train_frac`` of all votes. Both sides keep load order.
    """
    if not 0.0 < train_frac < 1.0:
        raise SplitError(f"train_frac must lie in (0, 1), got {train_frac}")
    n = len(dataset)
    if n < 2:
        raise SplitError("need at least two precincts to split")
    rng = np.random.default_rng(seed)
    if mode == "precinct":
        n_train = min(max(int(round(train_frac * n)), 1), n - 1)
        train_idx = set(rng.permutation(n)[:n_train].tolist())
    elif mode == "county":
        counties = dataset.counties
        if len(counties) < 2:
            raise SplitError("county split needs at least two counties")
        votes = OrderedDict((c, 0) for c in counties)
        for p in dataset.precincts:
            votes[p.county] += p.T
        total = sum(votes.values())
        order = [counties[i] for i in rng.permutation(len(counties))]
        chosen, acc = [], 0
        for c in order:
            chosen.append(c)
            acc += votes[c]
            if acc >= train_frac * total:
                break
        if len(chosen) == len(counties):
            chosen.pop()
        chosen = set(chosen)
        train_idx = {i for i, p in enumerate(dataset.precincts) if p.county in chosen}
    else:
        raise SplitError(f"unknown split mode {mode!r}")
    train = [i for i in range(n) if i in train_idx]
    test = [i for i in range(n) if i not in train_idx]
    return dataset.subset(train), dataset.subset(test)


# ---------------------------------------------------------------------------
# synthetic elections


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a simulated election with known generating parameters.

    Covariates are marginally standard normal; ``precinct_correlation`` is
    the share of their variance that is common to a precinct (the part an
    aggregate-count model can learn from).
    """

    n_precincts: int = 1000
    voters_per_precinct: int | tuple[int, int] = 200
    n_features: int = 3
    model: str = "logistic"
    theta: tuple[float, ...] | None = (0.2, 1.0, -0.5, 0.3)
    hidden_size: int = 3
    neural_scale: float = 1.0
    precinct_correlation: float = 0.9
    n_counties: int = 10
    primary_rate: float = 0.3

    def __post_init__(self):
        if self.n_precincts < 1:
            raise InputError("synthetic spec needs at least one precinct")
        if self.n_features < 1:
            raise InputError("synthetic spec needs at least one covariate")
        lo, hi = self.voter_range
        if lo < 1 or hi < lo:
            raise InputError(f"invalid voters_per_precinct {self.voters_per_precinct!r}")
        if not 0.0 <= self.precinct_correlation <= 1.0:
            raise InputError("precinct_correlation must lie in [0, 1]")
        if not 0.0 <= self.primary_rate <= 1.0:
            raise InputError("primary_rate must lie in [0, 1]")
        if self.n_counties < 1:
            raise InputError("n_counties must be >= 1")
        if self.model not in ("logistic", "neural"):
            raise InputError(f"unknown synthetic model {self.model!r}")
        if self.model == "logistic" and self.theta is not None \
                and len(self.theta) != self.n_features + 1:
            raise InputError(
                f"theta has {len(self.theta)} entries, expected {self.n_features + 1}")

    @property
    def voter_range(self) -> tuple[int, int]:
        v = self.voters_per_precinct
        if isinstance(v, int):
            return v, v
        lo, hi = v
        return int(lo), int(hi)


def _true_params(spec: SyntheticSpec, rng: np.random.Generator) -> ModelParams:
    if spec.model == "logistic":
        if spec.theta is None:
            return LogisticParams(rng.normal(0.0, 1.0, spec.n_features + 1))
        return LogisticParams(spec.theta)
    h, d, s = spec.hidden_size, spec.n_features, spec.neural_scale
    return NeuralParams(rng.normal(0, s, (h, d)), rng.normal(0, s, h),
                        rng.normal(0, 2 * s, h), float(rng.normal(0, s)))


def generate_synthetic(spec: SyntheticSpec, seed: int = 0, return_votes: bool = False):
    """Simulate an election; returns ``(dataset, true_params)``.

    With ``return_votes=True`` a third element holds each voter's simulated
    vote (0/1), stacked in precinct order.
    """
    rng = np.random.default_rng(seed)
    params = _true_params(spec, rng)
    lo, hi = spec.voter_range
    sizes = rng.integers(lo, hi + 1, size=spec.n_precincts)
    n_total = int(sizes.sum())
    d = spec.n_features
    rho = spec.precinct_correlation
    centers = rng.normal(0.0, np.sqrt(rho), (spec.n_precincts, d))
    X = np.repeat(centers, sizes, axis=0) + rng.normal(0.0, np.sqrt(1.0 - rho), (n_total, d))
    p = precinct_probs(params, X)
    votes = (rng.random(n_total) < p).astype(np.int8)
    primary = rng.random(n_total) < spec.primary_rate
    tags = np.where(primary, np.where(votes == 1, TAG_DEM, TAG_REP), TAG_NONE).astype(np.int8)
    county_of = rng.integers(0, spec.n_counties, size=spec.n_precincts)
    width = len(str(spec.n_counties - 1))
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    precincts = []
    for k in range(spec.n_precincts):
        a, b = bounds[k], bounds[k + 1]
        precincts.append(Precinct(
            county=f"C{county_of[k]:0{width}d}", name=f"P{k:05d}", X=X[a:b],
            D=int(votes[a:b].sum()), T=int(b - a),
            voter_ids=tuple(f"V{k:05d}-{i:04d}" for i in range(b - a)), tags=tags[a:b]))
    names = tuple(f"x{j + 1}" for j in range(d))
    scaling = {n: {"offset": 0.0, "divisor": 1.0} for n in names}
    report = {"synthetic_seed": seed, "voters": n_total, "precincts": spec.n_precincts}
    dataset = Dataset(tuple(precincts), names, scaling, report)
    if return_votes:
        return dataset, params, votes
    return dataset, params


__all__ = [
    "Dataset", "FeatureRule", "FeatureSpec", "Precinct", "PrecinctResult", "SyntheticSpec",
    "VoterFile", "VoterRecord", "binarize", "binarize_and_join", "generate_synthetic",
    "load_feature_spec", "load_precinct_results", "load_voter_file", "normalize_name",
    "split",
]

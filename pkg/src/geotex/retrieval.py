"""Dataset ingestion, signature database, and retrieval evaluation.

Signatures live in a versioned JSON database with a content checksum.
Queries are ranked either by a direct per-subband measure or by
shortest-path distance over the signature graph, and retrieval quality
is summarized as the average retrieval rate (mean fraction of
same-class items among the top K, every item serving as a query) plus
precision/recall curves.
"""

from __future__ import annotations

import enum
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .distributions import GammaParams, WeibullParams
from .divergences import kld, skld
from .features import Signature
from .geometry import Family, gd_skld
from .graph import (DistanceMatrix, EdgeWeight, ShortestPathResult,
                    build_distance_matrix, floyd_warshall)


class StructureMismatch(ValueError):
    """Two signatures do not share family, level count, and layout."""


class EmptyDataset(ValueError):
    """No usable items found under the dataset root."""


class MissingSignatures(ValueError):
    """The database lacks signatures for some dataset items."""


class VersionMismatch(ValueError):
    """Database format version or level configuration does not match."""


class CorruptFile(ValueError):
    """Database file failed its checksum or structural checks."""


class SingletonClassWarning(UserWarning):
    """A class with a single member was excluded from the index."""


class Measure(enum.Enum):
    """Per-subband pairwise measure."""

    KLD = "kld"
    SKLD = "skld"
    GDSKLD = "gdskld"


class Aggregation(enum.Enum):
    """How per-subband measures combine into one signature distance."""

    SUM = "sum"
    L2 = "l2"


class Method(enum.Enum):
    """Ranking strategy for retrieval evaluation.

    The first three rank by the direct signature distance of the same
    name; GD_FLOYD ranks by shortest-path distance over the signature
    graph.
    """

    KLD = "kld"
    SKLD = "skld"
    GDSKLD = "gdskld"
    GD_FLOYD = "gdfloyd"


class Layout(enum.Enum):
    DIR_PER_CLASS = "dir"
    PREFIX_MAP = "prefix"


_IMAGE_EXTS = (".png", ".pgm")
_MANIFEST_NAME = "prefixes.map"


class DatasetItem(NamedTuple):
    id: str
    path: str
    label: str


@dataclass
class DatasetIndex:
    """Ordered dataset items with class labels.

    Items keep the order they were given in (ingestion sorts them
    lexicographically).  Every class must have at least 2 members;
    ingestion warns about and drops singleton classes before
    constructing the index.
    """

    items: List[DatasetItem]

    def __post_init__(self):
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("item ids must be unique")
        counts = self.class_counts()
        if not counts:
            raise ValueError("index needs at least one item")
        for label, c in counts.items():
            if c < 2:
                raise ValueError("class %r has %d member(s); need >= 2"
                                 % (label, c))

    @property
    def n_total(self) -> int:
        return len(self.items)

    def class_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for it in self.items:
            counts[it.label] = counts.get(it.label, 0) + 1
        return counts

    @property
    def n_r(self) -> int:
        """Per-class member count when uniform across classes."""
        counts = set(self.class_counts().values())
        if len(counts) != 1:
            raise ValueError("per-class counts are not uniform; "
                             "use class_counts()")
        return counts.pop()


def ingest_dataset(root_path, layout: Layout = Layout.DIR_PER_CLASS) -> DatasetIndex:
    """Scan a dataset directory into a deterministic index.

    DIR_PER_CLASS treats each subdirectory as a class.  PREFIX_MAP
    reads a manifest `prefixes.map` (lines of "prefix class", '#'
    comments allowed) and assigns each file directly under the root to
    the class of its longest matching filename prefix; unmatched files
    are skipped.  Classes left with a single member are dropped with a
    SingletonClassWarning.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise NotADirectoryError("dataset root %s is not a directory" % root)
    layout = Layout(layout) if not isinstance(layout, Layout) else layout
    items: List[DatasetItem] = []
    if layout is Layout.DIR_PER_CLASS:
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            for f in sorted(p for p in sub.iterdir()
                            if p.suffix.lower() in _IMAGE_EXTS):
                items.append(DatasetItem(id="%s/%s" % (sub.name, f.name),
                                         path=str(f), label=sub.name))
    else:
        manifest = root / _MANIFEST_NAME
        if not manifest.is_file():
            raise FileNotFoundError("prefix layout needs a %s manifest in %s"
                                    % (_MANIFEST_NAME, root))
        prefixes: List[tuple] = []
        for line in manifest.read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError("bad manifest line %r in %s"
                                 % (line, manifest))
            prefixes.append((parts[0], parts[1]))
        prefixes.sort(key=lambda pc: len(pc[0]), reverse=True)
        for f in sorted(p for p in root.iterdir()
                        if p.is_file() and p.suffix.lower() in _IMAGE_EXTS):
            for prefix, label in prefixes:
                if f.name.startswith(prefix):
                    items.append(DatasetItem(id=f.name, path=str(f),
                                             label=label))
                    break
    counts: Dict[str, int] = {}
    for it in items:
        counts[it.label] = counts.get(it.label, 0) + 1
    for label in sorted(c for c, n in counts.items() if n < 2):
        warnings.warn("class %r has a single member; excluded" % label,
                      SingletonClassWarning)
    items = [it for it in items if counts[it.label] >= 2]
    if not items:
        raise EmptyDataset("no usable items under %s" % root)
    if len({it.label for it in items}) < 2:
        raise EmptyDataset("fewer than 2 usable classes under %s" % root)
    return DatasetIndex(items=items)


@dataclass(frozen=True)
class DBConfig:
    family: Family
    levels: int
    edge_weight: EdgeWeight = EdgeWeight.SQRT_TWO_SKLD
    aggregation: Aggregation = Aggregation.SUM

    def __post_init__(self):
        if not 1 <= self.levels <= 5:
            raise ValueError("levels must be in 1..5, got %d" % self.levels)


@dataclass
class SignatureDB:
    """Signatures keyed by item id, plus their class labels.

    The shortest-path closure over the signature graph is cached and
    dropped whenever a signature is added or replaced.
    """

    config: DBConfig
    signatures: Dict[str, Signature] = field(default_factory=dict)
    classes: Dict[str, str] = field(default_factory=dict)
    _cache: Dict[tuple, ShortestPathResult] = field(default_factory=dict,
                                                    repr=False)

    def add(self, item_id: str, class_label: str, sig: Signature) -> None:
        if sig.family is not self.config.family:
            raise VersionMismatch("signature family %s does not match db "
                                  "config %s" % (sig.family.value,
                                                 self.config.family.value))
        if sig.levels != self.config.levels:
            raise VersionMismatch("signature has %d levels, db expects %d"
                                  % (sig.levels, self.config.levels))
        self.signatures[item_id] = sig
        self.classes[item_id] = class_label
        self._cache.clear()

    def closure(self, ids: Sequence[str]) -> ShortestPathResult:
        """Floyd-Warshall closure of the signature graph over `ids`."""
        key = (self.config.edge_weight, tuple(ids))
        if key not in self._cache:
            sigs = [self.signatures[i] for i in ids]
            D = build_distance_matrix(sigs, edge_weight=self.config.edge_weight,
                                      labels=list(ids))
            self._cache[key] = floyd_warshall(D)
        return self._cache[key]


def signature_distance(a: Signature, b: Signature, measure: Measure,
                       aggregation: Aggregation = Aggregation.SUM) -> float:
    """Aggregate a per-subband measure over two signatures.

    SUM adds the per-subband values (KLD keeps its direction, first
    argument as source); L2 takes the root of the sum of squares.
    """
    if (a.family is not b.family or a.levels != b.levels
            or len(a.params) != len(b.params)):
        raise StructureMismatch(
            "signatures disagree: %s/%d levels/%d entries vs %s/%d/%d"
            % (a.family.value, a.levels, len(a.params),
               b.family.value, b.levels, len(b.params)))
    measure = Measure(measure) if not isinstance(measure, Measure) else measure
    aggregation = (Aggregation(aggregation)
                   if not isinstance(aggregation, Aggregation) else aggregation)
    if measure is Measure.KLD:
        vals = [kld(pa, pb) for pa, pb in zip(a.params, b.params)]
    elif measure is Measure.SKLD:
        vals = [skld(pa, pb) for pa, pb in zip(a.params, b.params)]
    else:
        vals = [gd_skld(pa, pb) for pa, pb in zip(a.params, b.params)]
    if aggregation is Aggregation.SUM:
        return float(sum(vals))
    return float(np.sqrt(sum(v * v for v in vals)))


@dataclass
class PRCurve:
    """Precision/recall at every retrieval depth N = 1..N_t."""

    method: Method
    n: np.ndarray
    precision: np.ndarray
    recall: np.ndarray


@dataclass
class RetrievalReport:
    method: Method
    k: int
    arr: float
    n_q: Dict[str, int]
    include_query: bool
    pr: Optional[PRCurve] = None

    def __post_init__(self):
        if not 0.0 <= self.arr <= 1.0 + 1e-12:
            raise ValueError("ARR %g outside [0, 1]" % self.arr)


def _check_signatures(db: SignatureDB, index: DatasetIndex) -> None:
    missing = [it.id for it in index.items if it.id not in db.signatures]
    if missing:
        raise MissingSignatures("no signatures for %d item(s), e.g. %s"
                                % (len(missing), missing[:3]))
    for item_id, sig in db.signatures.items():
        if sig.levels != db.config.levels:
            raise VersionMismatch(
                "signature %r has %d levels, db config says %d"
                % (item_id, sig.levels, db.config.levels))


def _distance_table(db: SignatureDB, index: DatasetIndex,
                    method: Method) -> np.ndarray:
    ids = [it.id for it in index.items]
    if method is Method.GD_FLOYD:
        return db.closure(ids).dist
    sigs = [db.signatures[i] for i in ids]
    measure = Measure(method.value)
    n = len(sigs)
    d = np.zeros((n, n))
    symmetric = measure is not Measure.KLD
    for i in range(n):
        for j in range(i + 1 if symmetric else 0, n):
            if i == j:
                continue
            d[i, j] = signature_distance(sigs[i], sigs[j], measure,
                                         db.config.aggregation)
            if symmetric:
                d[j, i] = d[i, j]
    return d


def _rankings(d: np.ndarray, ids: List[str], qi: int,
              include_query: bool) -> List[int]:
    cand = [j for j in range(len(ids)) if include_query or j != qi]
    return sorted(cand, key=lambda j: (d[qi, j], ids[j]))


def evaluate(db: SignatureDB, index: DatasetIndex, method: Method,
             K: Optional[int] = None, include_query: bool = True,
             levels: Optional[int] = None) -> RetrievalReport:
    """Run every item as a query and average the top-K hit rates.

    The reported number is the mean over queries of n_q(K) / N_R where
    n_q counts same-class items among the K nearest and N_R is the
    query's class size.  With `include_query` (the default) the query
    itself participates and counts as a hit at rank 1.  `levels`, when
    given, asserts the expected decomposition depth of the database.
    """
    method = Method(method) if not isinstance(method, Method) else method
    if levels is not None and levels != db.config.levels:
        raise VersionMismatch("database has %d levels, expected %d"
                              % (db.config.levels, levels))
    _check_signatures(db, index)
    counts = index.class_counts()
    if K is None:
        K = max(counts.values())
    if K < 1:
        raise ValueError("K must be >= 1")
    ids = [it.id for it in index.items]
    d = _distance_table(db, index, method)
    n_q: Dict[str, int] = {}
    total = 0.0
    for qi, item in enumerate(index.items):
        order = _rankings(d, ids, qi, include_query)
        hits = sum(1 for j in order[:K]
                   if index.items[j].label == item.label)
        n_q[item.id] = hits
        total += hits / counts[item.label]
    return RetrievalReport(method=method, k=K, arr=total / index.n_total,
                           n_q=n_q, include_query=include_query)


def precision_recall(db: SignatureDB, index: DatasetIndex, method: Method,
                     include_query: bool = True) -> PRCurve:
    """Precision and recall averaged over all queries, at every depth."""
    method = Method(method) if not isinstance(method, Method) else method
    _check_signatures(db, index)
    counts = index.class_counts()
    ids = [it.id for it in index.items]
    d = _distance_table(db, index, method)
    depth = index.n_total if include_query else index.n_total - 1
    precision = np.zeros(depth)
    recall = np.zeros(depth)
    for qi, item in enumerate(index.items):
        order = _rankings(d, ids, qi, include_query)
        same = np.array([index.items[j].label == item.label for j in order],
                        dtype=np.float64)
        cum = np.cumsum(same)
        n = np.arange(1, depth + 1)
        precision += cum / n
        recall += cum / counts[item.label]
    m = index.n_total
    return PRCurve(method=method, n=np.arange(1, depth + 1),
                   precision=precision / m, recall=recall / m)


_DB_FORMAT = "geotex-signature-db"
_DB_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, bool):
        raise TypeError("unexpected bool in payload")
    if isinstance(x, int):
        return "%d" % x
    if isinstance(x, float):
        return "%.17g" % x
    raise TypeError("unexpected %r in payload" % type(x))


def _serialize_payload(payload: dict) -> str:
    """Canonical JSON text of the database payload.

    Key order is fixed, floats carry 17 significant digits (enough to
    round-trip binary doubles exactly), so serializing a parsed
    payload reproduces the original text byte for byte.
    """
    cfg = payload["config"]
    parts = ['{"format":%s,"version":%s'
             % (json.dumps(payload["format"]), _fmt(payload["version"]))]
    parts.append(',"config":{"family":%s,"levels":%s,"edge_weight":%s,'
                 '"aggregation":%s}'
                 % (json.dumps(cfg["family"]), _fmt(cfg["levels"]),
                    json.dumps(cfg["edge_weight"]),
                    json.dumps(cfg["aggregation"])))
    sig_parts = []
    for entry in payload["signatures"]:
        pairs = ",".join("[%s,%s]" % (_fmt(float(s)), _fmt(float(t)))
                         for s, t in entry["params"])
        sig_parts.append('{"id":%s,"class":%s,"params":[%s]}'
                         % (json.dumps(entry["id"]),
                            json.dumps(entry["class"]), pairs))
    parts.append(',"signatures":[%s]}' % ",".join(sig_parts))
    return "".join(parts)


def save_db(db: SignatureDB, path) -> None:
    """Write the database as checksummed JSON; ids are sorted, so the
    bytes depend only on content."""
    entries = []
    for item_id in sorted(db.signatures):
        sig = db.signatures[item_id]
        entries.append({
            "id": item_id,
            "class": db.classes.get(item_id, ""),
            "params": [[p.alpha, p.beta] if isinstance(p, GammaParams)
                       else [p.lam, p.mu] for p in sig.params],
        })
    payload = {
        "format": _DB_FORMAT,
        "version": _DB_VERSION,
        "config": {
            "family": db.config.family.value,
            "levels": db.config.levels,
            "edge_weight": db.config.edge_weight.value,
            "aggregation": db.config.aggregation.value,
        },
        "signatures": entries,
    }
    text = _serialize_payload(payload)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('{"payload":%s,"checksum":"%s"}\n' % (text, digest))


def load_db(path) -> SignatureDB:
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        obj = json.loads(raw)
        payload = obj["payload"]
        stored = obj["checksum"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptFile("cannot parse %s: %s" % (path, exc)) from exc
    if payload.get("format") != _DB_FORMAT:
        raise CorruptFile("%s is not a signature database" % path)
    if payload.get("version") != _DB_VERSION:
        raise VersionMismatch("unsupported database version %r"
                              % payload.get("version"))
    try:
        text = _serialize_payload(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile("malformed payload in %s: %s" % (path, exc)) from exc
    if hashlib.sha256(text.encode("utf-8")).hexdigest() != stored:
        raise CorruptFile("checksum mismatch in %s" % path)
    cfg = payload["config"]
    family = Family(cfg["family"])
    config = DBConfig(family=family, levels=int(cfg["levels"]),
                      edge_weight=EdgeWeight(cfg["edge_weight"]),
                      aggregation=Aggregation(cfg["aggregation"]))
    make = (lambda s, t: GammaParams(alpha=s, beta=t)) \
        if family is Family.GAMMA else (lambda s, t: WeibullParams(lam=s, mu=t))
    db = SignatureDB(config=config)
    for entry in payload["signatures"]:
        params = tuple(make(float(s), float(t)) for s, t in entry["params"])
        sig = Signature(family=family, levels=config.levels, params=params)
        db.add(entry["id"], entry["class"], sig)
    return db


def index_from_db(db: SignatureDB) -> DatasetIndex:
    """Rebuild a DatasetIndex from the class labels stored in a db."""
    items = [DatasetItem(id=i, path="", label=db.classes.get(i, ""))
             for i in sorted(db.signatures)]
    return DatasetIndex(items=items)

"""Batch command line around the texture-geometry pipeline.

Subcommands: extract (dataset -> signature db), evaluate (db -> ARR and
precision/recall reports), synth (seeded synthetic texture dataset),
geo (pairwise geometry report), fw (shortest-path closure of a matrix
file), validate (metricity report of a matrix file).

Exit codes: 0 success, 2 IO error, 3 extraction failure, 4 config or
database mismatch, 5 geodesic solver non-convergence.  Diagnostics go
to stderr; stdout carries data and tables only.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .distributions import GammaParams
from .divergences import kld, skld
from .features import Signature, extract_signature, load_image
from .geometry import (Family, GeodesicResult, NoConvergence, ParamPath,
                       geodesic_distance_bvp, make_params, path_length)
from .graph import (DistanceMatrix, EdgeWeight, floyd_warshall,
                    load_matrix_binary, load_matrix_csv, save_matrix_binary,
                    save_matrix_csv, validate_metricity)
from .retrieval import (Aggregation, CorruptFile, DatasetIndex, DBConfig,
                        EmptyDataset, Layout, Measure, Method,
                        MissingSignatures, SignatureDB, StructureMismatch,
                        VersionMismatch, evaluate, index_from_db,
                        ingest_dataset, load_db, precision_recall, save_db)

EXIT_OK = 0
EXIT_IO = 2
EXIT_EXTRACT = 3
EXIT_CONFIG = 4
EXIT_SOLVER = 5

_FMT = "%.9g"


@dataclass
class RunConfig:
    """Validated knobs shared by the subcommands."""

    family: Family = Family.GAMMA
    levels: int = 3
    measure: Measure = Measure.SKLD
    edge_weight: EdgeWeight = EdgeWeight.SQRT_TWO_SKLD
    aggregation: Aggregation = Aggregation.SUM
    include_query: bool = True
    k: Optional[int] = None
    seed: int = 0
    workers: int = 0
    paths: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.levels <= 5:
            raise ValueError("levels must be in 1..5, got %d" % self.levels)
        if self.k is not None and self.k < 1:
            raise ValueError("K must be >= 1, got %d" % self.k)
        if self.workers < 0:
            raise ValueError("workers must be >= 0")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


# Keys a config file may set, with their converters.  Flags given on
# the command line win over the file.
_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def _to_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError("not a boolean: %r" % s)


_CONFIG_KEYS = {
    "family": str, "levels": int, "measure": str, "edge_weight": str,
    "aggregation": str, "include_query": _to_bool, "k": int, "seed": int,
    "workers": int, "methods": str, "dataset": str, "db": str, "out": str,
    "layout": str, "skip_bad": _to_bool, "classes": int, "per_class": int,
    "size": int, "spread": float, "steps": int,
}


def _apply_config_file(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if path is None:
        return
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8")
                                  .splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("%s:%d: expected key=value, got %r"
                             % (path, lineno, line))
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError("%s:%d: unknown key %r" % (path, lineno, key))
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, _CONFIG_KEYS[key](value.strip()))


def _pool_size(workers: Optional[int]) -> int:
    if workers in (None, 0):
        return os.cpu_count() or 1
    return workers


def _extract_worker(job: Tuple[str, str, str, int]):
    """Fit one image; returns (id, signature, error-or-None).

    Module level so process pools can pickle it.
    """
    item_id, path, family_value, levels = job
    try:
        sig = extract_signature(load_image(path), Family(family_value), levels)
        return item_id, sig, None
    except Exception as exc:  # collected and reported by the parent
        return item_id, None, "%s: %s" % (type(exc).__name__, exc)


def cmd_extract(args: argparse.Namespace) -> int:
    cfg = RunConfig(family=Family(args.family or "gamma"),
                    levels=args.levels if args.levels is not None else 3,
                    edge_weight=EdgeWeight(args.edge_weight or "sqrt2skld"),
                    aggregation=Aggregation(args.aggregation or "sum"),
                    workers=args.workers if args.workers is not None else 0)
    index = ingest_dataset(args.dataset, Layout(args.layout or "dir"))
    jobs = [(it.id, it.path, cfg.family.value, cfg.levels)
            for it in index.items]
    nproc = _pool_size(cfg.workers)
    if nproc == 1 or len(jobs) == 1:
        results = [_extract_worker(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=nproc) as ex:
            results = list(ex.map(_extract_worker, jobs))
    labels = {it.id: it.label for it in index.items}
    db = SignatureDB(config=DBConfig(family=cfg.family, levels=cfg.levels,
                                     edge_weight=cfg.edge_weight,
                                     aggregation=cfg.aggregation))
    failures: List[str] = []
    for i, (item_id, sig, error) in enumerate(results, start=1):
        if error is None:
            db.add(item_id, labels[item_id], sig)
            _err("extracted %s (%d/%d)" % (item_id, i, len(results)))
        else:
            failures.append(item_id)
            _err("FAILED %s: %s" % (item_id, error))
    if failures and not args.skip_bad:
        _err("%d image(s) failed; rerun with --skip-bad to drop them"
             % len(failures))
        return EXIT_EXTRACT
    save_db(db, args.out)
    _err("wrote %d signatures to %s" % (len(db.signatures), args.out))
    return EXIT_OK


def _parse_methods(arg: Optional[str]) -> List[Method]:
    if not arg:
        return list(Method)
    return [Method(tok.strip().lower()) for tok in arg.split(",") if tok.strip()]


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        db = load_db(args.db)
    except OSError as exc:
        _err("cannot read database: %s" % exc)
        return EXIT_CONFIG
    if args.levels is not None and args.levels != db.config.levels:
        raise VersionMismatch("database has %d levels, --levels says %d"
                              % (db.config.levels, args.levels))
    if args.dataset is not None:
        index = ingest_dataset(args.dataset, Layout(args.layout or "dir"))
    else:
        index = index_from_db(db)
    methods = _parse_methods(args.methods)
    include_query = True if args.include_query is None else args.include_query
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for method in methods:
        rep = evaluate(db, index, method, K=args.k,
                       include_query=include_query)
        pr = precision_recall(db, index, method, include_query=include_query)
        with open(outdir / ("pr_%s.csv" % method.value), "w",
                  encoding="utf-8") as fh:
            fh.write("n,precision,recall\n")
            for n, p, r in zip(pr.n, pr.precision, pr.recall):
                fh.write("%d,%s,%s\n" % (n, _FMT % p, _FMT % r))
        rows.append((method.value, db.config.levels, rep.k, rep.arr))
    with open(outdir / "arr.csv", "w", encoding="utf-8") as fh:
        fh.write("method,levels,k,arr\n")
        for name, levels, k, arr in rows:
            fh.write("%s,%d,%d,%s\n" % (name, levels, k, _FMT % arr))
    width = max(len(r[0]) for r in rows)
    print("%-*s  %s" % (width, "method", "L%d" % db.config.levels))
    for name, _, _, arr in rows:
        print("%-*s  %.6f" % (width, name, arr))
    _err("wrote %s and %d PR file(s)" % (outdir / "arr.csv", len(rows)))
    return EXIT_OK


def _synth_image(size: int, fc: float, sigma: float,
                 rng: np.random.Generator) -> np.ndarray:
    """One bandpass-filtered noise texture in [0, 1].

    White noise is shaped by a Gaussian ring in the frequency plane
    centered at radial frequency fc (cycles/pixel), so each class gets
    its own dominant scale.
    """
    noise = rng.standard_normal((size, size))
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    r = np.hypot(fy, fx)
    gain = np.exp(-0.5 * ((r - fc) / sigma) ** 2)
    img = np.fft.irfft2(np.fft.rfft2(noise) * gain, s=(size, size))
    lo, hi = float(img.min()), float(img.max())
    return (img - lo) / (hi - lo)


def cmd_synth(args: argparse.Namespace) -> int:
    from PIL import Image

    classes = args.classes if args.classes is not None else 5
    per_class = args.per_class if args.per_class is not None else 8
    size = args.size if args.size is not None else 128
    seed = args.seed if args.seed is not None else 0
    spread = args.spread if args.spread is not None else 0.06
    if classes < 1 or per_class < 1 or size < 32:
        raise ValueError("need classes >= 1, per_class >= 1, size >= 32")
    root = Path(args.out)
    count = 0
    for ci in range(classes):
        fc = 0.08 + spread * ci
        cdir = root / ("class%02d" % ci)
        cdir.mkdir(parents=True, exist_ok=True)
        for ii in range(per_class):
            rng = np.random.default_rng((seed, 211, ci, ii))
            pix = _synth_image(size, fc, 0.03, rng)
            u8 = np.round(pix * 255.0).astype(np.uint8)
            Image.fromarray(u8, mode="L").save(cdir / ("img%03d.png" % ii),
                                               format="PNG")
            count += 1
    _err("wrote %d images (%d classes x %d) under %s"
         % (count, classes, per_class, root))
    return EXIT_OK


def cmd_geo(args: argparse.Namespace) -> int:
    family = Family(args.family or "gamma")
    a = make_params(family, args.a[0], args.a[1])
    b = make_params(family, args.b[0], args.b[1])
    d_ab = kld(a, b)
    d_ba = kld(b, a)
    s = skld(a, b)
    print("kld_ab=%s" % (_FMT % d_ab))
    print("kld_ba=%s" % (_FMT % d_ba))
    print("skld=%s" % (_FMT % s))
    print("gd_skld=%s" % (_FMT % np.sqrt(2.0 * s)))
    th_a = np.array([args.a[0], args.a[1]], dtype=np.float64)
    th_b = np.array([args.b[0], args.b[1]], dtype=np.float64)
    times = np.linspace(0.0, 1.0, 257)
    chord = ParamPath(family=family, times=times,
                      points=th_a[None, :] + times[:, None] * (th_b - th_a))
    print("chord_length=%s" % (_FMT % path_length(chord)))
    steps = args.steps if args.steps is not None else 192
    try:
        res = geodesic_distance_bvp(family, a, b, steps=steps)
    except NoConvergence as exc:
        _err("geodesic solver did not converge: %s" % exc)
        return EXIT_SOLVER
    print("bvp_distance=%s" % (_FMT % res.distance))
    return EXIT_OK


def _load_matrix(path: str) -> DistanceMatrix:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return load_matrix_csv(path)
    if suffix == ".dmat":
        return load_matrix_binary(path)
    raise ValueError("unknown matrix format %r (use .csv or .dmat)" % suffix)


def cmd_fw(args: argparse.Namespace) -> int:
    D = _load_matrix(args.matrix)
    result = floyd_warshall(D)
    closed = DistanceMatrix(d=result.dist, labels=D.labels)
    suffix = Path(args.out).suffix.lower()
    if suffix == ".csv":
        save_matrix_csv(args.out, closed)
    elif suffix == ".dmat":
        save_matrix_binary(args.out, closed)
    else:
        raise ValueError("unknown matrix format %r (use .csv or .dmat)"
                         % suffix)
    finite = np.isfinite(result.dist)
    _err("closure of %d vertices written to %s (max finite %s)"
         % (closed.n, args.out,
            _FMT % result.dist[finite].max() if finite.any() else "nan"))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    D = _load_matrix(args.matrix)
    rep = validate_metricity(D)
    print("max_triangle_violation=%s" % (_FMT % rep.max_triangle_violation))
    print("symmetry_defect=%s" % (_FMT % rep.symmetry_defect))
    print("max_diagonal=%s" % (_FMT % rep.max_diagonal))
    print("zero_offdiagonal_pairs=%d" % rep.zero_offdiagonal_pairs)
    print("is_metric=%s" % ("true" if rep.is_metric() else "false"))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geotex",
        description="texture signatures on statistical manifolds: "
                    "extraction, retrieval evaluation, and geometry tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file; "
                                        "flags override file values")

    p = sub.add_parser("extract", help="fit signatures for a dataset")
    common(p)
    p.add_argument("--dataset", required=True, help="dataset root directory")
    p.add_argument("--out", required=True, help="database file to write")
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("--levels", type=int)
    p.add_argument("--layout", choices=[l.value for l in Layout])
    p.add_argument("--edge-weight", dest="edge_weight",
                   choices=[w.value for w in EdgeWeight])
    p.add_argument("--aggregation", choices=[a.value for a in Aggregation])
    p.add_argument("--workers", type=int,
                   help="process count; 1 forces serial, 0/default uses "
                        "available parallelism")
    p.add_argument("--skip-bad", dest="skip_bad", action="store_true",
                   default=None, help="drop images that fail instead of "
                                      "exiting with code 3")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="rank queries and report ARR / PR")
    common(p)
    p.add_argument("--db", required=True, help="signature database file")
    p.add_argument("--dataset", help="dataset root for labels; defaults to "
                                     "labels stored in the database")
    p.add_argument("--layout", choices=[l.value for l in Layout])
    p.add_argument("--methods", help="comma list of %s"
                                     % ",".join(m.value for m in Method))
    p.add_argument("--k", type=int, help="retrieval depth; defaults to the "
                                         "largest class size")
    p.add_argument("--levels", type=int,
                   help="assert the database decomposition depth")
    p.add_argument("--include-query", dest="include_query", default=None,
                   action="store_true")
    p.add_argument("--exclude-query", dest="include_query",
                   action="store_false")
    p.add_argument("--out", help="report directory (default .)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    common(p)
    p.add_argument("--out", required=True, help="dataset root to create")
    p.add_argument("--classes", type=int)
    p.add_argument("--per-class", dest="per_class", type=int)
    p.add_argument("--size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--spread", type=float,
                   help="spacing of per-class center frequencies; small "
                        "values make classes overlap")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("geo", help="geometry report for two parameter points")
    common(p)
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("--a", type=float, nargs=2, required=True,
                   metavar=("SCALE", "SHAPE"))
    p.add_argument("--b", type=float, nargs=2, required=True,
                   metavar=("SCALE", "SHAPE"))
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_geo)

    p = sub.add_parser("fw", help="shortest-path closure of a matrix file")
    common(p)
    p.add_argument("--matrix", required=True, help=".csv or .dmat input")
    p.add_argument("--out", required=True, help=".csv or .dmat output")
    p.set_defaults(func=cmd_fw)

    p = sub.add_parser("validate", help="metricity report of a matrix file")
    common(p)
    p.add_argument("--matrix", required=True, help=".csv or .dmat input")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except NoConvergence as exc:
        _err("solver failure: %s" % exc)
        return EXIT_SOLVER
    except (CorruptFile, VersionMismatch, MissingSignatures,
            StructureMismatch, EmptyDataset) as exc:
        _err("error: %s" % exc)
        return EXIT_CONFIG
    except ValueError as exc:
        _err("config error: %s" % exc)
        return EXIT_CONFIG
    except OSError as exc:
        _err("IO error: %s" % exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

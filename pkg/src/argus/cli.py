"""Command-line interface.  Exit codes: 0 success, 1 usage, 2 data error, 3 I/O error."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from argus import __version__
from argus.errors import ArgusError, IoFailure
from argus.model import FeatureLayer, ProvenanceRecord, Stage, utc_now

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
TABLE_ROWS = 50


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _descriptor(args):
    from argus.ingest import SourceDescriptor

    return SourceDescriptor(
        path=args.src,
        declared_format=args.format,
        crs_override=args.crs,
        encoding=args.encoding,
        lon_col=args.lon_col,
        lat_col=args.lat_col,
    )


def _describe(dataset, name: str) -> str:
    if isinstance(dataset, FeatureLayer):
        lines = [f"layer {dataset.name}: {len(dataset)} features, EPSG:{dataset.crs.srs_id}"]
        lines += [f"  {f.column_name:<24} {f.value_type.value:<8} {f.unit or ''}".rstrip() for f in dataset.schema]
        return "\n".join(lines)
    x0, y0, x1, y1 = dataset.bounds
    return (f"raster {name}: {dataset.ncols} x {dataset.nrows} cells of "
            f"{dataset.cell_size:g}, EPSG:{dataset.crs.srs_id}, bounds ({x0:g}, {y0:g}, {x1:g}, {y1:g})")


def _store(db_path: str, name: str, dataset) -> None:
    from argus.gpkg import create_database, open_database
    from argus.model import RasterGrid

    path = Path(db_path)
    db = open_database(path) if path.exists() else create_database(path)
    with db:
        if isinstance(dataset, RasterGrid):
            db.register_raster_sidecar(dataset, name)
        else:
            db.write_layer(dataset.with_name(name))
    print(f"wrote {name} to {path}")


def cmd_ingest(args) -> int:
    from argus.ingest import read_source

    src = _descriptor(args)
    dataset, _ = read_source(src)
    print(_describe(dataset, src.id))
    if args.into:
        _store(args.into, src.id, dataset)
    return EXIT_OK


def cmd_standardize(args) -> int:
    from argus.crs import transform_layer
    from argus.ingest import read_source
    from argus.standardize import AttributeDictionary, standardization_ratio, standardize_layer

    try:
        dictionary = AttributeDictionary.load(args.dict)
    except OSError as exc:
        raise IoFailure(f"cannot read dictionary {args.dict}: {exc.strerror or exc}") from exc
    src = _descriptor(args)
    dataset, _ = read_source(src)
    if not isinstance(dataset, FeatureLayer):
        print(f"{src.path}: rasters carry no attributes to standardize", file=sys.stderr)
        return EXIT_DATA
    before = standardization_ratio([dataset], dictionary)
    out, report = standardize_layer(transform_layer(dataset, args.to_crs), dictionary)
    print(report.to_text(), end="")
    print(f"standardized ratio: {before:.1%} -> {standardization_ratio([out], dictionary):.1%}")
    if args.into:
        _store(args.into, src.id, out)
    return EXIT_OK


def cmd_enrich(args) -> int:
    from argus.pipeline.stepfile import load_step_config, run_steps

    config = load_step_config(args.config)
    for name in run_steps(config):
        print(f"wrote {name} to {config.database}")
    return EXIT_OK


def _run_manifest(args, enrich: bool) -> int:
    from argus.pipeline import load_manifest_file, run

    manifest = load_manifest_file(args.manifest)
    db, metrics, records = run(manifest, workers=args.workers, enrich=enrich)
    with db:
        n = len(db.list_layers())
    print(metrics.to_text(), end="")
    print(f"{manifest.output_gpkg}: {n} layers, {len(records)} provenance records")
    return EXIT_OK


def cmd_integrate(args) -> int:
    return _run_manifest(args, enrich=False)


def cmd_run(args) -> int:
    return _run_manifest(args, enrich=True)


def _print_result(result) -> None:
    from argus.query import serialize_table_for_qa

    if len(result.columns) == 1 and len(result.rows) == 1:
        print(result.scalar())
    else:
        print(serialize_table_for_qa(result, max_rows=TABLE_ROWS, max_chars=1 << 20))


def _answer(db, catalog, question: str) -> None:
    from argus.query import ast_to_sql, parse_nl, sql_query

    sql = ast_to_sql(parse_nl(question, catalog), catalog)
    print(f"-- {sql}", file=sys.stderr)
    _print_result(sql_query(db, sql))


def _repl(db, catalog) -> int:
    from argus.errors import NlQueryError

    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            print("argus> ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            return EXIT_OK
        question = line.strip()
        if question in ("quit", "exit"):
            return EXIT_OK
        if not question:
            continue
        try:
            _answer(db, catalog, question)
        except NlQueryError as exc:
            print(f"cannot answer: {exc}", file=sys.stderr)


def _remote(db, args) -> int:
    from argus.query import RemoteQaConfig, remote_qa, serialize_table_for_qa, sql_query
    from argus.gpkg.database import quote_ident

    config = RemoteQaConfig.from_env()
    if config is None:
        print("--remote needs ARGUS_QA_ENDPOINT in the environment", file=sys.stderr)
        return EXIT_USAGE
    if args.sql:
        sql, source = args.sql, "sql"
    elif args.layer:
        columns, _ = db.schema_for(args.layer)
        sql, source = f"SELECT {', '.join(quote_ident(c) for c in columns)} FROM {quote_ident(args.layer)}", args.layer
    else:
        print("--remote needs --layer or --sql to choose the table", file=sys.stderr)
        return EXIT_USAGE
    table = serialize_table_for_qa(sql_query(db, sql))
    exchanges = []
    started = utc_now()
    try:
        answer = remote_qa(args.ask, table, config, log=exchanges.append)
    finally:
        for ex in exchanges:
            db.write_provenance([ProvenanceRecord(
                source, ex.table_sha256, Stage.QUERY, started, utc_now(),
                {"endpoint": ex.endpoint, "question": ex.question, "status": ex.status,
                 "answer": ex.answer, "elapsed_s": round(ex.elapsed_s, 6)},
                f"argus {__version__}")])
    print(answer)
    return EXIT_OK


def cmd_query(args) -> int:
    from argus.gpkg import open_database
    from argus.query import Catalog, sql_query

    if not Path(args.db).is_file():
        raise IoFailure(f"no database at {args.db}")
    with open_database(args.db) as db:
        if args.remote:
            if not args.ask:
                print("--remote needs a question", file=sys.stderr)
                return EXIT_USAGE
            return _remote(db, args)
        if args.ask is None:
            _print_result(sql_query(db, args.sql))
            return EXIT_OK
        catalog = Catalog.from_database(db)
        if args.ask == "":
            return _repl(db, catalog)
        _answer(db, catalog, args.ask)
    return EXIT_OK


def cmd_report(args) -> int:
    from argus.gpkg import open_database
    from argus.pipeline import write_report

    if not Path(args.db).is_file():
        raise IoFailure(f"no database at {args.db}")
    out = args.out or Path(args.db).with_name(f"{Path(args.db).stem}_report")
    with open_database(args.db) as db:
        for f in write_report(db, out):
            print(f)
    return EXIT_OK


def cmd_publish(args) -> int:
    from argus.pipeline import PublishConfig, publish

    if not Path(args.db).is_file():
        raise IoFailure(f"no database at {args.db}")
    config = PublishConfig(args.license, args.title or "", tuple(args.creator or ()), args.doi, args.citation)
    print(publish(args.db, config, args.out))
    return EXIT_OK


def cmd_demo(args) -> int:
    from argus.demo import build_corpus

    corpus = build_corpus(args.directory, args.seed)
    print(f"{corpus.n_datasets} datasets under {corpus.root / 'data'}")
    print(f"manifest: {corpus.manifest}")
    return EXIT_OK


def _source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("src", help="input file (.shp, .csv, .txt, .asc, .tif)")
    p.add_argument("--format", default="auto", help="override format detection")
    p.add_argument("--crs", type=int, help="EPSG code to assume when the file carries none")
    p.add_argument("--encoding", default="utf-8")
    p.add_argument("--lon-col")
    p.add_argument("--lat-col")
    p.add_argument("--into", metavar="DB", help="also write the result into this GeoPackage")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="argus", description="Heritage-site geodata pipeline.")
    parser.add_argument("--version", action="version", version=f"argus {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="read one input and describe it")
    _source_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("standardize", help="map one input's attributes onto the dictionary")
    _source_args(p)
    p.add_argument("--dict", required=True, help="attribute dictionary file")
    p.add_argument("--to-crs", type=int, default=4326, help="target CRS (default 4326)")
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("enrich", help="run enrichment steps against an existing GeoPackage")
    p.add_argument("config", help="TOML file with database = ... and [[step]] tables")
    p.set_defaults(func=cmd_enrich)

    for name, func, text in (("integrate", cmd_integrate, "ingest, standardize and integrate a manifest"),
                             ("run", cmd_run, "run a manifest end to end")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--manifest", required=True)
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("query", help="query a GeoPackage with SQL or a restricted question")
    p.add_argument("db")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sql")
    g.add_argument("--ask", nargs="?", const="", metavar="QUESTION",
                   help="question; without one, read questions from standard input")
    p.add_argument("--remote", action="store_true", help="send the question to ARGUS_QA_ENDPOINT")
    p.add_argument("--layer", help="table to send with --remote")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("report", help="write CSV tables and PNG figures for a GeoPackage")
    p.add_argument("db")
    p.add_argument("--out", help="output directory (default <db>_report)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("publish", help="write a licensed publication bundle")
    p.add_argument("db")
    p.add_argument("--license", required=True, help="SPDX identifier")
    p.add_argument("--title")
    p.add_argument("--creator", action="append")
    p.add_argument("--doi")
    p.add_argument("--citation")
    p.add_argument("--out", help="bundle directory (default <db>_publication)")
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("demo", help="write the synthetic Delos corpus and its manifest")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=1453)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    if getattr(args, "remote", False) and args.command == "query" and args.sql and not args.ask:
        parser.error("--remote needs --ask")
    try:
        return args.func(args)
    except ArgusError as exc:
        print(f"argus: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"argus: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, embed, ssm, compare, novelty,
render) plus `pipeline` for the full cached corpus run. Configuration comes
from an optional TOML file with flag overrides; SEMVAR_CACHE overrides the
artifact directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import compare as compare_mod
from . import novelty as novelty_mod
from .corpus import corpus_stats, load_document, read_document, write_document
from .embedding import ProviderConfig, embed_document, read_embeddings, write_embeddings
from .errors import SemvarError
from .pipeline import PipelineConfig, log, run_pipeline
from .render import RenderSpec, render_heatmap, render_timeseries
from .ssm import (
    StandardizedSSM,
    build_ssm,
    read_ssm,
    read_timeseries_csv,
    standardize,
    successive_series,
    write_ssm,
    write_timeseries_csv,
)


def _parse_provider(text: str) -> tuple[str, ProviderConfig]:
    """Grammar: name=kind:location. For the reference kind the location is the
    dimension (default 64)."""
    name, sep, rest = text.partition("=")
    if not sep:
        raise SemvarError(f"bad provider spec (want name=kind:location): {text!r}")
    kind, _, location = rest.partition(":")
    if kind == "reference":
        dim = int(location) if location else 64
        return name, ProviderConfig(kind="reference", dim=dim)
    return name, ProviderConfig(kind=kind, location=location)


def _render_spec(args, defaults: RenderSpec | None = None) -> RenderSpec:
    base = defaults or RenderSpec()
    return RenderSpec(
        palette=args.palette or base.palette,
        width=args.width or base.width,
        height=args.height or base.height,
        downsample=args.downsample or base.downsample,
        title=getattr(args, "title", "") or base.title,
    )


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--palette", choices=["grayscale", "viridis8"], default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--downsample", type=int, default=None)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_ingest(args) -> int:
    out = _out_dir(args)
    for source in args.documents:
        doc = load_document(source, strip_boilerplate=not args.no_strip)
        path = out / f"{doc.id}.doc.txt"
        write_document(doc, path)
        stats = corpus_stats(doc)
        log(
            "INFO",
            "ingest",
            doc.id,
            f"{stats.sentence_count} sentences, {stats.token_count} tokens -> {path}",
        )
    return 0


def _cmd_embed(args) -> int:
    out = _out_dir(args)
    doc = read_document(args.doc)
    if args.kind == "reference":
        provider = ProviderConfig(kind="reference", dim=args.dim)
    else:
        provider = ProviderConfig(
            kind=args.kind, location=args.location or "", batch_size=args.batch_size
        )
    matrix = embed_document(provider, doc, args.model)
    path = out / f"{doc.id}.{args.model}.semv"
    write_embeddings(matrix, path)
    log("INFO", "embed", doc.id, f"{matrix.n}x{matrix.d} -> {path}")
    return 0


def _cmd_ssm(args) -> int:
    out = _out_dir(args)
    m = read_embeddings(args.embeddings)
    raw = build_ssm(m)
    std = standardize(raw, include_diagonal=args.include_diagonal)
    series = successive_series(std)
    base = f"{m.doc_id}.{m.model}"
    write_ssm(raw, out / f"{base}.raw.semv")
    write_ssm(std, out / f"{base}.std.semv")
    write_timeseries_csv(series, out / f"{base}.csv")
    log("INFO", "ssm", m.doc_id, f"n={raw.n} mu={std.mu:.6f} sigma={std.sigma:.6f} -> {out}")
    return 0


def _load_std_ssms(paths: list[str]) -> list[StandardizedSSM]:
    ssms = []
    for path in paths:
        z = read_ssm(path)
        if not isinstance(z, StandardizedSSM):
            raise SemvarError(f"not a standardized SSM: {path}")
        ssms.append(z)
    return ssms


def _cmd_compare(args) -> int:
    out = _out_dir(args)
    ssms = _load_std_ssms(args.ssms)
    doc_id = ssms[0].doc_id
    if args.correlate == "full-ssm":
        corr = compare_mod.correlation_map_full_ssm(ssms)
    else:
        series = [(z.model, successive_series(z)) for z in ssms]
        corr = compare_mod.correlation_map(series)
    paf, naf, ddaf = compare_mod.agreement_matrices(ssms)
    for mm in (corr, paf, naf, ddaf):
        compare_mod.write_model_matrix_csv(mm, out / f"{doc_id}.{mm.kind}.csv")
    log("INFO", "compare", doc_id, f"{len(ssms)} models -> {out}")
    return 0


def _cmd_novelty(args) -> int:
    out = _out_dir(args)
    ssms = _load_std_ssms(args.ssms)
    doc = read_document(args.doc)
    report = novelty_mod.build_report(ssms, q=args.q, k=args.k)
    novelty_mod.write_novelty_csv(report, doc, out / f"{report.doc_id}.novelty.csv")
    novelty_mod.write_novelty_json(report, doc, out / f"{report.doc_id}.novelty.json")
    log("INFO", "novelty", report.doc_id, f"{len(report.flags)} flagged -> {out}")
    return 0


def _cmd_render(args) -> int:
    spec = _render_spec(args)
    inputs = [Path(p) for p in args.inputs]
    output = Path(args.output)
    if all(p.suffix == ".csv" for p in inputs):
        first = inputs[0].read_text(encoding="utf-8").split("\n", 1)[0]
        if first.startswith("index,"):
            series = [(p.stem, read_timeseries_csv(p)) for p in inputs]
            render_timeseries(series, spec, output)
        else:
            if len(inputs) != 1:
                raise SemvarError("matrix rendering takes exactly one input")
            render_heatmap(compare_mod.read_model_matrix_csv(inputs[0]), spec, output)
    elif len(inputs) == 1 and inputs[0].suffix == ".semv":
        render_heatmap(read_ssm(inputs[0]), spec, output)
    else:
        raise SemvarError("cannot infer figure type from inputs")
    log("INFO", "render", "-", f"-> {output}")
    return 0


def _pipeline_config(args) -> PipelineConfig:
    raw: dict = {}
    if args.config:
        raw = tomllib.loads(Path(args.config).read_text(encoding="utf-8"))

    documents = list(raw.get("documents", [])) + list(args.documents)
    providers = [
        (p["model"], ProviderConfig(
            kind=p["kind"],
            location=str(p.get("location", "")),
            dim=int(p.get("dim", 64)),
            batch_size=int(p.get("batch_size", 64)),
        ))
        for p in raw.get("providers", [])
    ]
    providers += [_parse_provider(s) for s in args.provider or []]

    section = raw.get("pipeline", {})
    out = args.out or os.environ.get("SEMVAR_CACHE") or section.get("out", "semvar-out")
    novelty_raw = raw.get("novelty", {})
    render_raw = raw.get("render", {})
    spec = RenderSpec(
        palette=render_raw.get("palette", "viridis8"),
        width=int(render_raw.get("width", 512)),
        height=int(render_raw.get("height", 512)),
        downsample=int(render_raw.get("downsample", 512)),
    )
    spec = _render_spec(args, defaults=spec)

    novelty_k = args.novelty_k if args.novelty_k is not None else novelty_raw.get("k")
    return PipelineConfig(
        documents=tuple(documents),
        providers=tuple(providers),
        cache_dir=str(out),
        strip_boilerplate=bool(raw.get("strip_boilerplate", True)) and not args.no_strip,
        include_diagonal=args.include_diagonal or bool(section.get("include_diagonal", False)),
        correlate_mode=args.correlate or section.get("correlate", "timeseries"),
        novelty_q=args.novelty_q if args.novelty_q is not None else float(novelty_raw.get("q", 0.05)),
        novelty_k=int(novelty_k) if novelty_k is not None else None,
        render=spec,
        jobs=args.jobs if args.jobs is not None else int(section.get("jobs", 0)),
    )


def _cmd_pipeline(args) -> int:
    config = _pipeline_config(args)
    result = run_pipeline(config)
    built = sum(1 for e in result.events if e.action == "built")
    cached = sum(1 for e in result.events if e.action == "cached")
    log("INFO", "pipeline", "<corpus>", f"{built} built, {cached} cached, "
        f"{len(result.failed_docs)} failed")
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semvar",
        description="Semantic variation analysis: similarity matrices, model "
        "agreement, novelty detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="segment text files into document artifacts")
    p.add_argument("documents", nargs="+")
    p.add_argument("--no-strip", action="store_true", help="keep Gutenberg boilerplate")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("embed", help="embed one document with one provider")
    p.add_argument("--doc", required=True, help="ingested .doc.txt file")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=["file", "remote", "reference"], default="reference")
    p.add_argument("--location", default=None, help="file path or service URL")
    p.add_argument("--dim", type=int, default=64, help="reference embedder dimension")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("ssm", help="similarity matrix, z-scores, and time series")
    p.add_argument("--embeddings", required=True, help="SEMV1 embedding file")
    p.add_argument("--include-diagonal", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_ssm)

    p = sub.add_parser("compare", help="correlation map and agreement fractions")
    p.add_argument("ssms", nargs="+", help="standardized SSM files (one per model)")
    p.add_argument("--correlate", choices=["timeseries", "full-ssm"], default="timeseries")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("novelty", help="per-sentence novelty scores and ensemble flags")
    p.add_argument("ssms", nargs="+", help="standardized SSM files (one per model)")
    p.add_argument("--doc", required=True, help="ingested .doc.txt file")
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_novelty)

    p = sub.add_parser("render", help="render an artifact to SVG or PPM")
    p.add_argument("inputs", nargs="+", help=".semv matrix, matrix CSV, or series CSVs")
    p.add_argument("--output", required=True, help="figure path (.svg or .ppm)")
    p.add_argument("--title", default="")
    _add_render_flags(p)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("pipeline", help="full cached corpus run")
    p.add_argument("documents", nargs="*", help="text files (extends config documents)")
    p.add_argument("--config", default=None, help="TOML configuration file")
    p.add_argument("--provider", action="append", help="name=kind:location (repeatable)")
    p.add_argument("--out", default=None, help="artifact directory (env SEMVAR_CACHE)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--no-strip", action="store_true")
    p.add_argument("--include-diagonal", action="store_true")
    p.add_argument("--correlate", choices=["timeseries", "full-ssm"], default=None)
    p.add_argument("--novelty-q", type=float, default=None)
    p.add_argument("--novelty-k", type=int, default=None)
    _add_render_flags(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SemvarError as e:
        log("ERROR", args.command, "-", str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end orchestration: ingest, embed, SSM, compare, novelty, render.

Artifacts live under one cache directory, keyed by content hashes of their
inputs and parameters. A stage whose key matches the manifest is skipped, so
rerunning an unchanged configuration rewrites nothing; changing a parameter
invalidates only the stages downstream of it. Documents are processed
independently: one failing book cannot sink a corpus run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import compare as compare_mod
from . import novelty as novelty_mod
from .corpus import (
    Document,
    corpus_stats,
    load_document,
    read_document,
    slug_id,
    write_document,
)
from .embedding import ProviderConfig, embed_document, read_embeddings, write_embeddings
from .errors import SemvarError
from .render import RenderSpec, render_heatmap, render_timeseries
from .ssm import (
    build_ssm,
    read_ssm,
    standardize,
    successive_series,
    write_ssm,
    write_timeseries_csv,
)

# Salt for cache keys; bump when any artifact format changes.
_CACHE_FORMAT = "semvar-cache-1"

MANIFEST_NAME = ".manifest.json"

CORRELATE_MODES = ("timeseries", "full-ssm")


def log(level: str, stage: str, doc: str, message: str) -> None:
    """Line-delimited diagnostics on stderr: level, stage, doc, message."""
    sys.stderr.write(f"{level}\t{stage}\t{doc}\t{message}\n")


@dataclass(frozen=True)
class PipelineConfig:
    documents: tuple[str, ...]
    providers: tuple[tuple[str, ProviderConfig], ...]
    cache_dir: str
    strip_boilerplate: bool = True
    include_diagonal: bool = False
    correlate_mode: str = "timeseries"
    novelty_q: float = 0.05
    novelty_k: int | None = None
    render: RenderSpec = field(default_factory=RenderSpec)
    jobs: int = 0

    def __post_init__(self) -> None:
        if not self.documents:
            raise SemvarError("pipeline requires at least one document")
        if not self.providers:
            raise SemvarError("pipeline requires at least one provider")
        names = [name for name, _ in self.providers]
        if len(set(names)) != len(names):
            raise SemvarError("provider model names must be distinct")
        if self.correlate_mode not in CORRELATE_MODES:
            raise SemvarError(f"unknown correlate mode: {self.correlate_mode!r}")


@dataclass(frozen=True)
class StageEvent:
    stage: str
    doc_id: str
    action: str  # built | cached | failed
    path: str


@dataclass
class PipelineResult:
    events: list[StageEvent]
    failed_docs: list[str]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed_docs else 0

    def actions(self, stage: str | None = None) -> list[StageEvent]:
        return [e for e in self.events if stage is None or e.stage == stage]


def _hash(*parts: str | bytes) -> str:
    h = hashlib.sha256()
    for part in parts:
        data = part.encode("utf-8") if isinstance(part, str) else part
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def _provider_key(model: str, provider: ProviderConfig) -> str:
    if provider.kind == "file":
        return _hash("file", model, Path(provider.location).read_bytes())
    if provider.kind == "reference":
        return _hash("reference", model, str(provider.dim))
    # Remote responses are assumed stable for a given (url, model) pair.
    return _hash("remote", model, provider.location, str(provider.batch_size))


class _Runner:
    """Stage executor bound to one cache directory and its manifest."""

    def __init__(self, cache_dir: Path):
        self.cache_dir = cache_dir
        self.manifest_path = cache_dir / MANIFEST_NAME
        self.manifest: dict[str, str] = {}
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        self.events: list[StageEvent] = []
        self._lock = threading.Lock()

    def run(self, stage: str, doc_id: str, relpaths: list[str], key: str, build) -> list[Path]:
        paths = [self.cache_dir / rel for rel in relpaths]
        with self._lock:
            cached = all(
                self.manifest.get(rel) == key and p.exists()
                for rel, p in zip(relpaths, paths)
            )
        if cached:
            for rel in relpaths:
                log("INFO", stage, doc_id, f"cached {rel}")
                self._record(stage, doc_id, "cached", rel)
            return paths
        for p in paths:
            p.parent.mkdir(parents=True, exist_ok=True)
        build(paths)
        with self._lock:
            for rel in relpaths:
                self.manifest[rel] = key
        for rel in relpaths:
            log("INFO", stage, doc_id, f"built {rel}")
            self._record(stage, doc_id, "built", rel)
        return paths

    def _record(self, stage: str, doc_id: str, action: str, rel: str) -> None:
        with self._lock:
            self.events.append(StageEvent(stage, doc_id, action, rel))

    def fail(self, stage: str, doc_id: str, message: str) -> None:
        log("ERROR", stage, doc_id, message)
        self._record(stage, doc_id, "failed", "")

    def save_manifest(self) -> None:
        payload = json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        self.manifest_path.write_text(payload, encoding="utf-8")


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _spec_key(spec: RenderSpec) -> str:
    return repr(dataclasses.astuple(spec))


def _process_document(
    runner: _Runner, config: PipelineConfig, source: str
) -> tuple[str, str] | None:
    """All per-document stages. Returns (doc_id, correlation CSV relpath) when
    a correlation map was produced, else None. Raises on failure."""
    spec = config.render

    source_bytes = Path(source).read_bytes()
    ingest_key = _hash(_CACHE_FORMAT, "ingest", source_bytes, str(config.strip_boilerplate))
    doc_probe = load_document(source, strip_boilerplate=config.strip_boilerplate)
    doc_id = doc_probe.id
    doc_rel = f"docs/{_safe_name(doc_id)}.doc.txt"

    def build_doc(paths: list[Path]) -> None:
        write_document(doc_probe, paths[0])
        stats = corpus_stats(doc_probe)
        log(
            "INFO",
            "ingest",
            doc_id,
            f"{stats.sentence_count} sentences, {stats.token_count} tokens",
        )

    (doc_path,) = runner.run("ingest", doc_id, [doc_rel], ingest_key, build_doc)
    doc: Document = read_document(doc_path)

    std_ssms = []
    series_list = []
    for model, provider in config.providers:
        mname = _safe_name(model)
        embed_key = _hash(_CACHE_FORMAT, "embed", ingest_key, _provider_key(model, provider))
        emb_rel = f"embeddings/{_safe_name(doc_id)}.{mname}.semv"

        def build_embed(paths: list[Path], provider=provider, model=model) -> None:
            write_embeddings(embed_document(provider, doc, model), paths[0])

        (emb_path,) = runner.run("embed", doc_id, [emb_rel], embed_key, build_embed)

        raw_key = _hash(_CACHE_FORMAT, "ssm", embed_key)
        raw_rel = f"ssm/{_safe_name(doc_id)}.{mname}.raw.semv"

        def build_raw(paths: list[Path], emb_path=emb_path) -> None:
            write_ssm(build_ssm(read_embeddings(emb_path)), paths[0])

        (raw_path,) = runner.run("ssm", doc_id, [raw_rel], raw_key, build_raw)

        std_key = _hash(_CACHE_FORMAT, "standardize", raw_key, str(config.include_diagonal))
        std_rel = f"ssm/{_safe_name(doc_id)}.{mname}.std.semv"

        def build_std(paths: list[Path], raw_path=raw_path) -> None:
            write_ssm(
                standardize(read_ssm(raw_path), include_diagonal=config.include_diagonal),
                paths[0],
            )

        (std_path,) = runner.run("ssm", doc_id, [std_rel], std_key, build_std)
        z = read_ssm(std_path)
        std_ssms.append((z, std_key))

        series = successive_series(z)
        series_rel = f"series/{_safe_name(doc_id)}.{mname}.csv"
        series_key = _hash(_CACHE_FORMAT, "series", std_key)
        runner.run(
            "series",
            doc_id,
            [series_rel],
            series_key,
            lambda paths, series=series: write_timeseries_csv(series, paths[0]),
        )
        series_list.append((model, series))

        fig_rel = f"figures/{_safe_name(doc_id)}.{mname}.ssm.ppm"
        fig_key = _hash(_CACHE_FORMAT, "render", std_key, _spec_key(spec))
        fig_spec = dataclasses.replace(spec, title=f"{doc_id} / {model}")
        runner.run(
            "render",
            doc_id,
            [fig_rel],
            fig_key,
            lambda paths, z=z, fig_spec=fig_spec: render_heatmap(z, fig_spec, paths[0]),
        )

    ts_rel = f"figures/{_safe_name(doc_id)}.timeseries.svg"
    ts_key = _hash(
        _CACHE_FORMAT, "render-ts", *(key for _, key in std_ssms), _spec_key(spec)
    )
    ts_spec = dataclasses.replace(spec, title=f"{doc_id}: successive similarity")
    runner.run(
        "render",
        doc_id,
        [ts_rel],
        ts_key,
        lambda paths: render_timeseries(series_list, ts_spec, paths[0]),
    )

    nov_key = _hash(
        _CACHE_FORMAT,
        "novelty",
        *(key for _, key in std_ssms),
        ingest_key,
        str(config.novelty_q),
        str(config.novelty_k),
    )
    nov_rels = [
        f"novelty/{_safe_name(doc_id)}.novelty.csv",
        f"novelty/{_safe_name(doc_id)}.novelty.json",
    ]

    def build_novelty(paths: list[Path]) -> None:
        report = novelty_mod.build_report(
            [z for z, _ in std_ssms], q=config.novelty_q, k=config.novelty_k
        )
        novelty_mod.write_novelty_csv(report, doc, paths[0])
        novelty_mod.write_novelty_json(report, doc, paths[1])

    runner.run("novelty", doc_id, nov_rels, nov_key, build_novelty)

    if len(config.providers) < 2:
        return None

    cmp_key = _hash(
        _CACHE_FORMAT, "compare", *(key for _, key in std_ssms), config.correlate_mode
    )
    kinds = ("correlation", "paf", "naf", "ddaf")
    cmp_rels = [f"compare/{_safe_name(doc_id)}.{kind}.csv" for kind in kinds]

    def build_compare(paths: list[Path]) -> None:
        if config.correlate_mode == "full-ssm":
            corr = compare_mod.correlation_map_full_ssm([z for z, _ in std_ssms])
        else:
            corr = compare_mod.correlation_map(series_list)
        paf, naf, ddaf = compare_mod.agreement_matrices([z for z, _ in std_ssms])
        for mm, path in zip((corr, paf, naf, ddaf), paths):
            compare_mod.write_model_matrix_csv(mm, path)

    cmp_paths = runner.run("compare", doc_id, cmp_rels, cmp_key, build_compare)

    for kind, csv_path in zip(kinds, cmp_paths):
        fig_rel = f"figures/{_safe_name(doc_id)}.{kind}.svg"
        fig_key = _hash(_CACHE_FORMAT, "render", cmp_key, kind, _spec_key(spec))
        fig_spec = dataclasses.replace(spec, title=f"{doc_id}: {kind}")
        runner.run(
            "render",
            doc_id,
            [fig_rel],
            fig_key,
            lambda paths, csv_path=csv_path, fig_spec=fig_spec: render_heatmap(
                compare_mod.read_model_matrix_csv(csv_path), fig_spec, paths[0]
            ),
        )

    return doc_id, cmp_rels[0]


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    ids = [slug_id(Path(source).stem) for source in config.documents]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise SemvarError(f"document ids collide in the artifact tree: {dupes}")

    cache_dir = Path(config.cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    runner = _Runner(cache_dir)

    jobs = config.jobs or os.cpu_count() or 1
    failed: list[str] = []
    correlation_csvs: dict[str, str] = {}

    def work(source: str) -> None:
        try:
            produced = _process_document(runner, config, source)
        except Exception as e:  # isolate per-document failures
            failed.append(source)
            runner.fail("pipeline", Path(source).stem, str(e))
            return
        if produced is not None:
            doc_id, rel = produced
            correlation_csvs[doc_id] = rel

    if jobs == 1 or len(config.documents) == 1:
        for source in config.documents:
            work(source)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, config.documents))

    if correlation_csvs:
        ordered = [correlation_csvs[doc_id] for doc_id in sorted(correlation_csvs)]
        mean_key = _hash(
            _CACHE_FORMAT,
            "mean",
            *((cache_dir / rel).read_bytes() for rel in ordered),
        )

        def build_mean(paths: list[Path]) -> None:
            maps = [compare_mod.read_model_matrix_csv(cache_dir / rel) for rel in ordered]
            compare_mod.write_model_matrix_csv(compare_mod.mean_correlation_map(maps), paths[0])

        (mean_path,) = runner.run(
            "compare", "<corpus>", ["compare/mean_correlation.csv"], mean_key, build_mean
        )
        fig_key = _hash(_CACHE_FORMAT, "render", mean_key, _spec_key(config.render))
        fig_spec = dataclasses.replace(config.render, title="mean correlation")
        runner.run(
            "render",
            "<corpus>",
            ["figures/mean_correlation.svg"],
            fig_key,
            lambda paths: render_heatmap(
                compare_mod.read_model_matrix_csv(mean_path), fig_spec, paths[0]
            ),
        )

    runner.save_manifest()
    return PipelineResult(events=runner.events, failed_docs=failed)

"""Command-line front end wiring the toolkit into reproducible pipelines.

Exit codes: 0 success, 1 data failure, 2 usage error. Every run emits a
manifest (command, configuration, input digests, tool version, seed) so
that equal manifests imply byte-identical outputs; commands that write
files place it next to their primary output, and commands that print to
stdout finish with a ``manifest`` line.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from . import __version__
from .codec import read_corpus, write_corpus
from .convert import (
    MODES,
    ConversionConfig,
    read_id_list,
    split_corpus,
    convert_corpus,
)
from .frames import catalog_stats, ftag_by_arg, load_catalog, vnrole_by_arg
from .graph import GraphError
from .metrics import (
    DEFAULT_METRICS,
    METRIC_NAMES,
    IaaBatch,
    corpus_stats,
    iaa_batch_score,
    iaa_report,
    score_corpus,
)
from .rules import REIFIED_OVERRIDES, RuleError, compile_rules, load_overrides, map_catalog

CLI_MODES = {
    "wiser": "wiser",
    "wiser+wsd": "wiser_with_wsd",
    "numbered": "numbered_no_wsd",
    "numbered+wsd": "numbered_with_wsd",
}


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest(command: str, config: dict, inputs: dict[str, str | None], seed: int | None = None) -> str:
    payload = {
        "command": command,
        "config": config,
        "inputs": {name: _sha256(path) for name, path in inputs.items() if path},
        "seed": seed,
        "version": __version__,
    }
    return json.dumps(payload, sort_keys=True)


def _write_manifest(manifest: str, output_path: str) -> None:
    Path(output_path + ".manifest.json").write_text(manifest + "\n", encoding="utf-8")


def _data_error(exc: Exception) -> click.ClickException:
    err = click.ClickException(str(exc))
    err.exit_code = 1
    return err


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="wiser")
def main() -> None:
    """Semantic graph conversion and evaluation pipelines."""


@main.command()
@click.argument("input_corpus", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_corpus", type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(sorted(CLI_MODES)), default="wiser", show_default=True)
@click.option("--catalog", envvar="WISER_CATALOG", type=click.Path(exists=True, dir_okay=False),
              help="Frame catalog (defaults to $WISER_CATALOG).")
@click.option("--overrides", type=click.Path(exists=True, dir_okay=False),
              help="Manual role override table.")
@click.option("--exclude", type=click.Path(exists=True, dir_okay=False),
              help="File of excluded sense names, one per line (replaces the default list).")
@click.option("--on-unmapped", type=click.Choice(["drop", "flag"]), default="flag", show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write the conversion report here.")
@click.option("--jobs", type=int, default=1, show_default=True)
def convert(input_corpus, output_corpus, mode, catalog, overrides, exclude, on_unmapped,
            report_path, jobs):
    """Trim and convert a corpus into the selected scheme."""
    mode_name = CLI_MODES[mode]
    relabel = mode_name in ("wiser", "wiser_with_wsd")
    if relabel and not catalog:
        raise click.UsageError(f"--mode {mode} relabels numbered arguments and needs --catalog")

    try:
        corpus = read_corpus(input_corpus)
        cat = load_catalog(catalog) if catalog else None
        override_table = REIFIED_OVERRIDES
        if overrides:
            override_table = override_table.merged_with(load_overrides(overrides))
        mapping = {}
        if cat is not None:
            mapping, _ = map_catalog(cat, compile_rules(), override_table)
        kwargs = {}
        if exclude:
            kwargs["exclusion_senses"] = frozenset(read_id_list(exclude))
        config = ConversionConfig(
            mode=mode_name,
            mapping=mapping,
            overrides=override_table,
            on_unmapped="drop_sentence" if on_unmapped == "drop" else "keep_numbered_and_flag",
            **kwargs,
        )
        converted, report = convert_corpus(corpus, cat, config, jobs=jobs)
        write_corpus(converted, output_corpus)
        if report_path:
            Path(report_path).write_text(report.to_text(), encoding="utf-8")
    except (GraphError, RuleError, ValueError, OSError) as exc:
        raise _data_error(exc)

    manifest = _manifest(
        "convert",
        {"mode": mode_name, "on_unmapped": on_unmapped},
        {"input": input_corpus, "catalog": catalog, "overrides": overrides, "exclude": exclude},
    )
    _write_manifest(manifest, output_corpus)
    click.echo(f"wrote {len(converted)} of {len(corpus)} documents to {output_corpus}")


def _pair_corpora(pred, gold):
    pred_ids = [g.metadata.get("id") for g in pred]
    gold_ids = [g.metadata.get("id") for g in gold]
    if all(pred_ids) and all(gold_ids):
        by_id = {i: g for i, g in zip(pred_ids, pred)}
        if len(by_id) != len(pred):
            raise ValueError("duplicate document ids in predicted corpus")
        if len(set(gold_ids)) != len(gold_ids):
            raise ValueError("duplicate document ids in gold corpus")
        missing = [i for i in gold_ids if i not in by_id]
        extra = [i for i in pred_ids if i not in set(gold_ids)]
        if missing or extra:
            raise ValueError(
                "document-id mismatch between corpora"
                + (f"; missing from predicted: {', '.join(missing[:5])}" if missing else "")
                + (f"; unexpected in predicted: {', '.join(extra[:5])}" if extra else "")
            )
        return [by_id[i] for i in gold_ids], list(gold)
    if len(pred) != len(gold):
        raise ValueError(f"corpus size mismatch: {len(pred)} predicted vs {len(gold)} gold")
    return list(pred), list(gold)


@main.command()
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", "metrics_list", default=",".join(DEFAULT_METRICS), show_default=True,
              help="Comma-separated metric names.")
@click.option("--scheme", type=click.Choice(["wiser", "amr"]), default="wiser", show_default=True)
@click.option("--restarts", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--exact", is_flag=True, help="Exhaustive alignment (small graphs only).")
@click.option("--max-vars", type=int, default=8, show_default=True,
              help="Variable bound for --exact.")
@click.option("--per-doc", is_flag=True, help="Also print one line per document and metric.")
@click.option("--jobs", type=int, default=1, show_default=True)
def score(gold, pred, metrics_list, scheme, restarts, seed, exact, max_vars, per_doc, jobs):
    """Score a predicted corpus against a gold corpus."""
    names = [m.strip() for m in metrics_list.split(",") if m.strip()]
    unknown = [m for m in names if m not in METRIC_NAMES]
    if unknown:
        raise click.UsageError(f"unknown metric(s): {', '.join(unknown)}")
    try:
        gold_corpus = read_corpus(gold)
        pred_corpus = read_corpus(pred)
        pred_corpus, gold_corpus = _pair_corpora(pred_corpus, gold_corpus)
        totals, per_doc_entries = score_corpus(
            pred_corpus, gold_corpus, metrics=names, scheme=scheme,
            restarts=restarts, seed=seed, exact=exact, max_vars=max_vars, jobs=jobs,
        )
    except (GraphError, ValueError, OSError) as exc:
        raise _data_error(exc)

    if per_doc:
        for i, entries in enumerate(per_doc_entries):
            name = gold_corpus[i].metadata.get("id", f"doc{i + 1}")
            for metric in names:
                click.echo(f"doc\t{name}\t{entries[metric].line()}")
    for metric in names:
        click.echo(totals[metric].line())
    click.echo("manifest\t" + _manifest(
        "score",
        {"metrics": names, "scheme": scheme, "restarts": restarts,
         "exact": exact, "max_vars": max_vars, "per_doc": per_doc},
        {"gold": gold, "pred": pred},
        seed=seed,
    ))


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--by-source", "source_key", default=None,
              help="Metadata key that buckets documents into sources.")
@click.option("--machine", is_flag=True, help="Tab-separated output.")
def stats(corpus_path, source_key, machine):
    """Corpus statistics per source and in total."""
    try:
        corpus = read_corpus(corpus_path)
        report = corpus_stats(corpus, source_key=source_key)
    except (GraphError, OSError) as exc:
        raise _data_error(exc)
    fields = ("sentences", "tokens", "concepts", "relations",
              "reentrancies", "negations", "named_entities")
    rows = list(report.rows) + [report.total]
    if machine:
        for row in rows:
            values = "\t".join(str(getattr(row, f)) for f in fields)
            click.echo(f"{row.source}\t{values}")
    else:
        header = ["source", *fields]
        table = [[row.source, *(str(getattr(row, f)) for f in fields)] for row in rows]
        widths = [max(len(r[i]) for r in [header, *table]) for i in range(len(header))]
        click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for r in table:
            click.echo("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo("manifest\t" + _manifest(
        "stats", {"by_source": source_key, "machine": machine}, {"corpus": corpus_path}))


@main.command()
@click.option("--batches", "batches_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Manifest: group, batch id, then a score or two corpus paths (tab-separated).")
@click.option("--restarts", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def iaa(batches_path, restarts, seed):
    """Inter-annotator agreement per batch with per-group macro averages."""
    batches = []
    try:
        base = Path(batches_path).parent
        with open(batches_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) == 3:
                    group, batch_id, value = fields
                    score_value = float(value)
                elif len(fields) == 4:
                    group, batch_id, path_a, path_b = fields
                    corpus_a = read_corpus(base / path_a)
                    corpus_b = read_corpus(base / path_b)
                    score_value = iaa_batch_score(corpus_a, corpus_b, restarts=restarts, seed=seed)
                else:
                    raise ValueError(f"line {lineno}: expected 3 or 4 tab-separated fields")
                batches.append(IaaBatch(group=group, batch_id=batch_id, score=score_value))
        report = iaa_report(batches)
    except (GraphError, ValueError, OSError) as exc:
        raise _data_error(exc)
    for batch in report.batches:
        click.echo(f"batch\t{batch.group}\t{batch.batch_id}\t{batch.score:.4f}")
    for group, mean in report.macro_averages.items():
        click.echo(f"macro\t{group}\t{mean:.4f}")
    click.echo("manifest\t" + _manifest(
        "iaa", {"restarts": restarts}, {"batches": batches_path}, seed=seed))


@main.command()
@click.argument("subreport", type=click.Choice(["totals", "ftag", "vnrole", "coverage"]))
@click.option("--catalog", envvar="WISER_CATALOG", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--machine", is_flag=True, help="Tab-separated output.")
def frames(subreport, catalog, machine):
    """Frame catalog analytics: totals, tag/role distributions, coverage."""
    try:
        cat = load_catalog(catalog)
    except (ValueError, OSError) as exc:
        raise _data_error(exc)
    sep = "\t" if machine else "  "
    if subreport == "totals":
        counts = catalog_stats(cat)
        click.echo(f"predicates{sep}{counts.predicates}")
        click.echo(f"senses{sep}{counts.senses}")
        click.echo(f"arguments{sep}{counts.arguments}")
    elif subreport in ("ftag", "vnrole"):
        matrix = ftag_by_arg(cat) if subreport == "ftag" else vnrole_by_arg(cat).matrix
        cols = list(matrix.cols)
        header = ["", *(f"ARG{c}" for c in cols), "total"]
        rows = [[r, *(str(matrix.cell(r, c)) for c in cols), str(matrix.row_total(r))]
                for r in matrix.rows]
        rows.append(["total", *(str(matrix.col_total(c)) for c in cols), str(matrix.total)])
        if machine:
            for r in rows:
                click.echo("\t".join(r))
        else:
            widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
            click.echo("  ".join(h.rjust(w) for h, w in zip(header, widths)))
            for r in rows:
                click.echo("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    else:
        report = vnrole_by_arg(cat)
        click.echo(f"mapped_arguments{sep}{report.mapped_arguments}")
        click.echo(f"total_arguments{sep}{report.total_arguments}")
        click.echo(f"coverage{sep}{report.coverage:.4f}")
    click.echo("manifest\t" + _manifest(
        "frames", {"subreport": subreport, "machine": machine}, {"catalog": catalog}))


@main.command()
@click.argument("input_corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_entries", multiple=True, required=True, metavar="NAME=IDFILE",
              help="Split name and id-list file; repeat per split.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def split(input_corpus, spec_entries, out_dir):
    """Partition a corpus into named splits by document id lists."""
    spec = {}
    for entry in spec_entries:
        if "=" not in entry:
            raise click.UsageError(f"--spec takes NAME=IDFILE, got {entry!r}")
        name, _, path = entry.partition("=")
        spec[name] = path
    try:
        corpus = read_corpus(input_corpus)
        id_lists = {name: read_id_list(path) for name, path in spec.items()}
        parts = split_corpus(corpus, id_lists)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, graphs in parts.items():
            write_corpus(graphs, out / f"{name}.txt")
            click.echo(f"{name}\t{len(graphs)}")
    except (GraphError, ValueError, OSError) as exc:
        raise _data_error(exc)
    manifest = _manifest("split", {"splits": sorted(spec)},
                         {"input": input_corpus, **spec})
    _write_manifest(manifest, str(Path(out_dir) / "split"))


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point exposing the pipeline as subcommands.

Every subcommand reads and writes the file formats owned by the library
modules (triples/meta TSV, path files, instance files, statement exports,
PEMB embedding stores, checkpoints, training logs, report TSV).  Outputs
are deterministic for identical inputs and seeds.

Exit codes: 0 success, 2 usage error, 3 missing file, 4 parse or format
violation, 5 configuration error, 6 sampling error.
"""

from __future__ import annotations

import argparse
import sys

from . import synth
from .dataset import SamplingConfig, build_instances, read_instances, split_triples, write_instances
from .embeddings import TextEmbeddingStore, read_store
from .errors import ConfigError, FormatError, ParseError, SamplingError
from .evaluation import explain_instance, mean_average_precision, score_instances, write_report
from .graph import graph_stats, load_graph_files, subgraph_without, with_inverses, write_stats
from .model import (
    FeatureContext,
    init_params,
    load_checkpoint,
    permute_relation_embeddings,
    save_checkpoint,
)
from .paths import WalkConfig, read_path_file, sample_paths, write_path_file
from .training import TrainConfig, train, write_log
from .verbalize import Verbalizer, load_templates, write_statements

EXIT_MISSING_FILE = 3
EXIT_PARSE = 4
EXIT_CONFIG = 5
EXIT_SAMPLING = 6

_EPILOG = """\
file formats:
  triples TSV     head<TAB>relation<TAB>tail, UTF-8, no header
  metadata TSV    entity<TAB>name<TAB>types-comma-separated[<TAB>category]
  templates TSV   relation<TAB>surface with {head} and {tail} placeholders
  path file       source<TAB>target<TAB>path;path;...   (path = e0|r1|e1|...)
  instance file   label<TAB>relation<TAB>head<TAB>tail<TAB>path;...  ('-' = none)
  statements      key-hex<TAB>text
  embeddings      PEMB binary (magic, version, dim, count, key+f32 records)
  report TSV      relation<TAB>AP<TAB>pos<TAB>neg rows, final MAP<TAB>value
  stats / logs    key<TAB>value and epoch<TAB>loss<TAB>dev_accuracy lines

exit codes: 0 ok, 2 usage, 3 missing file, 4 parse/format, 5 config, 6 sampling
"""


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    config: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected 'key = value'", lineno)
            key, _, value = line.partition("=")
            config[key.strip().replace("-", "_")] = value.strip()
    return config


def _resolve(args, config, key, default, conv=str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return conv(config[key])
    return default


def _load_kg(args, config, augment: bool = True):
    triples = _resolve(args, config, "triples", None)
    if triples is None:
        raise ConfigError("--triples is required")
    meta = _resolve(args, config, "meta", None)
    kg = load_graph_files(triples, meta)
    return with_inverses(kg) if augment else kg


def _out_stream(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _close(stream) -> None:
    if stream is not sys.stdout:
        stream.close()


def _verbalizer(kg, args, config) -> Verbalizer:
    templates = {}
    path = _resolve(args, config, "templates", None)
    if path:
        with open(path, encoding="utf-8") as f:
            templates = load_templates(f, kg)
    latin = bool(_resolve(args, config, "latin", False))
    return Verbalizer(kg, templates, latin=latin)


def _store(args, config, params=None) -> TextEmbeddingStore:
    path = _resolve(args, config, "embeddings", None)
    if path:
        return read_store(path)
    dim = int(_resolve(args, config, "embedding_dim", 0, int) or 0)
    if dim <= 0:
        dim = params.hyper.H if params is not None else 64
    return TextEmbeddingStore(dim=dim)


def _ctx(kg, verbalizer, store, args, config) -> FeatureContext:
    mode = "strict" if _resolve(args, config, "strict", False) else "synthetic"
    seed = int(_resolve(args, config, "synthetic_seed", 0, int))
    return FeatureContext(kg, verbalizer, store, mode=mode, seed=seed)


def _target_facts(kg, args, config):
    spec = _resolve(args, config, "target_relations", None)
    targets_file = _resolve(args, config, "targets_file", None)
    names: list[str] = []
    if spec:
        names.extend(n for n in spec.split(",") if n)
    if targets_file:
        with open(targets_file, encoding="utf-8") as f:
            names.extend(line.strip() for line in f if line.strip())
    if not names:
        return sorted(kg.triples)
    rids = set()
    for name in names:
        rid = kg.relation_ids.get(name)
        if rid is None:
            raise ConfigError(f"unknown target relation {name!r}")
        rids.add(rid)
    return sorted(t for t in kg.triples if t.relation in rids)


# -- subcommands -----------------------------------------------------------


def cmd_ingest(args, config) -> int:
    kg = _load_kg(args, config, augment=False)
    out = _out_stream(_resolve(args, config, "out", None))
    out.write(f"# Entities\t{kg.n_entities}\n")
    out.write(f"# Relation types\t{len(kg.base_relations())}\n")
    out.write(f"# Triples\t{len(kg.triples)}\n")
    out.write(f"# Duplicate lines collapsed\t{kg.duplicate_count}\n")
    _close(out)
    return 0


def cmd_stats(args, config) -> int:
    kg = _load_kg(args, config, augment=False)
    paths = None
    paths_file = _resolve(args, config, "paths", None)
    if paths_file:
        aug = with_inverses(kg)
        with open(paths_file, encoding="utf-8") as f:
            paths = [p for _, group in read_path_file(f, aug) for p in group]
    out = _out_stream(_resolve(args, config, "out", None))
    write_stats(graph_stats(kg, paths), out)
    _close(out)
    return 0


def cmd_sample_paths(args, config) -> int:
    kg = _load_kg(args, config)
    source = kg.entity_ids.get(args.source)
    target = kg.entity_ids.get(args.target)
    if source is None or target is None:
        raise ConfigError("unknown source or target entity")
    forbidden_name = _resolve(args, config, "forbidden", None)
    forbidden = None
    if forbidden_name:
        forbidden = kg.relation_ids.get(forbidden_name)
        if forbidden is None:
            raise ConfigError(f"unknown relation {forbidden_name!r}")
    cfg = WalkConfig(
        max_len=int(_resolve(args, config, "max_len", 7, int)),
        walks_per_pair=int(_resolve(args, config, "walks", 1000, int)),
        seed=int(_resolve(args, config, "seed", 0, int)),
    )
    paths = sample_paths(kg, source, target, cfg, forbidden=forbidden)
    out = _out_stream(_resolve(args, config, "out", None))
    write_path_file([((source, target), paths)], kg, out)
    _close(out)
    return 0


def cmd_build_dataset(args, config) -> int:
    import os

    kg = _load_kg(args, config, augment=False)
    facts = _target_facts(kg, args, config)
    seed = int(_resolve(args, config, "seed", 0, int))
    train_facts, dev_facts, test_facts = split_triples(facts, seed)
    kg_walk = with_inverses(subgraph_without(kg, dev_facts + test_facts))
    walk = WalkConfig(
        max_len=int(_resolve(args, config, "max_len", 7, int)),
        walks_per_pair=int(_resolve(args, config, "walks", 1000, int)),
        seed=seed,
        path_cap=int(_resolve(args, config, "path_cap", 200, int)),
    )
    sampling = SamplingConfig(
        same_relation_prob=float(_resolve(args, config, "same_rel_prob", 0.70, float)),
        neg_per_pos_train=float(_resolve(args, config, "neg_train", 0.75, float)),
        neg_per_pos_test=float(_resolve(args, config, "neg_test", 8.0, float)),
        seed=seed,
    )
    out_dir = _resolve(args, config, "out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    splits = (
        ("train.tsv", train_facts, "train"),
        ("dev.tsv", dev_facts, "eval"),
        ("test.tsv", test_facts, "eval"),
    )
    for filename, split, kind in splits:
        instances = build_instances(kg_walk, split, walk, sampling, kind=kind, truth_kg=kg)
        with open(os.path.join(out_dir, filename), "w", encoding="utf-8") as f:
            write_instances(instances, kg_walk, f)
    return 0


def cmd_export_statements(args, config) -> int:
    kg = _load_kg(args, config)
    verbalizer = _verbalizer(kg, args, config)
    statements = []
    for path in args.instances:
        with open(path, encoding="utf-8") as f:
            for inst in read_instances(f, kg):
                for p in sorted(inst.paths, key=lambda p: (len(p), p.relations, p.entities)):
                    statements.append(verbalizer.path_statement(p))
                    for entity in p.entities:
                        statements.append(verbalizer.entity_statement_for(entity))
    out = _out_stream(_resolve(args, config, "out", None))
    write_statements(statements, out)
    _close(out)
    return 0


def cmd_train(args, config) -> int:
    kg = _load_kg(args, config)
    verbalizer = _verbalizer(kg, args, config)
    with open(args.train, encoding="utf-8") as f:
        train_instances = read_instances(f, kg)
    with open(args.dev, encoding="utf-8") as f:
        dev_instances = read_instances(f, kg)
    store = _store(args, config)
    ctx = _ctx(kg, verbalizer, store, args, config)
    seed = int(_resolve(args, config, "seed", 0, int))
    cfg = TrainConfig(
        learning_rate=float(_resolve(args, config, "lr", 1e-3, float)),
        batch_size=int(_resolve(args, config, "batch", 64, int)),
        epochs=int(_resolve(args, config, "epochs", 100, int)),
        lam=float(_resolve(args, config, "lam", 1e-5, float)),
        patience=int(_resolve(args, config, "patience", 10, int)),
        min_delta=float(_resolve(args, config, "min_delta", 0.01, float)),
        seed=seed,
    )
    params = init_params(
        ctx,
        kind=_resolve(args, config, "model", "A"),
        d=int(_resolve(args, config, "d", 100, int)),
        m=int(_resolve(args, config, "m", 50, int)),
        lam=cfg.lam,
        seed=seed,
    )
    best, log = train(params, train_instances, dev_instances, ctx, cfg)
    save_checkpoint(best, args.checkpoint)
    log_path = _resolve(args, config, "log", None)
    if log_path:
        with open(log_path, "w", encoding="utf-8") as f:
            write_log(log, f)
    return 0


def cmd_evaluate(args, config) -> int:
    kg = _load_kg(args, config)
    verbalizer = _verbalizer(kg, args, config)
    params = load_checkpoint(args.checkpoint)
    shuffle_seed = _resolve(args, config, "shuffle_relations", None)
    if shuffle_seed is not None:
        params = permute_relation_embeddings(params, int(shuffle_seed))
    with open(args.instances, encoding="utf-8") as f:
        instances = read_instances(f, kg)
    store = _store(args, config, params)
    ctx = _ctx(kg, verbalizer, store, args, config)
    scored = score_instances(instances, params, ctx)
    report = mean_average_precision(scored, kg, model_id=params.kind)
    out = _out_stream(_resolve(args, config, "out", None))
    write_report(report, out)
    _close(out)
    return 0


def cmd_explain(args, config) -> int:
    kg = _load_kg(args, config)
    verbalizer = _verbalizer(kg, args, config)
    params = load_checkpoint(args.checkpoint)
    with open(args.instances, encoding="utf-8") as f:
        instances = read_instances(f, kg)
    if args.index is not None:
        instances = [instances[args.index]]
    store = _store(args, config, params)
    ctx = _ctx(kg, verbalizer, store, args, config)
    out = _out_stream(_resolve(args, config, "out", None))
    for inst, trace in score_instances(instances, params, ctx):
        out.write(explain_instance(inst, trace, kg, verbalizer))
        out.write("\n")
    _close(out)
    return 0


def cmd_synth_kg(args, config) -> int:
    bench = synth.generate_benchmark(
        seed=int(_resolve(args, config, "seed", 0, int)),
        n_entities=int(_resolve(args, config, "entities", 2000, int)),
        n_pairs=int(_resolve(args, config, "pairs", 480, int)),
    )
    synth.write_benchmark(bench, _resolve(args, config, "out_dir", "."))
    return 0


# -- argument wiring -------------------------------------------------------


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--triples", help="triples TSV file")
    p.add_argument("--meta", help="entity metadata TSV file")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file (flags take precedence)")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel sections (outputs are independent of this)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathreason",
        description="Path-based knowledge-graph completion pipeline.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a graph and print diagnostics")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="corpus statistics as key/value lines")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--paths", help="optional path file to include path stats")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample-paths", help="random-walk paths for one pair")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--forbidden", help="query relation whose direct edge is excluded")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--walks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample_paths)

    p = sub.add_parser("build-dataset", help="split facts and build instances")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--target-relations", dest="target_relations",
                   help="comma-separated query relations (default: all)")
    p.add_argument("--targets-file", dest="targets_file")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--walks", type=int)
    p.add_argument("--path-cap", type=int, dest="path_cap")
    p.add_argument("--same-rel-prob", type=float, dest="same_rel_prob")
    p.add_argument("--neg-train", type=float, dest="neg_train")
    p.add_argument("--neg-test", type=float, dest="neg_test")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("export-statements", help="statement file for the encoder")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--templates")
    p.add_argument("--latin", action="store_true", default=None)
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_statements)

    p = sub.add_parser("train", help="train a model on instance files")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--templates")
    p.add_argument("--latin", action="store_true", default=None)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--model", choices=("A", "B"))
    p.add_argument("--embeddings", help="PEMB store (default: synthetic mode)")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--synthetic-seed", type=int, dest="synthetic_seed")
    p.add_argument("--embedding-dim", type=int, dest="embedding_dim")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lam", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--min-delta", type=float, dest="min_delta")
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="AP/MAP report for a checkpoint")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--templates")
    p.add_argument("--latin", action="store_true", default=None)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--synthetic-seed", type=int, dest="synthetic_seed")
    p.add_argument("--shuffle-relations", dest="shuffle_relations",
                   help="ablation: derange relation embeddings with this seed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="attention explanations for instances")
    _add_graph_flags(p)
    _add_common(p)
    p.add_argument("--templates")
    p.add_argument("--latin", action="store_true", default=None)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--index", type=int)
    p.add_argument("--embeddings")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--synthetic-seed", type=int, dest="synthetic_seed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("synth-kg", help="write the seeded synthetic benchmark")
    _add_common(p)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--entities", type=int)
    p.add_argument("--pairs", type=int)
    p.set_defaults(func=cmd_synth_kg)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _read_config(getattr(args, "config", None))
        return args.func(args, config)
    except FileNotFoundError as exc:
        print(f"error\tmissing-file\t{exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (ParseError, FormatError) as exc:
        print(f"error\tparse\t{exc}", file=sys.stderr)
        return EXIT_PARSE
    except SamplingError as exc:
        print(f"error\tsampling\t{exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except (ConfigError, ValueError) as exc:
        print(f"error\tconfig\t{exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

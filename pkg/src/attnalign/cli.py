"""Command-line entry point.

Subcommands: prepare (validate/filter/resolve a raw dataset), train (single
fit to a checkpoint), sweep (replicated size x ratio grid), curve
(label-cost curve), analyze (attention analytics from a checkpoint), synth
(planted-cue corpus generation), serve (annotation HTTP service). Batch
commands read a JSON run config; see the README for a commented example.
Exit codes: 0 success, 1 runtime/config error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis, corpus, experiments, model as model_mod
from .strategies import StrategyConfig
from .tokenizer import SubwordVocab, train_vocab, subword_tokenize


class ConfigError(ValueError):
    """Raised when a run config file is malformed."""


@dataclass
class RunConfig:
    dataset: Path
    vocab: Path
    output_dir: Path
    model: dict
    train: dict
    strategies: list[StrategyConfig]
    sizes: list[int]
    ratios: list[float]
    replicates: int
    test_size: int
    base_seed: int


_TOP_LEVEL_KEYS = {"dataset", "vocab", "output_dir", "model", "train", "strategies", "experiment"}
_EXPERIMENT_KEYS = {"sizes", "ratios", "replicates", "test_size", "base_seed"}


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}; allowed keys are {sorted(allowed)}")


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _reject_unknown(raw, _TOP_LEVEL_KEYS, str(path))

    for key in ("dataset", "vocab", "output_dir"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
    dataset = Path(raw["dataset"])
    vocab = Path(raw["vocab"])
    if not dataset.exists():
        raise ConfigError(f"{path}: field 'dataset': no such file {dataset}")
    if not vocab.exists():
        raise ConfigError(f"{path}: field 'vocab': no such file {vocab}")

    model_section = dict(raw.get("model", {}))
    model_keys = {f.name for f in fields(model_mod.ModelConfig)}
    _reject_unknown(model_section, model_keys, f"{path}: 'model'")
    train_section = dict(raw.get("train", {}))
    train_keys = {f.name for f in fields(model_mod.TrainConfig)}
    _reject_unknown(train_section, train_keys, f"{path}: 'train'")

    strategy_keys = {f.name for f in fields(StrategyConfig)}
    strategies = []
    for i, entry in enumerate(raw.get("strategies", [{"kind": "baseline"}])):
        _reject_unknown(entry, strategy_keys, f"{path}: 'strategies[{i}]'")
        try:
            strategies.append(StrategyConfig(**entry))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: 'strategies[{i}]': {exc}")

    exp = dict(raw.get("experiment", {}))
    _reject_unknown(exp, _EXPERIMENT_KEYS, f"{path}: 'experiment'")
    return RunConfig(
        dataset=dataset,
        vocab=vocab,
        output_dir=Path(raw["output_dir"]),
        model=model_section,
        train=train_section,
        strategies=strategies,
        sizes=[int(s) for s in exp.get("sizes", [250])],
        ratios=[float(r) for r in exp.get("ratios", [0.05])],
        replicates=int(exp.get("replicates", 20)),
        test_size=int(exp.get("test_size", 200)),
        base_seed=int(exp.get("base_seed", 0)),
    )


def _load_inputs(cfg: RunConfig):
    docs = corpus.load_dataset(cfg.dataset)
    vocab = SubwordVocab.load(cfg.vocab)
    model_section = dict(cfg.model)
    model_section.setdefault("vocab_size", len(vocab))
    try:
        mcfg = model_mod.ModelConfig(**model_section)
        tcfg = model_mod.TrainConfig(**cfg.train)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model/train config: {exc}")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return docs, vocab, mcfg, tcfg


# -- subcommands -------------------------------------------------------------


def cmd_prepare(args) -> int:
    docs = corpus.load_dataset(args.input)
    retained, sparse_log = corpus.filter_sparse(docs, threshold=args.threshold)
    resolved, confusion, dropped = corpus.resolve_labels(retained, mode=args.mode)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus.save_dataset(resolved, out / "processed.jsonl")
    corpus.write_exclusion_log(sparse_log + dropped, out / "exclusions.csv")
    vocab = train_vocab([d.text for d in resolved], target_size=args.vocab_size)
    vocab.save(out / "vocab.json")
    print(f"retained {len(resolved)} of {len(docs)} documents")
    print(f"excluded: {len(sparse_log)} sparse, {len(dropped)} unresolved")
    print(f"self-report vs majority agreement: {confusion.agreement_count}")
    print(f"wrote {out / 'processed.jsonl'}, {out / 'exclusions.csv'}, {out / 'vocab.json'}")
    return 0


def cmd_train(args) -> int:
    cfg = load_run_config(args.config)
    docs, vocab, mcfg, tcfg = _load_inputs(cfg)
    strategy = cfg.strategies[0]
    items = experiments.prepare_items(docs, vocab)
    params, history = model_mod.fit(
        [it.sequence for it in items],
        np.array([it.label for it in items]),
        strategy,
        mcfg,
        tcfg,
        human_attentions=[it.attention for it in items],
        doc_ids=[it.doc_id for it in items],
    )
    model_mod.save_checkpoint(cfg.output_dir / "checkpoint.npz", params, mcfg)
    history.save_csv(cfg.output_dir / "history.csv")
    last = history.epochs[-1]
    print(f"trained {strategy.kind} for {tcfg.epochs} epochs; final train AUC {last.train_auc:.4f}")
    print(f"wrote {cfg.output_dir / 'checkpoint.npz'}, {cfg.output_dir / 'history.csv'}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    docs, vocab, mcfg, tcfg = _load_inputs(cfg)
    results = []
    for size in cfg.sizes:
        for ratio in cfg.ratios:
            spec = experiments.ExperimentSpec(
                size=size,
                ratio=ratio,
                strategies=tuple(cfg.strategies),
                replicates=cfg.replicates,
                test_size=cfg.test_size,
                base_seed=cfg.base_seed,
            )
            results.append(experiments.bootstrap_eval(docs, vocab, spec, mcfg, tcfg))
    experiments.write_replicate_csv(results, cfg.output_dir / "replicates.csv")
    experiments.write_aggregate_csv(results, cfg.output_dir / "aggregate.csv")
    for result in results:
        for kind, res in sorted(result.per_strategy.items()):
            sig = result.significance.get(kind)
            tail = f" p={sig.p_value:.4g}" if sig else ""
            print(f"size={result.spec.size} ratio={result.spec.ratio} {kind}: {res.format_cell()}{tail}")
    print(f"wrote {cfg.output_dir / 'replicates.csv'}, {cfg.output_dir / 'aggregate.csv'}")
    return 0


def cmd_curve(args) -> int:
    cfg = load_run_config(args.config)
    docs, vocab, mcfg, tcfg = _load_inputs(cfg)
    curve = experiments.label_cost_curve(
        docs,
        vocab,
        sizes=cfg.sizes,
        ratio=cfg.ratios[0],
        strategies=tuple(cfg.strategies),
        model_config=mcfg,
        train_config=tcfg,
        replicates=cfg.replicates,
        test_size=cfg.test_size,
        base_seed=cfg.base_seed,
    )
    experiments.write_curve_csv(curve, cfg.output_dir / "curve.csv")
    for kind, gap in sorted(curve.gap_vs_baseline.items()):
        print(f"{kind}: mean labels saved vs baseline at matched AUC: {gap:.1f}")
    print(f"wrote {cfg.output_dir / 'curve.csv'}")
    return 0


def cmd_analyze(args) -> int:
    cfg = load_run_config(args.config)
    docs, vocab, mcfg_cfg, _ = _load_inputs(cfg)
    params, mcfg = model_mod.load_checkpoint(args.checkpoint)
    strategy = cfg.strategies[0]
    masks = []
    for doc in docs:
        seq = subword_tokenize(doc.words, vocab)
        _, trace, _ = model_mod.forward(seq, params, mcfg, strategy)
        token_att = model_mod.head_average(trace, mcfg.n_layers - 1)
        word_att = analysis.token_to_word(token_att, seq.word_alignment)
        if len(word_att) >= 2:
            masks.append(analysis.binarize(word_att, rule=args.rule).mask)
    profile = analysis.positional_profile(masks, source=str(cfg.dataset))
    analysis.write_profile_csv(profile, cfg.output_dir / "profile.csv")
    print(f"analyzed {len(masks)} documents with rule {args.rule}")
    print(f"wrote {cfg.output_dir / 'profile.csv'}")
    return 0


def cmd_synth(args) -> int:
    spec = corpus.SyntheticSpec(
        n_docs=args.n_docs,
        vocab_size=args.filler_vocab,
        length_range=(args.min_len, args.max_len),
        cues_per_doc=args.cues_per_doc,
        seed=args.seed,
    )
    docs = corpus.generate_synthetic(spec)
    corpus.save_dataset(docs, args.output)
    print(f"wrote {len(docs)} documents to {args.output}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(
        data_path=args.data,
        store_path=args.store,
        port=args.port,
        min_highlight_frac=args.min_highlight_frac,
        target_annotators=args.target_annotators,
    )
    return 0


# -- dispatch ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnalign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="validate, filter, and label-resolve a raw dataset")
    p.add_argument("--input", required=True, help="raw dataset (JSON lines)")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--mode", choices=("majority", "self_report"), default="majority")
    p.add_argument("--threshold", type=float, default=corpus.SPARSE_THRESHOLD)
    p.add_argument("--vocab-size", type=int, default=256)
    p.set_defaults(func=cmd_prepare)

    for name, func, help_text in (
        ("train", cmd_train, "fit one model and write a checkpoint"),
        ("sweep", cmd_sweep, "replicated evaluation over a size x ratio grid"),
        ("curve", cmd_curve, "label-cost curve over training-set sizes"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run config (JSON)")
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="attention analytics from a checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--rule", choices=analysis.BINARIZE_RULES, default="mean_sigma")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a planted-cue synthetic corpus")
    p.add_argument("--output", required=True)
    p.add_argument("--n-docs", type=int, default=1200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-len", type=int, default=8)
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--cues-per-doc", type=int, default=2)
    p.add_argument("--filler-vocab", type=int, default=50)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--data", required=True, help="task pool dataset (JSON lines)")
    p.add_argument("--store", required=True, help="append-only submission store")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--min-highlight-frac", type=float, default=corpus.SPARSE_THRESHOLD)
    p.add_argument("--target-annotators", type=int, default=3)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, corpus.ValidationError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

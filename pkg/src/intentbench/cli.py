"""``intentbench`` command-line entry point.

Stages communicate through files: corpora and vector sets are JSONL, models
and reports are JSON, tables are CSV. Each command writes its resolved
arguments as ``<output>.config.json`` beside its main output.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (DEFAULT_MIX, Corpus, SplitConfig, atomic_write_text, load_corpus, save_corpus,
                      stratified_split, synthesize_corpus)
from .embeddings import EmbeddingCache, LabeledVectors, ProviderSpec, embed, embed_corpus, get_provider
from .errors import ConfigError, DataError, IntentBenchError


# -- helpers ---------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _words(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _write_json(path, obj) -> Path:
    atomic_write_text(path, json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    return Path(path)


def _sidecar(out, args: argparse.Namespace) -> None:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"}
    out = Path(out)
    _write_json(out.with_name(out.name + ".config.json"), cfg)


def resolve_provider(name: str, dim: int | None = None, endpoint: str | None = None,
                     auth_env: str | None = None, max_chars: int | None = None) -> ProviderSpec:
    """``titan-like``, ``cohere-like``, ``local:<dim>`` or any name plus
    ``dim`` (remote when ``endpoint`` is given)."""
    if name.startswith("local:"):
        try:
            dim = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad local provider {name!r}; use local:<dim>") from None
    return get_provider(name, dim=dim, endpoint=endpoint, auth_env_var=auth_env, max_chars=max_chars)


def load_model(path):
    from .ann import AnnModel
    from .knn import KnnModel
    from .svm import SvmModel

    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"model not found: {path}") from None
    except ValueError:
        raise DataError(f"{path}: model file is not JSON") from None
    kinds = {"knn": KnnModel, "svm": SvmModel, "ann": AnnModel}
    if not isinstance(d, dict) or d.get("kind") not in kinds:
        raise DataError(f"{path}: unknown model kind {d.get('kind') if isinstance(d, dict) else None!r}")
    try:
        return kinds[d["kind"]].from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, IntentBenchError):
            raise
        raise DataError(f"{path}: malformed {d['kind']} model ({exc})") from None


def make_transport(endpoint: str | None, auth_env: str | None, mock_reply: str | None, delay: float):
    from .llm_router import HttpTransport, MockTransport, keyword_responder

    if endpoint:
        return HttpTransport(endpoint, auth_env)
    return MockTransport(mock_reply if mock_reply else keyword_responder, delay=delay)


# -- dataset ---------------------------------------------------------------

def cmd_dataset_synth(args) -> int:
    mix = _floats(args.mix) if args.mix else list(DEFAULT_MIX)
    total = sum(mix)
    if total > 0 and abs(total - 1.0) < 0.01:
        mix = [m / total for m in mix]    # tolerate rounded fractions such as 0.751,0.039,0.210
    corpus = synthesize_corpus(args.n, mix, seed=args.seed)
    save_corpus(corpus, args.out)
    _sidecar(args.out, args)
    counts = corpus.class_counts()
    print(f"wrote {len(corpus)} utterances to {args.out} " +
          " ".join(f"{lab.value}={c}" for lab, c in counts.items()))
    return 0


def cmd_dataset_split(args) -> int:
    corpus = load_corpus(args.input)
    train, test = stratified_split(corpus, SplitConfig(args.train_frac, args.seed, not args.unstratified))
    save_corpus(train, args.out_train)
    save_corpus(test, args.out_test)
    _sidecar(args.out_train, args)
    print(f"train {len(train)} -> {args.out_train}; test {len(test)} -> {args.out_test}")
    return 0


# -- embed -----------------------------------------------------------------

def cmd_embed(args) -> int:
    provider = resolve_provider(args.provider, args.dim, args.endpoint, args.auth_env, args.max_chars)
    corpus = load_corpus(args.input)
    cache = EmbeddingCache(args.cache) if args.cache else None
    result = embed_corpus(provider, corpus, concurrency=args.concurrency, cache=cache)
    if not result.pairs:
        raise DataError("every utterance was skipped; nothing to write")
    result.to_vectors(provider.provider_id).save(args.out)
    out = Path(args.out)
    if result.skipped:
        skipped = out.with_name(out.stem + ".skipped.jsonl")
        atomic_write_text(skipped, "".join(json.dumps(s.to_record()) + "\n" for s in result.skipped))
    _sidecar(args.out, args)
    print(f"embedded {len(result.pairs)} utterances with {provider.provider_id} (dim {provider.dim}); "
          f"skipped {len(result.skipped)}")
    return 0


# -- training --------------------------------------------------------------

def cmd_train_knn(args) -> int:
    from .knn import knn_fit

    model = knn_fit(LabeledVectors.load(args.train), args.k, args.metric)
    _write_json(args.out, model.to_dict())
    _sidecar(args.out, args)
    print(f"knn k={model.k} metric={model.metric} on {model.X.shape[0]} points -> {args.out}")
    return 0


def cmd_train_svm(args) -> int:
    from .svm import SvmHyperparams, svm_fit

    model = svm_fit(LabeledVectors.load(args.train), SvmHyperparams(args.c, args.class_weight), seed=args.seed)
    _write_json(args.out, model.to_dict())
    _sidecar(args.out, args)
    epochs = [t.epochs for t in model.traces]
    print(f"svm C={args.c} class_weight={args.class_weight} epochs per class {epochs} -> {args.out}")
    return 0


def train_ann(train: LabeledVectors, test: LabeledVectors | None, cfg, validate_on_test: bool,
              validation_fraction: float):
    from .ann import ann_fit, validation_split

    if validate_on_test:
        if test is None:
            raise ConfigError("--validate-on-test needs --test")
        return ann_fit(train, test, cfg=cfg)
    fit_part, val_part = validation_split(train, validation_fraction, cfg.seed)
    return ann_fit(fit_part, val_part, cfg=cfg)


def cmd_train_ann(args) -> int:
    from .ann import TrainConfig

    cfg = TrainConfig(args.lr, args.epochs, args.batch, args.patience, args.seed, args.class_weight)
    train = LabeledVectors.load(args.train)
    test = LabeledVectors.load(args.test) if args.test else None
    model, history = train_ann(train, test, cfg, args.validate_on_test, args.validation_fraction)
    _write_json(args.out, model.to_dict())
    out = Path(args.out)
    _write_json(out.with_name(out.stem + ".history.json"), history.to_dict())
    _sidecar(args.out, args)
    print(f"ann trained {history.epochs} epochs, best epoch {history.best_epoch} "
          f"(val accuracy {max(history.val_accuracy):.4f}) -> {args.out}")
    return 0


def cmd_gridsearch_svm(args) -> int:
    from .svm import GridSearchSpec, grid_search

    spec = GridSearchSpec(tuple(_floats(args.c)), tuple(_words(args.class_weight)), args.folds,
                          args.scoring, args.seed)
    result = grid_search(LabeledVectors.load(args.train), spec, n_jobs=args.jobs)
    lines = ["C,class_weight,mean,std"]
    lines += [f"{c.hyperparams.C:g},{c.hyperparams.class_weight},{c.mean:.6f},{c.std:.6f}" for c in result.table]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    _sidecar(args.out, args)
    print(f"best C={result.best.C:g} class_weight={result.best.class_weight} -> {args.out}")
    return 0


def cmd_sweep_knn(args) -> int:
    from .knn import knn_k_sweep, parse_k_values

    rows = knn_k_sweep(LabeledVectors.load(args.train), LabeledVectors.load(args.test),
                       parse_k_values(args.k), args.metric)
    lines = ["k,f1_conversation,f1_services,f1_document_translation,f1_macro"]
    lines += [f"{r.k}," + ",".join(f"{v:.6f}" for v in (*r.f1, r.macro)) for r in rows]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    _sidecar(args.out, args)
    best = max(rows, key=lambda r: (r.macro, -r.k))
    print(f"swept {len(rows)} values of k; best k={best.k} macro-F1 {best.macro:.4f} -> {args.out}")
    return 0


# -- classify --------------------------------------------------------------

def cmd_classify_llm(args) -> int:
    from .llm_router import ExampleBudget, PromptTemplate, classify, select_examples

    examples = None
    if args.variant == "augmented":
        if not args.examples:
            raise ConfigError("the augmented variant needs --examples")
        examples = select_examples(load_corpus(args.examples), ExampleBudget(), seed=args.seed)
    template = PromptTemplate.load(args.template) if args.template else None
    transport = make_transport(args.endpoint, args.auth_env, args.mock_reply, args.mock_delay)
    verdict = classify(args.question, args.variant, transport, args.retries, examples, template, args.model_id)
    print(json.dumps(verdict.to_dict(), ensure_ascii=False))
    return 0


def cmd_classify_model(args) -> int:
    model = load_model(args.model)
    provider = resolve_provider(args.provider, args.dim, args.endpoint, args.auth_env, args.max_chars)
    vec = embed(provider, args.question)
    label, scores = model.predict(np.asarray(vec))
    print(json.dumps({"label": label.value, "scores": list(scores)}))
    return 0


# -- evaluation ------------------------------------------------------------

def cmd_benchmark(args) -> int:
    from .eval.bench import benchmark

    test = LabeledVectors.load(args.test)
    if args.max_test and args.max_test < len(test):
        test = test.subset(range(args.max_test))
    if args.llm:
        from .llm_router import ExampleBudget, LlmClassifier, select_examples

        examples = None
        if args.llm == "augmented":
            if not args.examples:
                raise ConfigError("--llm augmented needs --examples")
            examples = select_examples(load_corpus(args.examples), ExampleBudget(), seed=args.seed)
        backend = LlmClassifier(make_transport(args.endpoint, args.auth_env, args.mock_reply, args.mock_delay),
                                args.llm, examples)
        cid = args.id or f"llm-{args.llm}"
    else:
        if not args.model:
            raise ConfigError("benchmark needs --model or --llm")
        backend = load_model(args.model)
        cid = args.id or Path(args.model).stem
    report = benchmark(backend, test, runs=args.runs, seed=args.seed, classifier_id=cid,
                       concurrency=args.concurrency)
    report.save(args.out)
    _sidecar(args.out, args)
    print(f"{cid}: macro-F1 {report.macro_f1:.4f}, mean latency {report.latency.mean * 1e3:.3f} ms, "
          f"errors {report.errors} -> {args.out}")
    return 0


def cmd_compare(args) -> int:
    from .eval.bench import EvalReport, compare, emit

    rows = compare([EvalReport.load(p) for p in args.reports])
    text = emit(rows, args.format)
    if args.out:
        atomic_write_text(args.out, text)
        _sidecar(args.out, args)
    else:
        sys.stdout.write(text)
    return 0


def cmd_project(args) -> int:
    from .eval.pca import pca_project

    data = LabeledVectors.load(args.input)
    proj = pca_project(data.X, data.labels, provider=data.provider_id, seed=args.seed)
    atomic_write_text(args.out, proj.to_csv())
    _sidecar(args.out, args)
    print(f"explained variance {proj.explained[0]:.4f}, {proj.explained[1]:.4f} -> {args.out}")
    return 0


# -- pipeline --------------------------------------------------------------

PIPELINE_DEFAULTS = {
    "corpus": "synthetic",
    "n_total": "1668",
    "mix": ",".join(f"{m:.12g}" for m in DEFAULT_MIX),
    "seed": "0",
    "train_fraction": "0.4",
    "providers": "titan-like,cohere-like",
    "backends": "knn,svm,ann",
    "cache": "",
    "concurrency": "1",
    "runs": "1",
    "format": "csv",
    "knn.k": "3",
    "knn.metric": "euclidean",
    "svm.C": "1",
    "svm.class_weight": "balanced",
    "ann.class_weight": "balanced",
    "ann.validation_fraction": "0.2",
    "ann.validate_on_test": "false",
    "llm.endpoint": "",
    "llm.auth_env": "",
    "llm.delay": "0",
    "llm.max_test": "0",
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PIPELINE_DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def resolve_config(path=None, overrides=()) -> dict[str, str]:
    cfg = dict(PIPELINE_DEFAULTS)
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        cfg.update(parse_config_text(p.read_text(encoding="utf-8"), str(p)))
    if overrides:
        cfg.update(parse_config_text("\n".join(overrides), "--set"))
    return cfg


def _embedded(provider: ProviderSpec, corpus: Corpus, cache, concurrency: int) -> LabeledVectors:
    res = embed_corpus(provider, corpus, concurrency=concurrency, cache=cache)
    if not res.pairs:
        raise DataError(f"provider {provider.provider_id} skipped every utterance")
    return res.to_vectors(provider.provider_id)


def run_pipeline(cfg: dict[str, str], out: Path) -> list:
    """Every configured backend on every provider; returns the comparison
    rows. Outputs land in ``out``."""
    from .ann import TrainConfig
    from .eval.bench import benchmark, compare, emit
    from .knn import knn_fit
    from .llm_router import ExampleBudget, LlmClassifier, select_examples
    from .svm import SvmHyperparams, svm_fit

    try:
        seed = int(cfg["seed"])
        runs = int(cfg["runs"])
        concurrency = int(cfg["concurrency"])
        split = SplitConfig(float(cfg["train_fraction"]), seed)
        knn_k = int(cfg["knn.k"])
        svm_hp = SvmHyperparams(float(cfg["svm.C"]), cfg["svm.class_weight"])
        ann_cfg = TrainConfig(seed=seed, class_weight=cfg["ann.class_weight"])
        ann_val = float(cfg["ann.validation_fraction"])
        llm_delay = float(cfg["llm.delay"])
        llm_max = int(cfg["llm.max_test"])
    except ValueError as exc:
        if isinstance(exc, IntentBenchError):
            raise
        raise ConfigError(f"bad config value: {exc}") from None
    backends = _words(cfg["backends"])
    unknown = set(backends) - {"knn", "svm", "ann", "llm", "llm-augmented"}
    if unknown:
        raise ConfigError(f"unknown backends {sorted(unknown)}")
    providers = [resolve_provider(p) for p in _words(cfg["providers"])]
    if not providers and any(b in backends for b in ("knn", "svm", "ann")):
        raise ConfigError("no providers configured")

    if cfg["corpus"] == "synthetic":
        corpus = synthesize_corpus(int(cfg["n_total"]), _floats(cfg["mix"]), seed=seed)
    else:
        corpus = load_corpus(cfg["corpus"])
    train, test = stratified_split(corpus, split)
    save_corpus(train, out / "data" / "train.jsonl")
    save_corpus(test, out / "data" / "test.jsonl")
    cache = EmbeddingCache(cfg["cache"]) if cfg["cache"] else None

    reports = []
    for provider in providers:
        tr = _embedded(provider, train, cache, concurrency)
        te = _embedded(provider, test, cache, concurrency)
        tag = provider.provider_id.replace(":", "-")
        for kind in ("knn", "svm", "ann"):
            if kind not in backends:
                continue
            if kind == "knn":
                model = knn_fit(tr, knn_k, cfg["knn.metric"])
            elif kind == "svm":
                model = svm_fit(tr, svm_hp, seed=seed)
            else:
                model, history = train_ann(tr, te, ann_cfg, _bool(cfg["ann.validate_on_test"]), ann_val)
                _write_json(out / "models" / f"ann-{tag}.history.json", history.to_dict())
            _write_json(out / "models" / f"{kind}-{tag}.json", model.to_dict())
            report = benchmark(model, te, runs=runs, seed=seed, classifier_id=f"{kind}-{tag}")
            report.save(out / "reports" / f"{kind}-{tag}.json")
            reports.append(report)

    llm_test = test if not llm_max else Corpus(test.items[:llm_max], test.provenance)
    transport = make_transport(cfg["llm.endpoint"] or None, cfg["llm.auth_env"] or None, None, llm_delay)
    for kind in ("llm", "llm-augmented"):
        if kind not in backends:
            continue
        variant = "augmented" if kind == "llm-augmented" else "simple"
        examples = select_examples(train, ExampleBudget(), seed) if variant == "augmented" else None
        backend = LlmClassifier(transport, variant, examples)
        report = benchmark(backend, llm_test, runs=runs, seed=seed, classifier_id=kind,
                           concurrency=concurrency)
        report.save(out / "reports" / f"{kind}.json")
        reports.append(report)

    rows = compare(reports)
    fmt = cfg["format"]
    atomic_write_text(out / f"comparison.{ 'md' if fmt in ('md', 'markdown') else fmt}", emit(rows, fmt))
    return rows


def cmd_pipeline(args) -> int:
    cfg = resolve_config(args.config, args.set or ())
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    out = Path(args.out)
    staging = out.parent / f".{out.name}.staging"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        atomic_write_text(staging / "config.resolved.txt",
                          "".join(f"{k} = {v}\n" for k, v in sorted(cfg.items())))
        rows = run_pipeline(cfg, staging)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    out.mkdir(parents=True, exist_ok=True)
    for item in staging.iterdir():
        dest = out / item.name
        if dest.is_dir():
            shutil.rmtree(dest)
        elif dest.exists():
            dest.unlink()
        item.replace(dest)
    staging.rmdir()
    for row in rows:
        print(f"{row.classifier:28s} macro-F1 {row.macro_f1:.4f}  latency {row.latency_mean_s * 1e3:.3f} ms")
    return 0


# -- parser ----------------------------------------------------------------

def _provider_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--provider", required=required, default=None if required else "titan-like",
                   help="titan-like, cohere-like, local:<dim>, or a name combined with --dim/--endpoint")
    p.add_argument("--dim", type=int)
    p.add_argument("--endpoint", help="remote embedding endpoint URL")
    p.add_argument("--auth-env", help="environment variable holding a bearer token")
    p.add_argument("--max-chars", type=int)


def _llm_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--endpoint", help="completion endpoint URL; without it a local mock is used")
    p.add_argument("--auth-env", help="environment variable holding a bearer token")
    p.add_argument("--mock-reply", help="fixed reply for the mock transport")
    p.add_argument("--mock-delay", type=float, default=0.0, help="seconds the mock sleeps per call")
    p.add_argument("--examples", help="training corpus used for the augmented variant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intentbench", description="Three-way intent classification benchmark.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(subparsers, name, func, help_text):
        p = subparsers.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0)
        return p

    ds = sub.add_parser("dataset", help="synthesize or split corpora").add_subparsers(dest="action", required=True)
    p = command(ds, "synth", cmd_dataset_synth, "generate a synthetic labeled corpus")
    p.add_argument("--n", type=int, default=1668)
    p.add_argument("--mix", help="class fractions Conversation,Services,Document_Translation")
    p.add_argument("--out", required=True)
    p = command(ds, "split", cmd_dataset_split, "stratified train/test split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--train-frac", type=float, default=0.4)
    p.add_argument("--unstratified", action="store_true")
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)

    p = command(sub, "embed", cmd_embed, "embed a corpus into a vector file")
    _provider_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache", help="embedding cache directory")
    p.add_argument("--concurrency", type=int, default=1)

    tr = sub.add_parser("train", help="train a classifier").add_subparsers(dest="backend", required=True)
    p = command(tr, "knn", cmd_train_knn, "k-nearest neighbours")
    p.add_argument("--train", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--metric", default="euclidean", choices=["euclidean", "cosine"])
    p.add_argument("--out", required=True)
    p = command(tr, "svm", cmd_train_svm, "one-vs-rest linear SVM")
    p.add_argument("--train", required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--class-weight", default="none", choices=["none", "balanced"])
    p.add_argument("--out", required=True)
    p = command(tr, "ann", cmd_train_ann, "feed-forward network")
    p.add_argument("--train", required=True)
    p.add_argument("--test", help="test vectors, used only with --validate-on-test")
    p.add_argument("--validate-on-test", action="store_true",
                   help="monitor the test set instead of a held-out slice of train")
    p.add_argument("--validation-fraction", type=float, default=0.2)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--patience", type=int, default=25)
    p.add_argument("--class-weight", default="none", choices=["none", "balanced"])
    p.add_argument("--out", required=True)

    gs = sub.add_parser("gridsearch", help="cross-validated hyperparameter search").add_subparsers(
        dest="backend", required=True)
    p = command(gs, "svm", cmd_gridsearch_svm, "grid over C and class weighting")
    p.add_argument("--train", required=True)
    p.add_argument("--c", default="0.1,1,10,100")
    p.add_argument("--class-weight", default="none,balanced")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--scoring", default="macro-f1")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    sw = sub.add_parser("sweep", help="parameter sweeps").add_subparsers(dest="backend", required=True)
    p = command(sw, "knn", cmd_sweep_knn, "test-set F1 for a range of k")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", default="1..25")
    p.add_argument("--metric", default="euclidean", choices=["euclidean", "cosine"])
    p.add_argument("--out", required=True)

    cl = sub.add_parser("classify", help="classify one question").add_subparsers(dest="backend", required=True)
    p = command(cl, "llm", cmd_classify_llm, "prompt-based router")
    p.add_argument("--question", required=True)
    p.add_argument("--variant", default="simple", choices=["simple", "augmented"])
    p.add_argument("--template", help="prompt template file with {question} and {examples}")
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--model-id", default="default")
    _llm_args(p)
    for name in ("knn", "svm", "ann"):
        p = command(cl, name, cmd_classify_model, f"trained {name} model")
        p.add_argument("--model", required=True)
        p.add_argument("--question", required=True)
        _provider_args(p)

    p = command(sub, "benchmark", cmd_benchmark, "time and score a backend on a test set")
    p.add_argument("--test", required=True, help="test vectors (must carry texts for --llm)")
    p.add_argument("--model")
    p.add_argument("--llm", choices=["simple", "augmented"])
    p.add_argument("--id", help="classifier id used in the report")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--max-test", type=int, default=0, help="only use the first N test items")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--out", required=True)
    _llm_args(p)

    p = command(sub, "compare", cmd_compare, "merge reports into one table")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", default="csv", choices=["csv", "md", "json"])
    p.add_argument("--out")

    p = command(sub, "project", cmd_project, "2-D PCA projection as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pipeline", help="run the full comparison from a config file")
    p.set_defaults(func=cmd_pipeline)
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IntentBenchError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())

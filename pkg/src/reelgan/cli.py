"""Command-line pipeline: ingest -> encode -> train -> generate -> evaluate.

Exit codes: 0 success, 1 internal error, 2 bad input, 3 empty result.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import abc, grid, metrics
from .config import ConfigError, RunConfig, iter_keys, load_config
from .gan import CheckpointError, latest_checkpoint, load_checkpoint, restore_gan, sample, train

log = logging.getLogger("reelgan")

EXIT_OK, EXIT_INTERNAL, EXIT_BAD_INPUT, EXIT_EMPTY = 0, 1, 2, 3


class BadInput(Exception):
    pass


class EmptyResult(Exception):
    pass


# --------------------------------------------------------------------------
# commands


def cmd_ingest(args, config: RunConfig) -> int:
    try:
        texts = abc.read_tune_texts(args.input)
    except (OSError, ValueError, KeyError) as err:
        raise BadInput(f"cannot read {args.input}: {err}") from None
    kept, report = abc.filter_corpus(texts, config.filter_gates(), workers=config.run.threads)
    Path(args.report).write_text(report.to_csv())
    Path(args.out).write_text(abc.write_corpus(kept))
    rejected = ", ".join(f"{r}={n}" for r, n in report.rejected_by_reason.items() if n)
    print(f"seen {report.total_seen}, kept {report.kept}, rejected {report.rejected}" + (f" ({rejected})" if rejected else ""))
    if not kept:
        raise EmptyResult("no tunes survived curation")
    return EXIT_OK


def _load_corpus_grids(path, config: RunConfig) -> np.ndarray:
    try:
        texts = abc.read_tune_texts(path)
    except OSError as err:
        raise BadInput(f"cannot read {path}: {err}") from None
    grids = []
    for i, text in enumerate(texts):
        try:
            tune = abc.curate_tune(text, config.filter_gates())
        except abc.TuneError as err:
            raise BadInput(f"{path}: tune {i + 1} is not a curated reel ({err})") from None
        grids.append(grid.tune_to_grid(tune, config.normalization()))
    return np.asarray(grids, dtype=np.float32).reshape(-1, grid.ROWS, grid.COLS)


def cmd_encode(args, config: RunConfig) -> int:
    grids = _load_corpus_grids(args.corpus, config)
    if len(grids) == 0:
        raise BadInput(f"{args.corpus}: corpus holds no tunes")
    grid.write_grid_file(args.out, grids)
    if args.csv:
        Path(args.csv).write_text(grid.grids_to_csv(grids))
    print(f"encoded {len(grids)} tunes -> {args.out}")
    return EXIT_OK


def _read_grids(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise BadInput(f"no such file: {path}")
    try:
        if path.suffix.lower() == ".csv":
            return grid.grids_from_csv(path.read_text())
        return grid.read_grid_file(path)
    except ValueError as err:
        raise BadInput(str(err)) from None


def cmd_train(args, config: RunConfig) -> int:
    data = _read_grids(args.grids)
    if len(data) < 2:
        raise BadInput(f"{args.grids}: need at least 2 grids to train")
    tc = config.train_config()
    gan = None
    if args.resume:
        ckpt_path = latest_checkpoint(args.out_dir)
        if ckpt_path is None:
            raise BadInput(f"--resume: no checkpoint in {args.out_dir}")
        try:
            gan = restore_gan(load_checkpoint(ckpt_path))
        except CheckpointError as err:
            raise BadInput(str(err)) from None
        log.info("resuming from %s (epoch %d)", ckpt_path, gan.epoch)
    result = train(tc, data, args.out_dir, gan=gan, d_spec=config.discriminator_spec(), g_spec=config.generator_spec())
    print(f"trained to epoch {result.gan.epoch} ({len(result.losses)} steps); checkpoints in {args.out_dir}")
    return EXIT_OK


def cmd_generate(args, config: RunConfig) -> int:
    try:
        ckpt = load_checkpoint(args.checkpoint)
    except OSError as err:
        raise BadInput(f"cannot read {args.checkpoint}: {err}") from None
    except CheckpointError as err:
        raise BadInput(str(err)) from None
    grids = sample(ckpt, args.n, config.run.seed)
    tunes = [
        grid.grid_to_tune(g, title=f"Generated reel {i + 1}", spec=config.normalization(), source_id=str(i + 1))
        for i, g in enumerate(grids)
    ]
    text = abc.write_corpus(tunes)
    for i, block in enumerate(abc.split_tunebook(text)):
        # every emitted tune must survive our own curation gates
        try:
            abc.curate_tune(block)
        except abc.TuneError as err:
            raise RuntimeError(f"generated tune {i + 1} does not re-parse: {err}") from err
    Path(args.out).write_text(text)
    if args.grids_out:
        grid.write_grid_file(args.grids_out, grids)
    print(f"wrote {len(tunes)} tunes -> {args.out}")
    return EXIT_OK


def _labelled_inputs(specs) -> list[tuple[str, str]]:
    pairs = []
    for spec in specs:
        label, sep, path = spec.partition("=")
        if not sep:
            label, path = Path(spec).stem, spec
        pairs.append((label, path))
    return pairs


def _profiles(grids, threads: int):
    if threads > 1 and len(grids) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(metrics.phrase_profile, list(grids), chunksize=16))
    return [metrics.phrase_profile(g) for g in grids]


def cmd_evaluate(args, config: RunConfig) -> int:
    from .metrics import plots

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    datasets = {}
    for label, path in _labelled_inputs(args.inputs):
        if Path(path).suffix.lower() == ".abc":
            grids = _load_corpus_grids(path, config)
        else:
            grids = _read_grids(path)
        if len(grids) == 0:
            raise BadInput(f"{path}: no tunes for label {label!r}")
        datasets[label] = np.asarray(grids, dtype=np.float64)

    profiles, histograms = {}, {}
    for label, grids in datasets.items():
        prof = metrics.distribution_profile(grids, config.metrics.normalization, _profiles(grids, config.run.threads))
        profiles[label] = prof
        with open(out / f"profile_{label}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pair", "mean", "normalized"])
            for pair in metrics.PHRASE_PAIRS:
                w.writerow([f"{pair[0]}-{pair[1]}", repr(prof.means[pair]), repr(prof.normalized[pair])])
        hist = metrics.note_histogram(grids, spec=config.normalization())
        histograms[label] = hist
        with open(out / f"histogram_{label}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["midi", "count"])
            w.writerows(sorted(hist.items()))
    plots.plot_profiles(profiles, out / "profiles.svg")
    plots.plot_histograms(histograms, out / "histograms.svg")

    labels = [label for label, grids in datasets.items() for _ in range(len(grids))]
    points = np.concatenate([g.reshape(len(g), -1) for g in datasets.values()])
    tc = config.tsne_config()
    if len(points) < 3 * tc.perplexity:
        log.warning("t-SNE skipped: %d tunes < 3 x perplexity %.0f", len(points), tc.perplexity)
    else:
        res = metrics.tsne_embed(points, tc)
        with open(out / "tsne.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "label", "x", "y"])
            for i, (label, (x, y)) in enumerate(zip(labels, res.embedding)):
                w.writerow([i, label, repr(float(x)), repr(float(y))])
        plots.plot_embedding(res.embedding, labels, out / "tsne.svg")
    print(f"evaluated {len(datasets)} distributions -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _flag(section: str, key: str) -> str:
    if section == "run" and key in ("seed", "threads", "verbose"):
        return f"--{key}"
    return f"--{section}-{key.replace('_', '-')}"


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", default=argparse.SUPPRESS, help="INI-style config file (flags override it)")
    groups = {}
    for section, key, default in iter_keys():
        if section not in groups:
            groups[section] = parent.add_argument_group(f"[{section}] config keys")
        shown = str(default).lower() if isinstance(default, bool) else default
        kwargs = dict(dest=f"cfg:{section}.{key}", default=argparse.SUPPRESS, help=f"{section}.{key} (default: {shown})")
        if isinstance(default, bool):
            groups[section].add_argument(_flag(section, key), action="store_const", const=True, **kwargs)
        else:
            groups[section].add_argument(_flag(section, key), metavar=type(default).__name__.upper(), **kwargs)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(prog="reelgan", description=__doc__, parents=[parent], formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[parent], help="curate ABC tunes into a D-major reel corpus")
    p.add_argument("input", help="ABC file, JSON/CSV corpus dump, or a directory of them")
    p.add_argument("--out", required=True, help="curated corpus (ABC)")
    p.add_argument("--report", required=True, help="filter report (CSV reason,count)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("encode", parents=[parent], help="encode a curated corpus as an RGRD grid dataset")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write one tune per CSV line")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", parents=[parent], help="train the GAN on a grid dataset")
    p.add_argument("grids", help="RGRD or CSV grid dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", action="store_true", help="continue from the latest checkpoint in --out-dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", parents=[parent], help="sample tunes from a checkpoint as ABC")
    p.add_argument("checkpoint")
    p.add_argument("-n", type=int, default=10, help="number of tunes (default: 10)")
    p.add_argument("--out", required=True)
    p.add_argument("--grids-out", help="also write the raw sampled grids (RGRD)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", parents=[parent], help="phrase profiles, note histograms and t-SNE")
    p.add_argument("inputs", nargs="+", metavar="LABEL=PATH", help="grid datasets (.rgrd/.csv) or curated .abc corpora")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {}
    for dest, value in vars(args).items():
        if dest.startswith("cfg:"):
            section, key = dest[4:].split(".", 1)
            overrides[(section, key)] = value
    try:
        config = load_config(getattr(args, "config", None), overrides)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    logging.basicConfig(level=logging.INFO if config.run.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, config)
    except BadInput as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except EmptyResult as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_EMPTY
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

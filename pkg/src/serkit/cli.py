"""Command-line entry point: prepare, train, evaluate, predict, serve.

Defaults reproduce the reference regime, so
``serkit prepare && serkit train && serkit evaluate`` is a full experiment.
Exit codes: 0 success, 1 usage error, 2 runtime failure. Logs go to
stderr, results to stdout.
"""

import argparse
import os
import sys
from pathlib import Path

from . import dataset as ds
from . import evaluate as ev
from . import optim, plots
from .errors import SerkitError
from .model import build_ser_model, load_model, predict, save_model
from .service import DEFAULT_MAX_UPLOAD, ServiceConfig, run_prediction_pipeline, serve


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="serkit",
                     description="Speech emotion recognition pipeline.",
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("prepare", help="scan a RAVDESS tree and write a split manifest",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--data-dir", required=True, help="root of Actor_NN/*.wav files")
    p.add_argument("--out", required=True, help="manifest file to write")
    p.add_argument("--seed", type=int, default=0, help="split sampling seed")
    p.add_argument("--test-size", type=int, default=180, help="blind test set size")

    p = sub.add_parser("train", help="train a model from a manifest",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--manifest", required=True, help="manifest from `prepare`")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--data-dir", default=None,
                   help="audio root (default: the manifest's directory)")
    p.add_argument("--epochs", type=int, default=125, help="training epochs")
    p.add_argument("--batch", type=int, default=16, help="batch size")
    p.add_argument("--seed", type=int, default=0, help="init/shuffle/dropout seed")
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    p.add_argument("--cache-dir", default=None, help="feature cache directory")

    p = sub.add_parser("evaluate", help="evaluate a model on the manifest's test split",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--model", required=True, help="model file from `train`")
    p.add_argument("--manifest", required=True, help="manifest from `prepare`")
    p.add_argument("--report", required=True,
                   help="report text file; .json and .png land next to it")
    p.add_argument("--data-dir", default=None,
                   help="audio root (default: the manifest's directory)")
    p.add_argument("--cache-dir", default=None, help="feature cache directory")

    p = sub.add_parser("predict", help="rank classes for one WAV file",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--model", required=True, help="model file from `train`")
    p.add_argument("--wav", required=True, help="input WAV file")
    p.add_argument("--top", type=int, default=5, help="number of classes to print")

    p = sub.add_parser("serve", help="run the HTTP prediction service",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--model", required=True, help="model file from `train`")
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--port", type=int, default=8000, help="bind port")
    p.add_argument("--ui-dir", default=None, help="static UI assets to host at /")
    p.add_argument("--max-upload-bytes", type=int, default=DEFAULT_MAX_UPLOAD,
                   help="reject request bodies larger than this")

    return parser


def _load_split(manifest_path, data_dir, split, cache_dir):
    entries = [e for e in ds.read_manifest(manifest_path) if e.split == split]
    if not entries:
        raise SerkitError(f"manifest has no '{split}' rows")
    root = Path(data_dir) if data_dir else Path(manifest_path).resolve().parent
    examples = []
    for i, entry in enumerate(entries):
        examples.append(ds.load_example(root, entry, cache_dir=cache_dir))
        if (i + 1) % 100 == 0:
            print(f"  features {i + 1}/{len(entries)}", file=sys.stderr)
    return examples


def _cmd_prepare(args) -> int:
    entries, skipped = ds.scan_dataset(args.data_dir)
    for path, reason in skipped:
        print(f"skipped {path}: {reason}", file=sys.stderr)
    if not entries:
        raise SerkitError(f"no usable speech WAV files under {args.data_dir}")
    train, test = ds.split_train_test(entries, seed=args.seed, test_size=args.test_size)

    manifest_dir = Path(args.out).resolve().parent
    data_root = Path(args.data_dir).resolve()
    tagged = []
    test_ids = {e.source_id for e in test}
    for e in train + test:
        # store paths resolvable from the manifest's own directory
        rel = os.path.relpath(data_root / e.path, manifest_dir)
        tagged.append(ds.ManifestEntry(path=rel, label=e.label, actor_id=e.actor_id,
                                       split="test" if e.source_id in test_ids else "train"))
    ds.write_manifest(args.out, tagged)
    print(f"{len(entries)} clips: {len(train)} train, {len(test)} test "
          f"({len(skipped)} skipped) -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    examples = _load_split(args.manifest, args.data_dir, "train", args.cache_dir)
    model = build_ser_model(seed=args.seed)
    config = optim.TrainingConfig(epochs=args.epochs, batch_size=args.batch,
                                  seed=args.seed, lr=args.lr)
    print(f"training on {len(examples)} examples: {config.epochs} epochs, "
          f"batch {config.batch_size}, lr {config.lr}", file=sys.stderr)
    model, history = optim.train(model, examples, config)
    save_model(model, args.out)

    stem = Path(args.out).with_suffix("")
    optim.write_history(f"{stem}.history.csv", history)
    plots.plot_training_curves(history, f"{stem}.history.png")
    last = history.records[-1]
    print(f"final epoch {last.epoch}: loss {last.train_loss:.4f}, "
          f"accuracy {last.train_acc:.4f}")
    print(f"model -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    examples = _load_split(args.manifest, args.data_dir, "test", args.cache_dir)
    model = load_model(args.model)
    report = ev.evaluate(model, examples)

    text = ev.format_report(report)
    Path(args.report).write_text(text)
    stem = Path(args.report).with_suffix("")
    ev.write_report_json(f"{stem}.json", report)
    plots.plot_confusion(report.confusion, f"{stem}.png")
    sys.stdout.write(text)
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    body = run_prediction_pipeline(model, Path(args.wav).read_bytes())
    for entry in body["ranked"][:args.top]:
        print(f"{entry['gender']} {entry['emotion']}: {entry['probability'] * 100:.1f}%")
    return 0


def _cmd_serve(args) -> int:
    serve(ServiceConfig(model_path=args.model, host=args.host, port=args.port,
                        max_upload_bytes=args.max_upload_bytes,
                        static_asset_dir=args.ui_dir))
    return 0


_COMMANDS = {
    "prepare": _cmd_prepare,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SerkitError, OSError, ValueError) as exc:
        print(f"serkit {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

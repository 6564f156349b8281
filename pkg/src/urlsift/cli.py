"""``urlsift`` command line: tokenize, train, evaluate, predict, serve, vocab.

Exit codes: 0 success, 1 usage/config, 2 data, 3 numerical, 4 I/O.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from dataclasses import asdict

from urlsift.config import MODEL_KINDS, RunConfig, SplitConfig, from_dict, load_config_file
from urlsift.dataset import load_csv
from urlsift.errors import ConfigError, StoreError, UrlsiftError
from urlsift.metrics import REPORT_FORMATS
from urlsift.pipeline import evaluate_bundle, train_bundle
from urlsift.serve import format_prob, run_forever
from urlsift.store import load_bundle, save_bundle
from urlsift.tokenizer import tokenize

log = logging.getLogger("urlsift")

EXIT_OK, EXIT_USAGE = 0, 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _hidden(value: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("at least one hidden layer size is required")
    return sizes


def _add_data_args(p):
    p.add_argument("--data", required=True, help="labelled URL CSV")
    p.add_argument("--url-column", default="url")
    p.add_argument("--label-column", default="type")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="urlsift", description="Lexical URL threat classification.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tokenize", help="print the tokens of URLs, one per line")
    p.add_argument("urls", nargs="+")

    p = sub.add_parser("train", help="train a model and write a bundle")
    _add_data_args(p)
    p.add_argument("--model", choices=MODEL_KINDS, default=None)
    p.add_argument("--out", required=True, help="output bundle path")
    p.add_argument("--config", help="JSON config file (default: $URLSIFT_CONFIG)")
    p.add_argument("--seed", type=int, help="split and model seed")
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--min-df", type=int)
    p.add_argument("--max-features", type=int)
    p.add_argument("--input-mode", choices=("tfidf", "counts"))
    p.add_argument("--alpha", type=float, help="NB smoothing")
    p.add_argument("--lr", type=float, help="SGD learning rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--l2", type=float)
    p.add_argument("--hidden", type=_hidden, help="MLP hidden sizes, e.g. 128 or 256,64")
    p.add_argument("--patience", type=int, help="MLP early-stopping patience (0 disables)")
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--loss-log", help="write MLP epoch,train_loss,val_loss CSV here")

    p = sub.add_parser("evaluate", help="score a bundle on the held-out split")
    p.add_argument("--bundle", required=True)
    _add_data_args(p)
    p.add_argument("--seed", type=int, help="override the split seed stored in the bundle")
    p.add_argument("--test-fraction", type=float, help="override the split fraction stored in the bundle")
    p.add_argument("--train-split", action="store_true", help="evaluate on the training part instead")
    p.add_argument("--format", choices=REPORT_FORMATS, default="text")

    p = sub.add_parser("predict", help="classify URLs")
    p.add_argument("--bundle", required=True)
    p.add_argument("urls", nargs="*")
    p.add_argument("--file", help="file with one URL per line ('-' for stdin)")

    p = sub.add_parser("serve", help="run the newline-delimited TCP classifier")
    p.add_argument("--bundle", required=True)
    p.add_argument("--listen", default="127.0.0.1:8707", help="host:port (port 0 picks a free port)")

    p = sub.add_parser("vocab", help="inspect a bundle's vocabulary")
    p.add_argument("action", choices=("dump",))
    p.add_argument("--bundle", required=True)
    return parser


def resolve_config(args) -> RunConfig:
    """Defaults < config file < command-line flags."""
    cfg = load_config_file(args.config)
    overrides: dict = {}

    def put(section, key, value):
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    if args.model is not None:
        overrides["model"] = args.model
    put("split", "seed", args.seed)
    put("split", "test_fraction", args.test_fraction)
    put("features", "min_df", args.min_df)
    put("features", "max_features", args.max_features)
    put("features", "input_mode", args.input_mode)
    put("nb", "alpha", args.alpha)
    for section in ("logreg", "mlp"):
        put(section, "seed", args.seed)
        put(section, "learning_rate", args.lr)
        put(section, "epochs", args.epochs)
        put(section, "batch_size", args.batch_size)
        put(section, "l2", args.l2)
    put("mlp", "hidden", args.hidden)
    put("mlp", "patience", args.patience)
    put("mlp", "val_fraction", args.val_fraction)
    return from_dict(overrides, cfg, where="command line")


def cmd_tokenize(args, out) -> int:
    for i, url in enumerate(args.urls):
        if i:
            out.write("\n")
        for tok in tokenize(url).tokens:
            out.write(tok + "\n")
    return EXIT_OK


def cmd_train(args, out) -> int:
    cfg = resolve_config(args)
    dataset = load_csv(args.data, args.url_column, args.label_column)
    out.write("# effective config: " + json.dumps(cfg.effective(), sort_keys=True) + "\n")

    loss_lines = ["epoch,train_loss,val_loss"]

    def on_epoch(rec):
        val = "" if rec.val_loss is None else f"{rec.val_loss:.6f}"
        line = f"{rec.epoch},{rec.train_loss:.6f},{val}"
        loss_lines.append(line)
        out.write(line + "\n")
        out.flush()

    if cfg.model == "mlp":
        out.write(loss_lines[0] + "\n")
    run = train_bundle(dataset, cfg, on_epoch=on_epoch)
    out.write("\ntrain split distribution\n" + run.train_distribution.render_text())
    out.write("\ntest split distribution\n" + run.test_distribution.render_text())
    save_bundle(run.bundle, args.out)
    if args.loss_log and cfg.model == "mlp":
        try:
            with open(args.loss_log, "w") as f:
                f.write("\n".join(loss_lines) + "\n")
        except OSError as e:
            raise StoreError(f"cannot write loss log {args.loss_log}: {e.strerror}") from e
    out.write(f"\nwrote {args.out}\n")
    return EXIT_OK


def cmd_evaluate(args, out) -> int:
    bundle = load_bundle(args.bundle)
    dataset = load_csv(args.data, args.url_column, args.label_column)
    split_cfg = None
    if args.seed is not None or args.test_fraction is not None:
        base = SplitConfig(**bundle.metadata.get("split", asdict(SplitConfig())))
        split_cfg = SplitConfig(
            test_fraction=base.test_fraction if args.test_fraction is None else args.test_fraction,
            seed=base.seed if args.seed is None else args.seed,
        )
    evaluation = evaluate_bundle(bundle, dataset, split_cfg, on_train_split=args.train_split)
    out.write(evaluation.render(args.format))
    return EXIT_OK


def predict_lines(bundle, lines) -> list[str]:
    """``<url>\\t<label>\\t<prob>`` per input line; empty lines become errors."""
    urls = [ln.strip() for ln in lines]
    good = [u for u in urls if u]
    results = iter(bundle.classify(good))
    out = []
    for raw, url in zip(lines, urls):
        if not url:
            out.append(f"{raw}\tERROR\tempty-url")
        else:
            label, prob = next(results)
            out.append(f"{url}\t{label}\t{format_prob(prob)}")
    return out


def cmd_predict(args, out) -> int:
    bundle = load_bundle(args.bundle)
    lines = list(args.urls)
    if args.file:
        try:
            if args.file == "-":
                text = sys.stdin.read()
            else:
                with open(args.file, encoding="utf-8") as f:
                    text = f.read()
        except OSError as e:
            raise StoreError(f"cannot read {args.file}: {e.strerror}") from e
        lines.extend(text.split("\n")[:-1] if text.endswith("\n") else text.split("\n"))
    if not lines:
        raise ConfigError("no URLs given (pass them as arguments or with --file)")
    for line in predict_lines(bundle, [ln.rstrip("\r") for ln in lines]):
        out.write(line + "\n")
    return EXIT_OK


def _parse_listen(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep:
        raise ConfigError(f"--listen expects host:port, got {value!r}")
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise ConfigError(f"--listen port must be an integer, got {port!r}") from None


def cmd_serve(args, out) -> int:
    bundle = load_bundle(args.bundle)
    host, port = _parse_listen(args.listen)

    def ready(bound):
        print(f"urlsift: serving {bundle.kind} bundle on {host}:{bound}", file=sys.stderr, flush=True)

    try:
        asyncio.run(run_forever(bundle, host, port, ready))
    except OSError as e:
        print(f"urlsift: cannot listen on {host}:{port}: {e.strerror}", file=sys.stderr)
        return 4
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_vocab(args, out) -> int:
    bundle = load_bundle(args.bundle)
    out.write(bundle.featurizer.vocab.dump_csv())
    return EXIT_OK


COMMANDS = {
    "tokenize": cmd_tokenize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "serve": cmd_serve,
    "vocab": cmd_vocab,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args, out)
    except UrlsiftError as e:
        print(f"urlsift: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: train, evaluate, predict, gradcheck, synth.
Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
All output files are written to a temp path and renamed, so failures never
leave partial artifacts behind.
"""

import argparse
import os
import sys
from contextlib import contextmanager

from . import artifact, dataset, gradcheck, optim, preprocess
from .config import RunConfig, parse_config_file, validate
from .errors import ConfigError, DataError, NumericError
from .model import ModelConfig, predict_probs

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


@contextmanager
def _stage(name):
    """Prefix any pipeline error with the stage it came from."""
    try:
        yield
    except (ConfigError, DataError, NumericError) as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def _write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def format_report(report) -> str:
    c = report.confusion
    return "\n".join([
        f"accuracy = {report.accuracy:.6f}",
        f"precision = {report.precision:.6f}",
        f"recall = {report.recall:.6f}",
        f"f1 = {report.f1:.6f}",
        f"csi = {report.csi:.6f}",
        f"mcc = {report.mcc:.6f}",
        f"tn = {c.tn}",
        f"fp = {c.fp}",
        f"fn = {c.fn}",
        f"tp = {c.tp}",
        "",
        "confusion matrix (rows: true class, columns: predicted class)",
        f"{'':8}{'pred 0':>10}{'pred 1':>10}",
        f"{'true 0':8}{c.tn:>10}{c.fp:>10}",
        f"{'true 1':8}{c.fn:>10}{c.tp:>10}",
    ]) + "\n"


def confusion_csv(c) -> str:
    return f"tn,fp,fn,tp\n{c.tn},{c.fp},{c.fn},{c.tp}\n"


def curves_csv(history) -> str:
    lines = ["epoch,train_loss,train_acc,val_loss,val_acc,lr"]
    for epoch, (tl, ta, vl, va, lr) in enumerate(history, start=1):
        lines.append(f"{epoch},{tl:.6f},{ta:.6f},{vl:.6f},{va:.6f},{lr:.6f}")
    return "\n".join(lines) + "\n"


def _load_run_config(args) -> RunConfig:
    rc = parse_config_file(args.config) if args.config else RunConfig()
    if getattr(args, "data", None):
        rc.data = args.data
    if getattr(args, "synthetic", False):
        rc.synthetic = True
    if getattr(args, "out", None):
        rc.out_dir = args.out
    if getattr(args, "seed", None) is not None:
        rc.seed = args.seed
        rc.split_seed = args.seed
    validate(rc)
    return rc


def cmd_train(args) -> int:
    rc = _load_run_config(args)

    with _stage("load"):
        if rc.data:
            ds = dataset.load_csv(rc.data)
        elif rc.synthetic:
            ds = dataset.synthesize(rc.synthetic_per_class, rc.seed)
        else:
            raise ConfigError("no data path given and synthetic fallback is disabled")
    with _stage("split"):
        spec = dataset.SplitSpec(rc.train_fraction, rc.split_seed, rc.stratified)
        train_ds, test_ds = dataset.split(ds, spec)
    with _stage("denoise"):
        x_train = preprocess.wavelet_denoise(train_ds.features, rc.wavelet)
        x_test = preprocess.wavelet_denoise(test_ds.features, rc.wavelet)
    with _stage("scale"):
        scaler = preprocess.fit_scaler(x_train)
        x_train = preprocess.apply_scaler(x_train, scaler)
        x_test = preprocess.apply_scaler(x_test, scaler)

    model_cfg = ModelConfig()
    with _stage("train"):
        params, tstate = optim.train(model_cfg, x_train, train_ds.labels, rc.hyper())
    with _stage("evaluate"):
        report = optim.evaluate(model_cfg, params, x_test, test_ds.labels)

    with _stage("write"):
        os.makedirs(rc.out_dir, exist_ok=True)
        meta = {
            "seed": str(rc.seed),
            "split_seed": str(rc.split_seed),
            "data_source": ds.source,
            "epochs_run": str(tstate.epoch),
            "best_epoch": str(tstate.best_epoch),
            "test_accuracy": f"{report.accuracy:.6f}",
            "test_f1": f"{report.f1:.6f}",
        }
        model_path = os.path.join(rc.out_dir, "model.bin")
        artifact.save_artifact(model_path, model_cfg, params, scaler, rc.wavelet, meta)
        _write_text(os.path.join(rc.out_dir, "curves.csv"), curves_csv(tstate.history))
        _write_text(os.path.join(rc.out_dir, "confusion.csv"),
                    confusion_csv(report.confusion))
        _write_text(os.path.join(rc.out_dir, "metrics.txt"), format_report(report))

    print(f"trained {tstate.epoch} epochs (best epoch {tstate.best_epoch}) "
          f"on {len(train_ds)} samples [{ds.source}]")
    print(f"test accuracy = {report.accuracy:.6f}, f1 = {report.f1:.6f}")
    for name in ("model.bin", "curves.csv", "confusion.csv", "metrics.txt"):
        print(f"wrote {os.path.join(rc.out_dir, name)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with _stage("load-model"):
        cfg, params, scaler, policy, _ = artifact.load_artifact(args.model)
    with _stage("load"):
        ds = dataset.load_csv(args.data)
    with _stage("denoise"):
        x = preprocess.wavelet_denoise(ds.features, policy)
    with _stage("scale"):
        x = preprocess.apply_scaler(x, scaler)
    with _stage("evaluate"):
        report = optim.evaluate(cfg, params, x, ds.labels)
    with _stage("write"):
        os.makedirs(args.out, exist_ok=True)
        _write_text(os.path.join(args.out, "metrics.txt"), format_report(report))
        _write_text(os.path.join(args.out, "confusion.csv"),
                    confusion_csv(report.confusion))
    print(format_report(report), end="")
    return EXIT_OK


def cmd_predict(args) -> int:
    with _stage("load-model"):
        cfg, params, scaler, policy, _ = artifact.load_artifact(args.model)
    with _stage("load"):
        features, _, problems = dataset.load_features_csv(args.data)
    for line_no, message in problems:
        print(f"row {line_no}: {message}", file=sys.stderr)
    if features.shape[0]:
        with _stage("predict"):
            x = preprocess.apply_scaler(
                preprocess.wavelet_denoise(features, policy), scaler)
            probs = predict_probs(cfg, params, x)
        for p in probs:
            print(f"{p:.6f},{1 if p > 0.5 else 0}")
    return EXIT_DATA if problems else EXIT_OK


def cmd_gradcheck(args) -> int:
    rows = gradcheck.run_all()
    width = max(len(name) for name, _, _ in rows)
    failed = []
    print(f"{'layer':<{width}}  {'max rel error':>14}  {'bound':>8}  status")
    for name, err, bound in rows:
        ok = err < bound
        if not ok:
            failed.append(name)
        print(f"{name:<{width}}  {err:>14.3e}  {bound:>8.0e}  {'ok' if ok else 'FAIL'}")
    if failed:
        print(f"gradient check failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_synth(args) -> int:
    ds = dataset.synthesize(args.n_per_class, args.seed if args.seed is not None else 42)
    lines = []
    for i in range(len(ds)):
        # raw labels: 1 = seizure; non-seizure rows cycle through 2..5
        raw = 1 if ds.labels[i] == 1 else 2 + i % 4
        lines.append(",".join(repr(float(v)) for v in ds.features[i]) + f",{raw}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out} ({len(ds)} rows)")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="seiznet",
                     description="EEG seizure detection: train, evaluate, and "
                                 "inspect a 1D-CNN + attention classifier.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("train", help="train a model and write artifacts")
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--data", help="seizure CSV (178 features + label per row)")
    p.add_argument("--synthetic", action="store_true",
                   help="use the synthetic surrogate dataset")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="master seed (split and training)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a CSV")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--data", required=True, help="seizure CSV with labels")
    p.add_argument("--out", default=".", help="directory for the report files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="print probability,label per input row")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--data", required=True, help="CSV of 178-value rows")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of every layer gradient")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="write a synthetic seizure CSV")
    p.add_argument("--out", default="synthetic.csv", help="output CSV path")
    p.add_argument("--n-per-class", type=int, default=250)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

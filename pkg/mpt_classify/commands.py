# Command line: mpt-classify [global flags] <verb> [verb flags]
#
# Exit codes: 0 every output written, 1 unexpected error or a partially failed
# grid, 2 configuration / validation error, 3 file-system error.

import argparse
import logging
import sys

from mpt_classify import __version__, app_name, get_attr, hooks, log_error, logger
from mpt_classify.config import load_config
from mpt_classify.exceptions import MptClassifyError

log = logger("commands")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3


def _add_method(p: argparse.ArgumentParser):
	p.add_argument("--method", choices=list(hooks.classifier_methods), help="classifier (default: first configured)")
	p.add_argument("--samples-per-class", type=int, dest="samples_per_class", help="P^(k) (default: first in schedule)")


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="mpt-classify", description="MPT spectral-signature classification experiments")
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	parser.add_argument("--config", help="experiment TOML file (default: built-in sphere problem)")
	parser.add_argument("--seed", type=int, help="base seed, overrides [experiment] seed")
	parser.add_argument("--threads", type=int, help="worker cap")
	parser.add_argument("--out", dest="out_dir", help="output directory")
	parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

	verbs = parser.add_subparsers(dest="verb", required=True, metavar="verb")
	verbs.add_parser("build", help="write labeled dictionaries for each P^(k)")

	p = verbs.add_parser("train", help="fit one method on the train split and save it")
	_add_method(p)

	p = verbs.add_parser("evaluate", help="score a saved model on the held-back test split")
	_add_method(p)
	p.add_argument("--model", help="model JSON (default: <out>/train/model_<method>.json)")

	verbs.add_parser("compare", help="kappa vs P^(k) for every configured method")

	p = verbs.add_parser("sweep", help="full-factorial kappa grid")
	p.add_argument(
		"--axis", action="append", metavar="NAME=V1,V2",
		help="sweep axis, repeatable (freq_count, train_snr_db, test_snr_db, samples_per_class, feature_kind, hp.<name>)",
	)

	p = verbs.add_parser("loo", help="leave-one-geometry-out study")
	_add_method(p)
	p.add_argument("--regime", action="append", help="variation regime, repeatable (default: all configured)")

	p = verbs.add_parser("noise-check", help="empirical |e/v| statistics per SNR")
	p.add_argument("--snr", action="append", type=float, help="SNR in dB, repeatable")
	p.add_argument("--draws", type=int, help="noisy draws per SNR")
	return parser


def _configure_logging(level: str):
	handler = logging.StreamHandler(sys.stderr)
	handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
	root = logging.getLogger(app_name)
	root.handlers[:] = [handler]
	root.setLevel(level)
	root.propagate = False


def main(argv: list[str] | None = None) -> int:
	args = build_parser().parse_args(argv)
	_configure_logging(args.log_level)
	overrides = {"seed": args.seed, "threads": args.threads, "out_dir": args.out_dir}

	try:
		cfg = load_config(args.config, overrides)
		run = get_attr(hooks.commands[args.verb])(cfg, args)
	except OSError as e:
		log.error("I/O error: %s", e)
		return EXIT_IO
	except MptClassifyError as e:
		log.error("%s: %s", type(e).__name__, e)
		return EXIT_INVALID
	except Exception as e:
		log_error(title=f"{args.verb} failed: {e}")
		return EXIT_FAILED

	if run.status != "Success":
		log.error("%s finished with status %s: %s", args.verb, run.status, run.counts)
		return EXIT_FAILED
	return EXIT_OK


if __name__ == "__main__":
	sys.exit(main())

"""Decoder comparison and mixture-size sweep on a preprocessed corpus.

    python scripts/run_experiments.py compare --config cfg.json
    python scripts/run_experiments.py msweep --config cfg.json [--grid 5 10 ...]

The config must point at a corpus cache built by ``crntm preprocess`` and
at a word-embedding file.
"""
import argparse
import json
import sys

from crntm import experiments


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("mode", choices=("compare", "msweep"))
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=int, nargs="+", default=list(experiments.M_GRID))
    p.add_argument("--out", help="write reports as JSON here")
    args = p.parse_args(argv)
    cfg, train, test, emb = experiments.load_experiment(args.config)
    if args.mode == "compare":
        rows = experiments.compare_decoders(train, test, emb, cfg)
        print(experiments.format_table(rows, "decoder"))
        for name, ok in experiments.directionality(rows).items():
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    else:
        rows = experiments.m_sweep(train, test, emb, cfg, args.grid)
        print(experiments.format_table(rows, "M"))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({str(k): json.loads(r.to_json()) for k, r in rows.items()}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

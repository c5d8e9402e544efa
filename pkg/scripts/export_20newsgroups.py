"""Write 20NewsGroups as ``label<TAB>text`` files for ``crntm preprocess``.

Needs scikit-learn and network access for the first download. Headers,
footers and quoted replies are stripped.
"""
import argparse
import os

from sklearn.datasets import fetch_20newsgroups


def main(out="data/20ng"):
    os.makedirs(out, exist_ok=True)
    for subset in ("train", "test"):
        ds = fetch_20newsgroups(subset=subset, remove=("headers", "footers", "quotes"))
        with open(os.path.join(out, f"{subset}.txt"), "w", encoding="utf-8") as fh:
            for text, target in zip(ds.data, ds.target):
                fh.write(f"{ds.target_names[target]}\t{' '.join(text.split())}\n")
    print(f"wrote {out}/train.txt and {out}/test.txt")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/20ng", help="output directory")
    main(ap.parse_args().out)

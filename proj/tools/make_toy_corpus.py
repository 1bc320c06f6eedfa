#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpora in data/.

toy_1000.txt   1000 unlabeled documents drawn from five themes.
labeled_news.tsv   250 documents, label<TAB>text, one theme per label.
"""
import argparse
import pathlib
import random

THEMES = {
    "sports": "game team season player coach league match score goal win championship stadium fans "
              "tournament playoff referee pitch striker defense victory".split(),
    "politics": "election government policy minister vote parliament senator campaign president law "
                "party debate reform congress budget cabinet governor ballot coalition".split(),
    "science": "research study scientists data experiment climate energy space planet species "
               "laboratory physics biology genome telescope theory evidence discovery particle".split(),
    "business": "market company shares investors profit revenue bank economy stock growth "
                "industry trade price earnings merger startup inflation quarter retail".split(),
    "health": "patients hospital doctors disease treatment vaccine health medical drug clinic "
              "virus symptoms therapy nurses diagnosis surgery infection diet cancer".split(),
}
FILLER = ("the and with from about this that after before over into their were have said also "
          "year week people report time new first last would could").split()


def document(rng, main, mix):
    length = rng.randint(25, 60)
    words = []
    for _ in range(length):
        r = rng.random()
        if r < 0.35:
            words.append(rng.choice(FILLER))
        elif r < 0.85 or mix is None:
            words.append(rng.choice(THEMES[main]))
        else:
            words.append(rng.choice(THEMES[mix]))
    return " ".join(words)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=20240214)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    names = sorted(THEMES)

    with open(out / "toy_1000.txt", "w") as f:
        for _ in range(1000):
            main_theme = rng.choice(names)
            mix = rng.choice([n for n in names if n != main_theme]) if rng.random() < 0.3 else None
            f.write(document(rng, main_theme, mix) + "\n")

    with open(out / "labeled_news.tsv", "w") as f:
        for i in range(250):
            label = names[i % len(names)]
            mix = rng.choice([n for n in names if n != label]) if rng.random() < 0.2 else None
            f.write(label + "\t" + document(rng, label, mix) + "\n")


if __name__ == "__main__":
    main()

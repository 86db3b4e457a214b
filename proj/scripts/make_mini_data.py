#!/usr/bin/env python3
"""Regenerates the bundled synthetic mini dataset under data/mini/.

Everything is derived from a fixed seed so the files are reproducible.
The corpus mixes topical English-ish vocabulary with short hex tokens and
the literal token "rec" so that offline mock generations (items shaped
like "rec-1a2b") overlap the collection vocabulary and produce non-trivial
clarity and retrieval scores.
"""

import json
import random
from pathlib import Path

SEED = 20240901
OUT = Path(__file__).resolve().parent.parent / "data" / "mini"

TOPICS = {
    "flights": ["cheap", "flights", "airline", "tickets", "airport", "travel",
                "luggage", "booking", "europe", "deals"],
    "recipes": ["pasta", "recipe", "sauce", "baking", "oven", "dinner",
                "ingredients", "chicken", "dessert", "vegan"],
    "movies": ["movie", "film", "actor", "director", "trailer", "review",
               "cinema", "oscar", "sequel", "cast"],
    "hiking": ["mountain", "trail", "hiking", "boots", "summit", "camping",
               "backpack", "altitude", "weather", "maps"],
    "laptops": ["laptop", "battery", "screen", "keyboard", "gaming",
                "ultrabook", "review", "price", "warranty", "charger"],
    "gardening": ["garden", "plants", "soil", "seeds", "watering", "pruning",
                  "compost", "flowers", "vegetables", "greenhouse"],
    "finance": ["stocks", "market", "invest", "savings", "interest", "fund",
                "portfolio", "dividend", "broker", "crypto"],
    "music": ["guitar", "chords", "concert", "album", "band", "lyrics",
              "piano", "vinyl", "playlist", "festival"],
}
GENERAL = ["guide", "best", "how", "top", "list", "near", "me", "online",
           "free", "new", "2020", "compare", "vs", "ideas", "tips"]


def make_corpus(rng, n_docs=500, n_hex=2500):
    hex_pool = []
    seen = set()
    while len(hex_pool) < n_hex:
        token = "%04x" % rng.randrange(65536)
        if token not in seen:
            seen.add(token)
            hex_pool.append(token)

    topics = list(TOPICS)
    docs = []
    for d in range(n_docs):
        topic = topics[d % len(topics)]
        words = []
        length = rng.randint(30, 80)
        for _ in range(length):
            r = rng.random()
            if r < 0.55:
                words.append(rng.choice(TOPICS[topic]))
            elif r < 0.75:
                words.append(rng.choice(GENERAL))
            elif r < 0.9:
                words.append(rng.choice(hex_pool))
            else:
                words.append("rec")
        docs.append({"id": "doc%03d" % d, "text": " ".join(words)})
    return docs


def make_queries(rng):
    queries = []
    topics = list(TOPICS)
    for q in range(25):
        topic = topics[q % len(topics)]
        n = rng.randint(1, 3)
        words = rng.sample(TOPICS[topic], n)
        queries.append(("q%02d" % (q + 1), " ".join(words)))
    return queries


def make_qrels(rng, docs, queries):
    lines = []
    for qid, text in queries:
        terms = set(text.split())
        judged = 0
        for doc in docs:
            tokens = doc["text"].split()
            overlap = sum(1 for t in terms if t in tokens)
            if overlap == 0:
                continue
            if overlap >= len(terms) and rng.random() < 0.8:
                grade = 2 if rng.random() < 0.3 else 1
            elif rng.random() < 0.25:
                grade = 1
            else:
                continue
            lines.append(f"{qid} 0 {doc['id']} {grade}")
            judged += 1
            if judged >= 40:
                break
        if judged == 0:  # keep every query judged
            doc = rng.choice(docs)
            lines.append(f"{qid} 0 {doc['id']} 1")
    return lines


def make_sessions(rng):
    lines = []
    topics = list(TOPICS)
    for s in range(80):
        topic = topics[s % len(topics)]
        vocab = TOPICS[topic]
        length = rng.randint(2, 5)
        base = rng.sample(vocab, 2)
        session_id = "s%03d" % s
        for step in range(length):
            extra = rng.sample(vocab + GENERAL, rng.randint(0, 2))
            words = base + extra if step > 0 else base
            lines.append(f"{session_id}\t{' '.join(words)}")
    return lines


def main():
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)

    docs = make_corpus(rng)
    with open(OUT / "corpus.jsonl", "w") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")

    queries = make_queries(rng)
    with open(OUT / "queries.tsv", "w") as fh:
        for qid, text in queries:
            fh.write(f"{qid}\t{text}\n")

    with open(OUT / "qrels.txt", "w") as fh:
        fh.write("\n".join(make_qrels(rng, docs, queries)) + "\n")

    with open(OUT / "sessions.tsv", "w") as fh:
        fh.write("\n".join(make_sessions(rng)) + "\n")

    with open(OUT / "config.gqr", "w") as fh:
        fh.write(
            "# bundled mini experiment (synthetic data, offline backends)\n"
            "corpus = corpus.jsonl\n"
            "queries = queries.tsv\n"
            "qrels = qrels.txt\n"
            "sessions = sessions.tsv\n"
            "prompt_pool = ../prompts/default_pool.jsonl\n"
            "backend = mock\n"
            "embedding_provider = hashing\n"
            "seed = 42\n"
            "workers = 4\n"
            "k = 6\n"
            "n_examples = 10\n"
            "alpha = 0.01\n"
        )
    print(f"wrote mini dataset to {OUT}")


if __name__ == "__main__":
    main()

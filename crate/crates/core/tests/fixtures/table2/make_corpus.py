#!/usr/bin/env python3
"""Writes a synthetic canonical corpus whose per-document page and region
counts equal the published dataset statistics. Boxes and fine classes are
arbitrary; only the counts carry meaning.

    python3 make_corpus.py            # writes ./corpus
"""

import json
import random
from pathlib import Path

COLUMNS = [
    "critical_apparatus", "commentary", "footnotes", "number",
    "others", "paratext", "primary_text", "running_header",
]

# id, title, year, corpus, public domain, pages, then regions per class in
# COLUMNS order
DOCUMENTS = [
    ("lobeck_1835", "Lobeck", 1835, "internal", True, 61, [0, 20, 13, 227, 32, 61, 6, 67]),
    ("campbell_1881", "Campbell", 1881, "internal", True, 42, [26, 52, 11, 112, 20, 42, 16, 26]),
    ("jebb_1896", "Jebb", 1896, "internal", True, 43, [25, 50, 8, 87, 55, 43, 11, 18]),
    ("schneidewin_1853", "Schneidewin", 1853, "internal", True, 62, [0, 84, 3, 126, 10, 62, 20, 42]),
    ("wecklein_1894", "Wecklein", 1894, "internal", True, 42, [0, 35, 2, 145, 12, 42, 5, 41]),
    ("colonna_1975", "Colonna", 1975, "internal", False, 40, [28, 0, 10, 164, 12, 40, 12, 26]),
    ("deromilly_1976", "De Romilly", 1976, "internal", False, 41, [28, 33, 4, 140, 18, 41, 8, 30]),
    ("ferrari_1974", "Ferrari", 1974, "internal", False, 40, [0, 57, 8, 111, 15, 40, 9, 29]),
    ("garvie_1998", "Garvie", 1998, "internal", False, 40, [9, 10, 6, 136, 15, 40, 7, 10]),
    ("kamerbeek_1953", "Kamerbeek", 1953, "internal", False, 40, [0, 30, 12, 38, 9, 40, 10, 0]),
    ("paduano_1982", "Paduano", 1982, "internal", False, 40, [0, 22, 0, 139, 20, 40, 9, 15]),
    ("untersteiner_1934", "Untersteiner", 1934, "internal", False, 40, [0, 27, 0, 76, 16, 40, 7, 26]),
    ("classen_1889", "Classen & Steup", 1889, "external", True, 41, [0, 44, 0, 74, 3, 19, 22, 37]),
    ("norden_1903", "Norden", 1903, "external", True, 40, [10, 16, 2, 107, 18, 6, 9, 38]),
    ("furieux_1896", "Furieux", 1896, "external", True, 40, [30, 60, 8, 140, 44, 5, 31, 37]),
]

FINE = {
    "commentary": ["commentary"],
    "critical_apparatus": ["critical_apparatus"],
    "footnotes": ["footnotes"],
    "number": ["page_number", "text_number"],
    "others": ["bibliography", "handwritten_marginalia", "index", "others",
               "printed_marginalia", "table_of_contents", "title", "translation"],
    "paratext": ["appendix", "introduction", "preface"],
    "primary_text": ["primary_text"],
    "running_header": ["running_header"],
}

WIDTH, HEIGHT = 1200, 1800
SLOT_H, SLOTS_PER_COLUMN = 20, 85


def slot_box(k):
    col, row = divmod(k, SLOTS_PER_COLUMN)
    x = 10 + col * 300
    y = 10 + row * SLOT_H
    return {"x_min": x, "y_min": y, "x_max": x + 280, "y_max": y + SLOT_H - 4}


def main():
    rng = random.Random(20221007)
    root = Path(__file__).resolve().parent / "corpus"
    entries = []
    for doc_id, title, year, corpus, pd, n_pages, counts in DOCUMENTS:
        per_page = [[] for _ in range(n_pages)]
        for coarse, n in zip(COLUMNS, counts):
            for _ in range(n):
                per_page[rng.randrange(n_pages)].append(coarse)
        (root / doc_id).mkdir(parents=True, exist_ok=True)
        rels = []
        for i, classes in enumerate(per_page):
            rng.shuffle(classes)
            page_id = f"{doc_id}_{i:04d}"
            regions = [
                {
                    "id": f"r{k}",
                    "box": slot_box(k),
                    "fine_class": rng.choice(FINE[c]),
                    "coarse_class": c,
                    "source": "manual",
                }
                for k, c in enumerate(classes)
            ]
            page = {
                "schema_version": 1,
                "id": page_id,
                "image_path": f"images/{page_id}.png",
                "image_width_px": WIDTH,
                "image_height_px": HEIGHT,
                "words": [],
                "regions": regions,
            }
            rel = f"{doc_id}/{page_id}.json"
            (root / rel).write_text(json.dumps(page, separators=(",", ":")) + "\n")
            rels.append(rel)
        entries.append({
            "id": doc_id,
            "title": title,
            "year": year,
            "languages": [],
            "public_domain": pd,
            "corpus": corpus,
            "pages": rels,
        })
    manifest = {"schema_version": 1, "documents": entries}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


if __name__ == "__main__":
    main()

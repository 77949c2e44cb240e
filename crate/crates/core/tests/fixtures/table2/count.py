#!/usr/bin/env python3
"""Counts pages and regions per coarse class in a canonical corpus and
writes the table as TSV.

    python3 count.py corpus/manifest.json > expected.tsv
"""

import json
import sys
from collections import Counter
from pathlib import Path

COLUMNS = [
    "critical_apparatus", "commentary", "footnotes", "number",
    "others", "paratext", "primary_text", "running_header",
]


def row(label, pages, counter):
    return "\t".join([label, str(pages)] + [str(counter[c]) for c in COLUMNS])


def main():
    manifest_path = Path(sys.argv[1])
    manifest = json.loads(manifest_path.read_text())
    groups = {"internal_public_domain": [], "internal_copyrighted": [], "external": []}
    for doc in manifest["documents"]:
        counter = Counter()
        for rel in doc["pages"]:
            page = json.loads((manifest_path.parent / rel).read_text())
            counter.update(r["coarse_class"] for r in page["regions"])
        if doc["corpus"] == "external":
            group = "external"
        elif doc["public_domain"]:
            group = "internal_public_domain"
        else:
            group = "internal_copyrighted"
        label = f'{doc["title"]} {doc["year"]}'
        groups[group].append((label, len(doc["pages"]), counter, doc["public_domain"]))

    print("\t".join(["commentary", "pages"] + COLUMNS))
    pd_pages, pd_counter = 0, Counter()
    all_pages, all_counter = 0, Counter()
    for group, rows in groups.items():
        g_pages, g_counter = 0, Counter()
        for label, pages, counter, pd in rows:
            print(row(label, pages, counter))
            g_pages += pages
            g_counter.update(counter)
            if pd:
                pd_pages += pages
                pd_counter.update(counter)
        all_pages += g_pages
        all_counter.update(g_counter)
        print(row(f"total {group}", g_pages, g_counter))
    print(row("total public_domain", pd_pages, pd_counter))
    print(row("total all", all_pages, all_counter))


if __name__ == "__main__":
    main()

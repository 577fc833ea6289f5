"""Regenerate the bundled demo data in src/i3kit/data/.

The output is a pure function of the seed, so running this twice gives the
same files.  Journals differ in their citation rate so that the demo run has
units above and below expectation.
"""

import argparse
import csv
import random
from pathlib import Path

from i3kit.aggregation import parse_address

JOURNALS = {  # name: mean citations
    "NANO LETT": 40.0,
    "ADV MATER": 32.0,
    "SMALL": 18.0,
    "NANOTECHNOLOGY": 8.0,
    "J NANOSCI NANOTECHNO": 3.0,
    "J NANOPART RES": 5.0,
    "MICRO NANO LETT": 1.5,
    "IEEE T NANOTECHNOL": 9.0,
}

# (institute, city segment, country segment, lat, lon, in gazetteer)
SITES = [
    ("Univ Amsterdam", "1012 WX Amsterdam", "Netherlands", 52.37, 4.90, True),
    ("Delft Univ Technol", "2628 CD Delft", "Netherlands", 52.01, 4.36, True),
    ("Univ Cambridge", "Cambridge CB2 1TN", "England", 52.21, 0.12, True),
    ("Univ Oxford", "Oxford OX1 3PU", "England", 51.75, -1.26, True),
    ("Max Planck Inst Festkorperforsch", "D-70569 Stuttgart", "Germany", 48.78, 9.18, True),
    ("Tech Univ Munich", "D-85748 Garching", "Germany", 48.25, 11.65, True),
    ("CNRS", "F-75016 Paris", "France", 48.86, 2.35, True),
    ("ETH", "CH-8093 Zurich", "Switzerland", 47.38, 8.54, True),
    ("MIT", "Cambridge", "MA 02139 USA", 42.36, -71.09, True),
    ("Harvard Univ", "Cambridge", "MA 02138 USA", 42.37, -71.12, True),
    ("Univ Calif Berkeley", "Berkeley", "CA 94720 USA", 37.87, -122.26, True),
    ("Chinese Acad Sci", "Beijing 100080", "Peoples R China", 39.90, 116.40, True),
    ("Tsinghua Univ", "Beijing 100084", "Peoples R China", 39.90, 116.40, True),
    ("Natl Univ Singapore", "Singapore 117576", "Singapore", 1.29, 103.78, True),
    ("Univ Tokyo", "Tokyo 1138656", "Japan", 35.71, 139.76, True),
    ("Seoul Natl Univ", "Seoul 151744", "South Korea", 37.46, 126.95, True),
    ("Indian Inst Sci", "Bangalore 560012", "India", 12.97, 77.59, False),
]

DOC_TYPES = ["Article"] * 80 + ["Review"] * 6 + ["Letter"] * 6 + ["Proceedings Paper"] * 6 + ["Editorial Material"] * 2
SURNAMES = ["Smith", "Wang", "Li", "Muller", "Dupont", "Tanaka", "Kim", "Jansen", "Rossi", "Garcia", "Chen", "Brown"]
HEADER = ["PT", "AU", "TI", "SO", "DT", "C1", "NR", "TC", "PY", "UT"]


def _cites(rng, mean):
    # geometric-ish skew with plenty of ties at the low end
    return int(rng.expovariate(1.0 / mean)) if mean > 0 else 0


def make(seed: int, n: int, outdir: Path) -> None:
    rng = random.Random(seed)
    journals = list(JOURNALS)
    rows = []
    for i in range(n):
        journal = journals[i % len(journals)] if i < 2 * len(journals) else rng.choice(journals)
        n_auth = rng.randint(1, 4)
        authors = [f"{rng.choice(SURNAMES)}, {chr(65 + rng.randrange(26))}" for _ in range(n_auth)]
        if rng.random() < 0.08:
            c1 = ""
        else:
            sites = rng.sample(SITES, rng.choice([1, 1, 1, 2, 2, 3]))
            c1 = "; ".join(f"[{authors[0]}] {inst}, Dept Phys, {city}, {country}"
                           if k == 0 else f"{inst}, {city}, {country}"
                           for k, (inst, city, country, *_rest) in enumerate(sites))
        rows.append([
            "J",
            "; ".join(authors),
            f"Nanostructure study {i + 1}",
            journal,
            rng.choice(DOC_TYPES),
            c1,
            str(rng.randint(5, 60)),
            str(_cites(rng, JOURNALS[journal])),
            str(rng.choice([2007, 2007, 2008])),
            f"WOS:{i + 1:015d}",
        ])
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "fixture.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(HEADER) + "\n")
        for r in rows:
            fh.write("\t".join(r) + "\n")

    seen = set()
    with open(outdir / "gazetteer.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["city", "country", "lat", "lon"])
        for inst, city, country, lat, lon, listed in SITES:
            addr = parse_address(f"{inst}, {city}, {country}")
            key = (addr.city, addr.country)
            if listed and key not in seen:
                seen.add(key)
                w.writerow([*key, lat, lon])

    with open(outdir / "links.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cited_id", "citing_nrefs"])
        for r in rows:
            if r[4] == "Editorial Material":
                continue
            for _ in range(int(r[7])):
                w.writerow([r[9], rng.randint(10, 80)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20100)
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--outdir", type=Path, default=Path(__file__).resolve().parents[1] / "src" / "i3kit" / "data")
    args = ap.parse_args()
    make(args.seed, args.n, args.outdir)


if __name__ == "__main__":
    main()

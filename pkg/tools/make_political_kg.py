#!/usr/bin/env python3
"""Regenerate the political KG shipped in src/stancegraph/data/political_kg/.

Deterministic: fixed RNG seed, fixed name pools. Targets the reference
scale of 1,071 entities and 10,703 triples with the ten entity types and
ten relations of the schema. Scorecard files are emitted alongside, and
the stance triples in triples.tsv are exactly the bucketed scorecards.

Run from the repo root after an editable install:
    python tools/make_political_kg.py
"""

from pathlib import Path

import numpy as np

from stancegraph.kg import SCORE_BUCKETS

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "stancegraph" / "data" / "political_kg"

OFFICES = {
    "president": "White House",
    "supreme_court_justice": "Supreme Court",
    "governor": "Governorship",
    "senator": "Senate",
    "congressperson": "House of Representatives",
}
PERIODS = [f"{n}th Congress" for n in range(110, 118)]
STATES = [
    "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado",
    "Connecticut", "Delaware", "Florida", "Georgia", "Hawaii", "Idaho",
    "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky", "Louisiana",
    "Maine", "Maryland", "Massachusetts", "Michigan", "Minnesota",
    "Mississippi", "Missouri", "Montana", "Nebraska", "Nevada",
    "New Hampshire", "New Jersey", "New Mexico", "New York",
    "North Carolina", "North Dakota", "Ohio", "Oklahoma", "Oregon",
    "Pennsylvania", "Rhode Island", "South Carolina", "South Dakota",
    "Tennessee", "Texas", "Utah", "Vermont", "Virginia", "Washington",
    "West Virginia", "Wisconsin", "Wyoming",
]
PARTIES = ["Democratic Party", "Republican Party", "Independent"]
IDEOLOGIES = ["liberal_values", "conservative_values"]

FIRST_NAMES = [
    "Alan", "Brenda", "Carl", "Dana", "Elena", "Frank", "Grace", "Hector",
    "Irene", "Jonah", "Karen", "Leon", "Mona", "Nolan", "Opal", "Perry",
    "Quinn", "Rosa", "Saul", "Tessa", "Umar", "Vera", "Wade", "Ximena",
    "Yusuf", "Zelda", "Arthur", "Bianca", "Clark", "Daphne", "Ernest",
    "Flora", "Gideon", "Hattie", "Isaac", "June", "Kendall", "Lorna",
    "Miles", "Nadia",
]
LAST_NAMES = [
    "Abbott", "Barlow", "Calloway", "Draper", "Ellison", "Fairbanks",
    "Granger", "Holloway", "Ingram", "Jennings", "Keller", "Lockhart",
    "Mercer", "Norwood", "Ogden", "Prescott", "Quimby", "Rutledge",
    "Sheffield", "Thorne", "Underwood", "Vance", "Whitfield", "Xander",
    "Yates", "Zimmer", "Ashford",
]

# Person counts per type; together with the 68 structural entities this
# sums to 1,071.
N_PRESIDENTS = 3
N_JUSTICES = 9
N_GOVERNORS = 91
N_SENATORS = 150
N_CONGRESS = 750
N_PERSONS = N_PRESIDENTS + N_JUSTICES + N_GOVERNORS + N_SENATORS + N_CONGRESS

# overlap_with windows: 870 persons serve six congress periods, the rest
# five, filling the triple budget to exactly 10,703.
N_SIX_PERIOD = 870


def person_name(i: int) -> str:
    # (i mod 40, i mod 27) is injective for i < lcm(40, 27) = 1080.
    return f"{FIRST_NAMES[i % len(FIRST_NAMES)]} {LAST_NAMES[i % len(LAST_NAMES)]}"


def bucket_relation(score: float) -> str:
    for lower, relation in SCORE_BUCKETS:
        if score >= lower:
            return relation
    raise AssertionError


def main() -> None:
    rng = np.random.default_rng(20260401)
    persons = []  # (name, entity_type, party, state)
    types = (
        ["president"] * N_PRESIDENTS
        + ["supreme_court_justice"] * N_JUSTICES
        + ["governor"] * N_GOVERNORS
        + ["senator"] * N_SENATORS
        + ["congressperson"] * N_CONGRESS
    )
    for i, etype in enumerate(types):
        party = PARTIES[2] if (etype == "governor" and i % 13 == 0) else PARTIES[i % 2]
        persons.append((person_name(i), etype, party, STATES[i % len(STATES)]))
    assert len({p[0] for p in persons}) == N_PERSONS

    entity_lines = [(name, "elected_office") for name in OFFICES.values()]
    entity_lines += [(p, "time_period") for p in PERIODS]
    entity_lines += [(s, "state") for s in STATES]
    entity_lines += [(p, "political_party") for p in PARTIES]
    entity_lines += [(i, "political_ideology") for i in IDEOLOGIES]
    entity_lines += [(name, etype) for name, etype, _, _ in persons]

    triples = []
    for name, etype, party, state in persons:
        triples.append((name, "member_of", OFFICES[etype]))
        triples.append((name, "affiliated_to", party))
        triples.append((name, "from", state))
    president_names = [p[0] for p in persons[:N_PRESIDENTS]]
    justice_names = [p[0] for p in persons[N_PRESIDENTS : N_PRESIDENTS + N_JUSTICES]]
    for j, justice in enumerate(justice_names):
        triples.append((president_names[j % N_PRESIDENTS], "appoint", justice))
    for i, (name, _, _, _) in enumerate(persons):
        length = 6 if i < N_SIX_PERIOD else 5
        start = i % (len(PERIODS) - length + 1)
        for k in range(start, start + length):
            triples.append((name, "overlap_with", PERIODS[k]))

    # Scorecards over the 900 legislators; one liberal-target and one
    # conservative-target file, bucketed into the five stance relations.
    legislators = persons[N_PRESIDENTS + N_JUSTICES + N_GOVERNORS :]
    liberal_rows, conservative_rows = [], []
    for name, _, party, _ in legislators:
        if party == "Democratic Party":
            lib = rng.uniform(70.0, 100.0)
        else:
            lib = rng.uniform(0.0, 30.0)
        con = float(np.clip(100.0 - lib + rng.uniform(-5.0, 5.0), 0.0, 100.0))
        lib, con = round(lib, 1), round(con, 1)
        liberal_rows.append((name, lib, "liberal_values"))
        conservative_rows.append((name, con, "conservative_values"))
        triples.append((name, bucket_relation(lib), "liberal_values"))
        triples.append((name, bucket_relation(con), "conservative_values"))

    assert len(entity_lines) == 1071, len(entity_lines)
    assert len(triples) == 10703, len(triples)
    assert len(set(triples)) == len(triples)

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    with open(OUT_DIR / "entities.tsv", "w", encoding="utf-8") as fh:
        for name, etype in entity_lines:
            fh.write(f"{name}\t{etype}\n")
    with open(OUT_DIR / "triples.tsv", "w", encoding="utf-8") as fh:
        for h, r, t in triples:
            fh.write(f"{h}\t{r}\t{t}\n")
    for fname, rows in (
        ("scorecard_liberal.tsv", liberal_rows),
        ("scorecard_conservative.tsv", conservative_rows),
    ):
        with open(OUT_DIR / fname, "w", encoding="utf-8") as fh:
            for name, score, target in rows:
                fh.write(f"{name}\t{score}\t{target}\n")
    print(f"wrote {len(entity_lines)} entities, {len(triples)} triples to {OUT_DIR}")


if __name__ == "__main__":
    main()

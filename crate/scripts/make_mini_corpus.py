"""Generate the bundled mini-corpus and matching word vectors.

Four themes with three subthemes each; every document mixes words of its
subtheme, its theme and a shared general pool, padded with stopwords and a
few drop-list phrases. Vectors are keyed by the Snowball English stems the
default tokenizer produces, clustered by theme and subtheme. A handful of
general words get no vector so evaluation exercises partial coverage.

    python3 scripts/make_mini_corpus.py
"""

import json
import random
from pathlib import Path

from nltk.stem.snowball import SnowballStemmer

SEED = 20200301
DOCS_PER_SUB = 42
DIM = 32
OUT = Path(__file__).resolve().parent.parent / "crates" / "topictree" / "data"

THEMES = {
    "immunology": (
        "vaccine antibody immune antigen adjuvant serum neutralizing titer booster "
        "lymphocyte cytokine immunogenicity epitope".split(),
        {
            "mrna": "lipid nanoparticle messenger encoding delivery translation construct "
            "formulation liposome plasmid codon transcript uridine".split(),
            "swine": "pig porcine piglet farm diarrhea herd sow swine intestinal "
            "veterinary litter feed weaning".split(),
            "trial": "participant placebo dose efficacy randomized volunteer enrollment "
            "blinded phase endpoint reactogenicity adverse safety".split(),
        },
    ),
    "epidemiology": (
        "transmission outbreak incidence population epidemic spread surveillance "
        "prevalence contact exposure cluster community".split(),
        {
            "modeling": "model simulation reproduction parameter compartment forecast "
            "scenario estimate stochastic trajectory calibration projection".split(),
            "travel": "travel airport flight border passenger quarantine screening "
            "traveler transit itinerary departure arrival".split(),
            "hospital": "hospital ward nurse nosocomial staff healthcare admission "
            "bed intensive physician occupancy discharge".split(),
        },
    ),
    "molecular": (
        "genome protein replication sequence viral structure molecule "
        "coronavirus host expression assay".split(),
        {
            "receptor": "spike receptor binding ace2 domain entry membrane fusion "
            "glycoprotein cleavage furin affinity".split(),
            "polymerase": "polymerase replicase nucleotide inhibitor enzyme primer "
            "helicase exonuclease proofreading template catalytic".split(),
            "phylogeny": "phylogenetic lineage evolution mutation strain recombination "
            "bat ancestor divergence clade reservoir".split(),
        },
    ),
    "clinical": (
        "patient symptom treatment clinical disease severe therapy outcome "
        "mortality diagnosis comorbidity fever".split(),
        {
            "imaging": "lung pneumonia chest imaging respiratory ventilation oxygen "
            "radiograph opacity tomography airway saturation".split(),
            "drugs": "drug antiviral remdesivir chloroquine compound dosage "
            "pharmacokinetic lopinavir ribavirin interferon prescription".split(),
            "pediatric": "children pregnancy infant maternal pediatric newborn "
            "neonatal mother birth placenta adolescent".split(),
        },
    ),
}

GENERAL = (
    "study result method analysis data report finding approach observed "
    "significant increase evidence review sample factor higher important "
    "related potential associated".split()
)
# General words left without a vector.
UNEMBEDDED = {"approach", "evidence", "important"}

STOPWORDS = "the of and in with was were a to for on by is are this that from as".split()
SOURCES = ["PMC", "bioRxiv", "medRxiv", "WHO"]

stem = SnowballStemmer("english").stem


def stems_of(words):
    out = []
    for w in words:
        s = w
        while True:
            t = stem(s).strip("-")
            if t == s:
                break
            s = t
        out.append(s)
    return out


def check_disjoint():
    seen = {}
    groups = [("general", GENERAL)]
    for theme, (shared, subs) in THEMES.items():
        groups.append((theme, shared))
        groups.extend((f"{theme}/{s}", w) for s, w in subs.items())
    for name, words in groups:
        for w, s in zip(words, stems_of(words)):
            if s in seen and seen[s] != name:
                raise SystemExit(f"stem {s!r} of {w!r} in both {seen[s]} and {name}")
            seen[s] = name
    return groups


def sentence(rng, sub, shared, n):
    words = []
    for _ in range(n):
        r = rng.random()
        pool = sub if r < 0.5 else shared if r < 0.8 else GENERAL
        words.append(rng.choice(pool))
        if rng.random() < 0.4:
            words.append(rng.choice(STOPWORDS))
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def paragraph(rng, sub, shared, sentences):
    parts = [sentence(rng, sub, shared, rng.randint(6, 12)) for _ in range(sentences)]
    if rng.random() < 0.3:
        parts.append(f"As reported by {rng.choice(['Chen', 'Smith', 'Garcia'])} et al. in {rng.randint(2003, 2020)}.")
    return " ".join(parts)


def main():
    rng = random.Random(SEED)
    groups = check_disjoint()
    records = []
    n = 0
    for theme, (shared, subs) in THEMES.items():
        for sub_name, sub in subs.items():
            for _ in range(DOCS_PER_SUB):
                title = " ".join(rng.choice(sub + shared) for _ in range(rng.randint(4, 7))).title()
                body = paragraph(rng, sub, shared, 8)
                if rng.random() < 0.2:
                    body += " Copyright 2020 the authors."
                records.append(
                    {
                        "id": f"doc-{n:04d}",
                        "title": title,
                        "abstract": paragraph(rng, sub, shared, 3),
                        "body": body,
                        "source": rng.choice(SOURCES),
                        "language": "en",
                        "_label": f"{theme}/{sub_name}",
                    }
                )
                n += 1
    rng.shuffle(records)
    labels = {r["id"]: r.pop("_label") for r in records}

    # Records the ingestion filter must drop.
    for i in range(6):
        records.append(
            {"id": f"fr-{i}", "title": "Étude virale", "abstract": "Le virus et la maladie.",
             "body": "Résultats de l'étude clinique.", "source": "PMC", "language": "fr"}
        )
    for i in range(5):
        records.append({"id": f"nobody-{i}", "title": "Abstract only", "abstract": "A viral genome study.",
                        "body": "", "source": "bioRxiv", "language": "en"})
    for i in range(3):
        records.append({"id": f"noabstract-{i}", "title": "Body only", "abstract": "",
                        "body": "Spike receptor binding was observed.", "source": "medRxiv", "language": "en"})

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "mini_corpus.jsonl", "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(OUT / "mini_corpus_labels.json", "w") as f:
        json.dump(dict(sorted(labels.items())), f, indent=1)
        f.write("\n")

    vrng = random.Random(SEED + 1)
    gauss = lambda scale: [vrng.gauss(0.0, scale) for _ in range(DIM)]
    vectors = {}
    theme_center = {t: gauss(1.0) for t in THEMES}
    for name, words in groups:
        if name == "general":
            center = [0.0] * DIM
        elif "/" in name:
            theme = name.split("/")[0]
            center = [a + 0.6 * b for a, b in zip(theme_center[theme], gauss(1.0))]
        else:
            center = theme_center[name]
        for w, s in zip(words, stems_of(words)):
            if w in UNEMBEDDED or s in vectors:
                continue
            vectors[s] = [c + x for c, x in zip(center, gauss(0.25))]
    with open(OUT / "mini_embeddings.txt", "w") as f:
        f.write(f"{len(vectors)} {DIM}\n")
        for s in sorted(vectors):
            f.write(s + " " + " ".join(f"{x:.6f}" for x in vectors[s]) + "\n")
    print(f"{len(records)} records, {len(vectors)} vectors")


if __name__ == "__main__":
    main()

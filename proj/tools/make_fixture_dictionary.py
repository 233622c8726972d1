#!/usr/bin/env python3
# Copyright 2026 The kgner Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the 1,000-row UMLS-style test dictionary (name<TAB>category).

The first rows are curated neighbours of the fixture corpus mentions; the
rest is seeded filler so that sampling has something to drop.
"""

import argparse
import random

CURATED = [
    ("BRCA1 gene", "Gene or Genome"),
    ("Brca1", "Gene or Genome"),
    ("BRCA1 protein", "Amino Acid, Peptide, or Protein"),
    ("Breast Carcinoma", "Neoplastic Process"),
    ("mice", "Mammal"),
    ("Mice, House", "Mammal"),
    ("mouse", "Mammal"),
    ("proteins", "Amino Acid, Peptide, or Protein"),
    ("Protein", "Amino Acid, Peptide, or Protein"),
    ("protein aggregation", "Molecular Function"),
    ("T-antigen", "Amino Acid, Peptide, or Protein"),
    ("SV40 T antigen", "Amino Acid, Peptide, or Protein"),
    ("antigen", "Immunologic Factor"),
    ("p53", "Amino Acid, Peptide, or Protein"),
    ("TP53 gene", "Gene or Genome"),
    ("p53 pathway", "Molecular Function"),
    ("ethanol", "Organic Chemical"),
    ("Ethanol", "Pharmacologic Substance"),
    ("glucose", "Organic Chemical"),
    ("Glucose", "Carbohydrate"),
    ("Mcm4", "Gene or Genome"),
    ("Mcm6", "Gene or Genome"),
    ("Mcm7", "Gene or Genome"),
    ("Mcm4/6/7 complex", "Genetic Function"),
    ("MCM helicase", "Enzyme"),
    ("ATP", "Nucleic Acid, Nucleoside, or Nucleotide"),
    ("Adenosine Triphosphate", "Nucleic Acid, Nucleoside, or Nucleotide"),
    ("ATPase", "Enzyme"),
    ("Mcoln1", "Gene or Genome"),
    ("MCOLN1 gene", "Gene or Genome"),
    ("mucolipin 1", "Amino Acid, Peptide, or Protein"),
    ("zebrafish", "Fish"),
    ("Danio rerio", "Fish"),
    ("huntingtin", "Amino Acid, Peptide, or Protein"),
    ("Huntington Disease", "Disease or Syndrome"),
    ("HTT gene", "Gene or Genome"),
    ("Thymine", "Nucleic Acid, Nucleoside, or Nucleotide"),
    ("Adenine", "Nucleic Acid, Nucleoside, or Nucleotide"),
    ("thymine-adenine", "Nucleic Acid, Nucleoside, or Nucleotide"),
    ("Escherichia coli", "Bacterium"),
    ("E. coli", "Bacterium"),
    ("Escherichia", "Bacterium"),
    ("ampicillin", "Antibiotic"),
    ("Ampicillin", "Pharmacologic Substance"),
    ("beta catenin", "Amino Acid, Peptide, or Protein"),
    ("β-catenin", "Amino Acid, Peptide, or Protein"),
    ("CTNNB1 gene", "Gene or Genome"),
    ("in", "Intellectual Product"),
    ("IN", "Spatial Concept"),
    ("In", "Qualitative Concept"),
    ("inch", "Quantitative Concept"),
    ("in vitro", "Functional Concept"),
    ("in vivo", "Functional Concept"),
    ("Inositol", "Organic Chemical"),
    ("Indium", "Element, Ion, or Isotope"),
    ("hours", "Temporal Concept"),
    ("eye", "Body Part, Organ, or Organ Component"),
    ("neurons", "Cell"),
    ("fibroblasts", "Cell"),
    ("heterochromatin", "Cell Component"),
]

CATEGORIES = [
    "Gene or Genome",
    "Amino Acid, Peptide, or Protein",
    "Enzyme",
    "Mammal",
    "Fish",
    "Bacterium",
    "Virus",
    "Organic Chemical",
    "Pharmacologic Substance",
    "Nucleic Acid, Nucleoside, or Nucleotide",
    "Disease or Syndrome",
    "Intellectual Product",
    "Qualitative Concept",
    "Spatial Concept",
    "Cell",
    "Body Part, Organ, or Organ Component",
]

PREFIXES = ["Abc", "Cyp", "Fox", "Hox", "Ker", "Lam", "Myo", "Nek", "Pax", "Rab",
            "Sox", "Tbx", "Ubi", "Wnt", "Zfp", "Gly", "Met", "Oxo", "Pyr", "Thi"]
SUFFIXES = ["ase", "ir", "ol", "ide", "ate", "one", "ine", "a", "us", "ene"]


def filler(rng, taken):
    while True:
        name = rng.choice(PREFIXES) + rng.choice(SUFFIXES)
        if rng.random() < 0.6:
            name += str(rng.randrange(1, 40))
        if rng.random() < 0.2:
            name += " " + rng.choice(["receptor", "complex", "family", "precursor", "analog"])
        category = rng.choice(CATEGORIES)
        if (name, category) not in taken:
            return name, category


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20240611)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    rows = list(CURATED)
    taken = set(rows)
    while len(rows) < args.rows:
        row = filler(rng, taken)
        taken.add(row)
        rows.append(row)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for name, category in rows:
            f.write(f"{name}\t{category}\n")


if __name__ == "__main__":
    main()

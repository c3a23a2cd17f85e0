"""Abbreviation-aware sentence segmentation.

Naive splitting on ". " breaks abbreviated taxon names such as
"Lb. oligofermentans" apart; the guard keeps them whole.

Run from the repository root:  python demos/02_segmentation.py
"""

from bactrex.segment import segment

passages = [
    "A grows. B shrinks.",
    "Lb. oligofermentans inhibited Lc. piscium in co-culture.",
    "See Fig. 2 for zones of inhibition. E. coli str. K-12 was the indicator.",
    "Several species, e.g. Lactobacillus reuteri, produce reuterin.",
]

for passage in passages:
    boundaries = segment(passage)
    print(f"{passage!r}")
    for i, boundary in enumerate(boundaries):
        print(f"   s{i}: {boundary.span.slice(passage)!r}")
    print()

"""Parse a standoff-annotated sentence, inspect it, and write it back.

Run from the repository root:  python demos/01_corpus_roundtrip.py
"""

from bactrex.corpus import parse_brat, write_brat

text = "Lactobacillus inhibits E. coli."
ann = (
    "T1\tBacteria 0 13\tLactobacillus\n"
    "T2\tBacteria 23 30\tE. coli\n"
    "R1\tinteracts Arg1:T1 Arg2:T2\n"
)

doc = parse_brat(text, ann, doc_id="demo")
print(f"text: {doc.text}")
for ent in doc.entities:
    print(f"  {ent.id}: {ent.label} [{ent.span.start}, {ent.span.end}) = {ent.surface!r}")
for rel in doc.relations:
    print(f"  {rel.id}: {rel.arg1} {rel.label} {rel.arg2}")

# Writing re-numbers ids in order of appearance; parsing the result gives
# the same document back.
round_text, round_ann = write_brat(doc)
assert (round_text, round_ann) == (text, ann)
print("\nround trip is exact:")
print(round_ann)

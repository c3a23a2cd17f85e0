"""Turn one annotated sentence into binary-classification instances.

Every unordered pair of unique entities becomes one instance with the
pair's mentions replaced by @BAC1$/@BAC2$ markers and a 0/1 label from
the gold relations.

Run from the repository root:  python demos/03_pair_transform.py
"""

from bactrex.corpus import parse_brat, AnnotatedSentence
from bactrex.transform import enumerate_pairs, tag_instance

text = "Bacillus subtilis inhibited Listeria monocytogenes but not Enterococcus faecalis."
ann = (
    "T1\tBacteria 0 17\tBacillus subtilis\n"
    "T2\tBacteria 28 50\tListeria monocytogenes\n"
    "T3\tBacteria 59 80\tEnterococcus faecalis\n"
    "R1\tinteracts Arg1:T1 Arg2:T2\n"
)
doc = parse_brat(text, ann)
sentence = AnnotatedSentence(doc.text, doc.entities, doc.relations, provenance="demo")

pairs = enumerate_pairs(sentence)
print(f"{len(sentence.entities)} unique entities -> {len(pairs)} pairs\n")
for pair in pairs:
    instance = tag_instance(sentence, pair)
    print(f"({pair.entity_a}, {pair.entity_b})  label={instance.label}")
    print(f"  {instance.tagged_text}")

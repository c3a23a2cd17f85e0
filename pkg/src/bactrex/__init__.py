"""Toolkit for mining pairwise bacterial interactions from biomedical text.

The package covers the full path from annotated corpora to validated
interaction predictions:

* ``corpus`` -- data model for span-annotated text plus standoff-format I/O
* ``segment`` -- abbreviation-aware sentence segmentation and annotation
  projection
* ``transform`` -- entity-pair enumeration and marker tagging that turns
  relation extraction into binary classification
* ``harmonize`` -- ingestion of external relation-extraction corpora into
  the common sentence-level schema
* ``ner`` -- gazetteer and remote bacterial named-entity taggers
* ``classify`` -- lexical baseline scorer and remote scoring client
* ``pipeline`` -- the end-to-end extractor with gold-component ablations
* ``evaluate`` -- splits, precision/recall/F1 and multi-run aggregation
* ``casestudy`` -- literature validation of association networks
* ``cli`` -- command-line front end wiring everything together
"""

__version__ = "0.1.0"

from bactrex.errors import BactrexError

__all__ = ["BactrexError", "__version__"]

"""Shipped documentation fixtures.

The personality label-resolution fixture reproduces the published
self-report vs. majority-vote disagreement structure (58/89/26/66, 124
agreements out of 250) without redistributing any source data: texts are
placeholders, only the label pattern matters.
"""

from __future__ import annotations

import numpy as np

from .corpus import AnnotatedDocument, AnnotatorRecord

# (self_report, majority, count); labels: 0 = introvert, 1 = extrovert
LABEL_RESOLUTION_CELLS = [
    (0, 0, 58),
    (0, 1, 89),
    (1, 0, 26),
    (1, 1, 66),
]


def label_resolution_fixture() -> list[AnnotatedDocument]:
    """250 documents whose annotator votes realize the published confusion cells."""
    docs = []
    k = 0
    for self_report, majority, count in LABEL_RESOLUTION_CELLS:
        for _ in range(count):
            # 2-1 split so the majority is well defined but not unanimous
            labels = [majority, majority, 1 - majority]
            words = [f"placeholder{k}", "text", "for", "label", "fixture"]
            mask = np.array([1, 0, 0, 0, 0], dtype=np.int64)
            annotations = [
                AnnotatorRecord(annotator_id=f"worker{t}", highlights=mask.copy(), label=lab)
                for t, lab in enumerate(labels)
            ]
            docs.append(
                AnnotatedDocument(
                    id=f"fix{k:03d}",
                    text=" ".join(words),
                    words=words,
                    annotations=annotations,
                    self_report_label=self_report,
                )
            )
            k += 1
    return docs

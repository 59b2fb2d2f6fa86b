"""Annotation collection service.

Serves one document at a time to human annotators, validates submissions
(highlight density and label), and appends accepted records to a JSON-lines
store whose lines are ordinary dataset records, so the corpus loader reads
them back unchanged.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .corpus import AnnotatedDocument, SPARSE_THRESHOLD, load_dataset

DEFAULT_TARGET_ANNOTATORS = 3


class Submission(BaseModel):
    doc_id: str
    annotator_id: str = Field(min_length=1)
    highlighted_word_indices: list[int]
    label: int


class AnnotationStore:
    """Append-only JSON-lines store; appends are serialized by a lock."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)

    def load_completed(self) -> dict[str, set[str]]:
        done: dict[str, set[str]] = {}
        if not self.path.exists():
            return done
        with open(self.path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                record = json.loads(line)
                for ann in record.get("annotations", []):
                    done.setdefault(record["id"], set()).add(ann["annotator_id"])
        return done


def create_app(
    docs: list[AnnotatedDocument],
    store: AnnotationStore,
    min_highlight_frac: float = SPARSE_THRESHOLD,
    target_annotators: int = DEFAULT_TARGET_ANNOTATORS,
) -> FastAPI:
    app = FastAPI(title="annotation service")
    by_id = {doc.id: doc for doc in docs}
    completed: dict[str, set[str]] = {doc.id: set() for doc in docs}
    for doc in docs:
        for rec in doc.annotations:
            completed[doc.id].add(rec.annotator_id)
    for doc_id, annotators in store.load_completed().items():
        if doc_id in completed:
            completed[doc_id] |= annotators
    state_lock = threading.Lock()

    @app.get("/tasks/next")
    def next_task(annotator: str = Query(min_length=1)):
        with state_lock:
            open_docs = [
                doc_id
                for doc_id, annotators in completed.items()
                if len(annotators) < target_annotators and annotator not in annotators
            ]
            if not open_docs:
                raise HTTPException(status_code=404, detail="no tasks remaining for this annotator")
            # least-annotated first; doc id breaks ties so assignment is stable
            doc_id = min(open_docs, key=lambda d: (len(completed[d]), d))
            doc = by_id[doc_id]
            return {
                "doc_id": doc.id,
                "text": doc.text,
                "words": doc.words,
                "completed_annotators": sorted(completed[doc_id]),
            }

    @app.post("/annotations", status_code=201)
    def submit(sub: Submission):
        doc = by_id.get(sub.doc_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown document {sub.doc_id!r}")
        if sub.label not in (0, 1):
            raise HTTPException(status_code=422, detail="label must be 0 or 1")
        n = len(doc.words)
        indices = set(sub.highlighted_word_indices)
        bad = [i for i in indices if not 0 <= i < n]
        if bad:
            raise HTTPException(status_code=422, detail=f"highlight indices out of range: {sorted(bad)}")
        frac = len(indices) / n if n else 0.0
        if frac < min_highlight_frac:
            raise HTTPException(
                status_code=422,
                detail=f"highlighted fraction {frac:.4f} below minimum {min_highlight_frac}",
            )
        with state_lock:
            if sub.annotator_id in completed[doc.id]:
                raise HTTPException(
                    status_code=409,
                    detail=f"annotator {sub.annotator_id!r} already annotated {doc.id!r}",
                )
            completed[doc.id].add(sub.annotator_id)
        store.append(
            {
                "id": doc.id,
                "text": doc.text,
                "annotations": [
                    {
                        "annotator_id": sub.annotator_id,
                        "highlighted_word_indices": sorted(indices),
                        "label": sub.label,
                    }
                ],
            }
        )
        return {"doc_id": doc.id, "annotator_id": sub.annotator_id, "accepted": True}

    @app.get("/progress")
    def progress():
        with state_lock:
            counts = {doc_id: len(annotators) for doc_id, annotators in completed.items()}
        return {
            "total_docs": len(by_id),
            "fully_annotated": sum(1 for c in counts.values() if c >= target_annotators),
            "annotations": sum(counts.values()),
            "target_annotators": target_annotators,
        }

    return app


def serve(
    data_path: str | Path,
    store_path: str | Path,
    port: int = 8000,
    min_highlight_frac: float = SPARSE_THRESHOLD,
    target_annotators: int = DEFAULT_TARGET_ANNOTATORS,
) -> None:
    import uvicorn

    docs = load_dataset(data_path)
    app = create_app(
        docs,
        AnnotationStore(store_path),
        min_highlight_frac=min_highlight_frac,
        target_annotators=target_annotators,
    )
    uvicorn.run(app, host="0.0.0.0", port=port)

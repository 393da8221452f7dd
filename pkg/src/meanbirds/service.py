"""HTTP annotation service: worker registration, batch assignment with a
hidden control case, label collection, live statistics, ground-truth export.

State is an append-only JSONL event log replayed into memory at startup;
all writes go through one lock, so label insertion is atomic per
(worker, batch) and no real batch can ever exceed the 5-label panel.
Assignment selection is reservation-aware (open assignments count toward
the cap), which lets every batch finish at exactly 5 distinct workers.
"""

import json
import threading
import time
from dataclasses import dataclass, field
from importlib import resources

from .groundtruth import (
    LABELS,
    AnnotationRecord,
    WorkerProfile,
    export_ground_truth,
    fleiss_kappa,
    plurality,
    records_to_matrix,
)

PANEL_SIZE = 5
REAL_PER_ASSIGNMENT = 9
ASSIGNMENT_TTL = 3600  # seconds until an abandoned assignment returns to the pool

DEMOGRAPHIC_FIELDS = ("gender", "age_band", "nationality", "education", "income_band")


def behavior_definitions():
    return resources.files("meanbirds.data").joinpath("definitions.txt").read_text(
        encoding="utf-8"
    )


class ServiceError(Exception):
    def __init__(self, reason, status=400):
        super().__init__(reason)
        self.reason = reason
        self.status = status


@dataclass
class Assignment:
    worker_id: str
    batch_ids: list
    control_id: str
    issued_at: int
    submitted: set = field(default_factory=set)

    @property
    def open_ids(self):
        return [b for b in self.batch_ids if b not in self.submitted]


class AnnotationStore:
    """Event-sourced annotation state with a single-writer lock."""

    def __init__(self, batches, gold_labels, log_path=None, seed=0,
                 accounts=None, ttl=ASSIGNMENT_TTL, now_fn=None):
        self.gold = dict(gold_labels)
        self.controls = {b.batch_id: b for b in batches if b.batch_id in self.gold}
        self.batches = {
            b.batch_id: b for b in batches if b.batch_id not in self.gold
        }
        self.accounts = accounts or {}
        self.seed = seed
        self.ttl = ttl
        self.now = now_fn or (lambda: int(time.time()))
        self.log_path = log_path
        self._lock = threading.Lock()

        self.workers = {}
        self.tokens = {}
        self.records = {}          # (worker_id, batch_id) -> AnnotationRecord, real only
        self.labels_per_batch = {b: 0 for b in self.batches}
        self.reserved = {b: 0 for b in self.batches}
        self.open_assignments = {}
        self.seen = {}
        self._log_fh = None
        if log_path:
            self._replay(log_path)
            self._log_fh = open(log_path, "a", encoding="utf-8")

    # -- persistence --------------------------------------------------------

    def _append(self, event):
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._log_fh.flush()

    def _replay(self, path):
        try:
            fh = open(path, encoding="utf-8")
        except FileNotFoundError:
            return
        with fh:
            for line in fh:
                if line.strip():
                    self._apply(json.loads(line))

    def close(self):
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    # -- event application (shared by live calls and replay) ----------------

    def _apply(self, ev):
        kind = ev["type"]
        if kind == "worker":
            profile = WorkerProfile(
                worker_id=ev["worker_id"],
                **{k: ev.get(k, "unknown") for k in DEMOGRAPHIC_FIELDS},
            )
            self.workers[ev["worker_id"]] = profile
            self.tokens[ev["token"]] = ev["worker_id"]
            self.seen.setdefault(ev["worker_id"], set())
        elif kind == "assignment":
            a = Assignment(
                worker_id=ev["worker_id"],
                batch_ids=list(ev["batch_ids"]),
                control_id=ev["control_id"],
                issued_at=ev["issued_at"],
            )
            self.open_assignments[ev["worker_id"]] = a
            self.seen.setdefault(ev["worker_id"], set()).update(a.batch_ids)
            for b in a.batch_ids:
                if b in self.reserved:
                    self.reserved[b] += 1
        elif kind == "label":
            wid, bid = ev["worker_id"], ev["batch_id"]
            a = self.open_assignments.get(wid)
            if ev["control"]:
                w = self.workers[wid]
                w.control_seen += 1
                if ev["correct"]:
                    w.control_correct += 1
            else:
                self.records[(wid, bid)] = AnnotationRecord(
                    worker_id=wid,
                    batch_id=bid,
                    label=ev["label"],
                    submitted_at=ev["submitted_at"],
                )
                self.labels_per_batch[bid] += 1
                if bid in self.reserved and self.reserved[bid] > 0:
                    self.reserved[bid] -= 1
            if a is not None:
                a.submitted.add(bid)
                if len(a.submitted) == len(a.batch_ids):
                    del self.open_assignments[wid]
        elif kind == "expire":
            a = self.open_assignments.pop(ev["worker_id"], None)
            if a is not None:
                for b in a.open_ids:
                    if b in self.reserved and self.reserved[b] > 0:
                        self.reserved[b] -= 1

    # -- operations ----------------------------------------------------------

    def register_worker(self, demographics, token):
        with self._lock:
            if token in self.tokens:
                raise ServiceError("registration token already used", status=409)
            worker_id = f"w{len(self.workers):05d}"
            ev = {
                "type": "worker",
                "worker_id": worker_id,
                "token": token,
                **{k: str(demographics.get(k, "unknown")) for k in DEMOGRAPHIC_FIELDS},
            }
            self._apply(ev)
            self._append(ev)
            return worker_id

    def _expire_stale(self):
        now = self.now()
        stale = [
            wid
            for wid, a in self.open_assignments.items()
            if now - a.issued_at > self.ttl
        ]
        for wid in stale:
            ev = {"type": "expire", "worker_id": wid, "at": now}
            self._apply(ev)
            self._append(ev)

    def next_assignment(self, worker_id):
        """Existing open assignment, or a fresh one: up to 9 least-labeled
        real batches plus one control, order shuffled per (seed, worker)."""
        import random

        with self._lock:
            if worker_id not in self.workers:
                raise ServiceError("unknown worker", status=404)
            self._expire_stale()
            existing = self.open_assignments.get(worker_id)
            if existing is not None:
                return existing
            seen = self.seen.setdefault(worker_id, set())
            candidates = [
                (self.labels_per_batch[b] + self.reserved[b], b)
                for b in self.batches
                if b not in seen
                and self.labels_per_batch[b] + self.reserved[b] < PANEL_SIZE
            ]
            candidates.sort()
            chosen = [b for _, b in candidates[:REAL_PER_ASSIGNMENT]]
            if not chosen:
                return None
            rng = random.Random(f"{self.seed}:{worker_id}")
            controls = sorted(c for c in self.controls if c not in seen)
            if not controls:
                return None
            control_id = rng.choice(controls)
            ids = chosen + [control_id]
            rng.shuffle(ids)
            ev = {
                "type": "assignment",
                "worker_id": worker_id,
                "batch_ids": ids,
                "control_id": control_id,
                "issued_at": self.now(),
            }
            self._apply(ev)
            self._append(ev)
            return self.open_assignments[worker_id]

    def submit_label(self, worker_id, batch_id, label):
        with self._lock:
            if worker_id not in self.workers:
                raise ServiceError("unknown worker", status=404)
            if label not in LABELS:
                raise ServiceError(f"label must be one of {LABELS}")
            a = self.open_assignments.get(worker_id)
            if a is None or batch_id not in a.batch_ids:
                raise ServiceError("batch is not in this worker's open assignment")
            if batch_id in a.submitted:
                raise ServiceError("duplicate submission for this batch", status=409)
            is_control = batch_id == a.control_id
            if not is_control and self.labels_per_batch[batch_id] >= PANEL_SIZE:
                # cannot happen with reservation-aware selection, kept as a hard cap
                raise ServiceError("batch already has a full panel", status=409)
            ev = {
                "type": "label",
                "worker_id": worker_id,
                "batch_id": batch_id,
                "label": label,
                "control": is_control,
                "correct": (label == self.gold[batch_id]) if is_control else None,
                "submitted_at": self.now(),
            }
            self._apply(ev)
            self._append(ev)
            return {
                "ok": True,
                "control": is_control,
                "progress": len(a.submitted),
                "total": len(a.batch_ids),
            }

    def batch_payload(self, batch_id):
        b = self.batches.get(batch_id) or self.controls.get(batch_id)
        if b is None:
            raise ServiceError("unknown batch", status=404)
        acct = self.accounts.get(b.user_id)
        return {
            "batch_id": b.batch_id,
            "profile_description": acct.profile_description if acct else "",
            "tweets": [
                {"text": t.text, "created_at": t.created_at, "is_retweet": t.is_retweet}
                for t in b.tweets
            ],
        }

    def stats(self):
        with self._lock:
            records = list(self.records.values())
            _, matrix = records_to_matrix(records)
            agreement = fleiss_kappa(matrix) if matrix and sum(matrix[0]) >= 2 else None
            per_batch = {}
            for r in records:
                per_batch.setdefault(r.batch_id, []).append(r.label)
            complete = {
                b: labs for b, labs in per_batch.items() if len(labs) >= PANEL_SIZE
            }
            dist = {}
            for labs in complete.values():
                final = plurality(labs)
                dist[final] = dist.get(final, 0) + 1
            seen = sum(w.control_seen for w in self.workers.values())
            correct = sum(w.control_correct for w in self.workers.values())
            return {
                "workers": len(self.workers),
                "agreement": agreement,
                "label_distribution": dist,
                "control_accuracy": (correct / seen) if seen else None,
                "completed_batches": len(complete),
                "total_batches": len(self.batches),
                "completion": len(complete) / len(self.batches) if self.batches else 0.0,
            }

    def export(self):
        with self._lock:
            records = list(self.records.values())
        mapping = {b.batch_id: b.user_id for b in self.batches.values()}
        return export_ground_truth(records, mapping)

    def worker_profiles(self):
        with self._lock:
            return sorted(self.workers.values(), key=lambda w: w.worker_id)


# ---------------------------------------------------------------------------
# FastAPI layer
# ---------------------------------------------------------------------------

def create_app(store):
    from fastapi import FastAPI, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse

    app = FastAPI(title="meanbirds annotation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    definitions = behavior_definitions()

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"error": exc.reason})

    @app.post("/workers")
    async def register(payload: dict):
        token = str(payload.get("token", "")).strip()
        if not token:
            raise ServiceError("registration token required")
        worker_id = store.register_worker(payload, token)
        return {"worker_id": worker_id}

    @app.get("/workers/{worker_id}/assignment")
    async def assignment(worker_id: str):
        a = store.next_assignment(worker_id)
        if a is None:
            return {"complete": True, "batch_ids": [], "batches": []}
        return {
            "complete": False,
            "batch_ids": a.batch_ids,
            "open_batch_ids": a.open_ids,
            "batches": [store.batch_payload(b) for b in a.batch_ids],
            "definitions": definitions,
            "labels": list(LABELS),
        }

    @app.post("/labels")
    async def submit(payload: dict):
        return store.submit_label(
            str(payload.get("worker_id", "")),
            str(payload.get("batch_id", "")),
            str(payload.get("label", "")),
        )

    @app.get("/stats")
    async def stats():
        return store.stats()

    @app.get("/export/workers")
    async def export_workers():
        import dataclasses

        return {"workers": [dataclasses.asdict(w) for w in store.worker_profiles()]}

    @app.get("/export/groundtruth")
    async def export():
        result = store.export()
        return {
            "users": [
                {"user_id": uid, "final_label": lab}
                for uid, lab in sorted(result.user_labels.items())
            ],
            "distribution": result.distribution,
            "unresolved_batches": result.unresolved_batches,
            "excluded_users": result.excluded_users,
        }

    return app


def serve(store, host="127.0.0.1", port=8000):
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="info")

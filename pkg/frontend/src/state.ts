// Session state machine: demographics -> labeling(1..N) -> done.
// Transitions are explicit and guarded so no path can skip the labeling
// phase or resubmit a finished batch.

export type Phase = "demographics" | "labeling" | "done";

export class IllegalTransition extends Error {}

export class Session {
  phase: Phase = "demographics";
  workerId: string | null = null;
  batchIds: string[] = [];
  submitted = new Set<string>();
  cursor = 0;

  beginLabeling(workerId: string, batchIds: string[]): void {
    if (this.phase !== "demographics") {
      throw new IllegalTransition(`cannot start labeling from ${this.phase}`);
    }
    if (batchIds.length === 0) {
      throw new IllegalTransition("assignment is empty");
    }
    this.workerId = workerId;
    this.batchIds = [...batchIds];
    this.phase = "labeling";
    this.cursor = 0;
  }

  get currentBatchId(): string | null {
    if (this.phase !== "labeling") return null;
    return this.batchIds[this.cursor] ?? null;
  }

  isSubmitted(batchId: string): boolean {
    return this.submitted.has(batchId);
  }

  markSubmitted(batchId: string): void {
    if (this.phase !== "labeling") {
      throw new IllegalTransition(`cannot submit from ${this.phase}`);
    }
    if (!this.batchIds.includes(batchId)) {
      throw new IllegalTransition(`batch ${batchId} is not part of the assignment`);
    }
    if (this.submitted.has(batchId)) {
      throw new IllegalTransition(`batch ${batchId} was already submitted`);
    }
    this.submitted.add(batchId);
    if (this.submitted.size === this.batchIds.length) {
      this.phase = "done";
      return;
    }
    // jump to the next unfinished batch (wrapping), keeping order stable
    for (let step = 1; step <= this.batchIds.length; step += 1) {
      const idx = (this.cursor + step) % this.batchIds.length;
      if (!this.submitted.has(this.batchIds[idx])) {
        this.cursor = idx;
        return;
      }
    }
  }

  goTo(index: number): void {
    if (this.phase !== "labeling") {
      throw new IllegalTransition(`cannot navigate from ${this.phase}`);
    }
    if (index < 0 || index >= this.batchIds.length) {
      throw new IllegalTransition(`no batch at position ${index}`);
    }
    this.cursor = index;
  }

  get progress(): { done: number; total: number } {
    return { done: this.submitted.size, total: this.batchIds.length };
  }
}

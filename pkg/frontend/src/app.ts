// Application controller: wires the API client, the session state machine,
// and the renderers. All authoritative state lives on the server; the app
// only retries idempotent GETs.

import { AnnotationApi, ApiError, AssignmentResponse, Demographics, Label, LABELS } from "./api.js";
import { Session } from "./state.js";
import { renderBatchView, renderDemographicsForm, renderDone, renderRetry } from "./ui.js";

export class App {
  session = new Session();
  assignment: AssignmentResponse | null = null;
  selected: string | null = null;
  inlineError: string | undefined;

  constructor(
    private root: HTMLElement,
    private api: AnnotationApi,
    private statsUrl = "/stats",
  ) {}

  start(): void {
    this.renderCurrent();
  }

  private renderCurrent(formError?: string): void {
    if (this.session.phase === "demographics") {
      renderDemographicsForm(
        this.root,
        { onSubmit: (d) => void this.register(d) },
        formError,
      );
      return;
    }
    if (this.session.phase === "done") {
      renderDone(this.root, this.statsUrl);
      return;
    }
    this.renderBatch();
  }

  private renderBatch(): void {
    const batchId = this.session.currentBatchId;
    if (!this.assignment || batchId === null) return;
    const batch = this.assignment.batches.find((b) => b.batch_id === batchId);
    if (!batch) return;
    renderBatchView(
      this.root,
      {
        batch,
        definitions: this.assignment.definitions ?? "",
        position: this.session.cursor,
        total: this.session.batchIds.length,
        progressDone: this.session.progress.done,
        selected: this.selected,
        submitted: this.session.isSubmitted(batchId),
        error: this.inlineError,
      },
      {
        onSelect: (label) => {
          if (this.session.isSubmitted(batchId)) return;
          this.selected = label;
          this.inlineError = undefined;
          this.renderBatch();
        },
        onSubmit: () => void this.submitCurrent(),
        onNavigate: (index) => {
          this.session.goTo(index);
          this.selected = null;
          this.inlineError = undefined;
          this.renderBatch();
        },
      },
    );
  }

  private async register(demographics: Demographics): Promise<void> {
    if (!demographics.token.trim()) {
      this.renderCurrent("A registration token is required.");
      return;
    }
    try {
      const { worker_id } = await this.api.registerWorker(demographics);
      const assignment = await this.api.fetchAssignment(worker_id);
      if (assignment.complete || assignment.batch_ids.length === 0) {
        this.session.beginLabeling(worker_id, ["__none__"]);
        this.session.markSubmitted("__none__");
        this.renderCurrent();
        return;
      }
      this.assignment = assignment;
      this.session.beginLabeling(worker_id, assignment.batch_ids);
      this.renderCurrent();
    } catch (err) {
      if (err instanceof ApiError) {
        this.renderCurrent(err.message);
        return;
      }
      renderRetry(this.root, String(err), () => void this.register(demographics));
    }
  }

  private async submitCurrent(): Promise<void> {
    const batchId = this.session.currentBatchId;
    if (!batchId || this.selected === null) return;
    if (this.session.isSubmitted(batchId)) return;
    if (!(LABELS as readonly string[]).includes(this.selected)) return;
    try {
      await this.api.submitLabel(
        this.session.workerId as string,
        batchId,
        this.selected as Label,
      );
      this.session.markSubmitted(batchId);
      this.selected = null;
      this.inlineError = undefined;
      this.renderCurrent();
    } catch (err) {
      this.inlineError = err instanceof ApiError ? err.message : String(err);
      this.renderBatch();
    }
  }
}

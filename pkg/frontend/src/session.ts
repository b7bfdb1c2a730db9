/**
 * Session runner: drives one participant session against the collection
 * service. All timing and rendering is delegated so the control flow can
 * be tested headlessly.
 *
 * Guarantees:
 * - questions are presented strictly in service order (single in-flight
 *   request, no reordering);
 * - at most one submission per question index, regardless of double
 *   clicks or racing timers;
 * - the fixation interval elapses between consecutive stimulus displays;
 * - on local deadline expiry nothing is posted; the next fetch lets the
 *   server record the question as unanswered.
 */

import {
  ApiClient,
  BreakPayload,
  Choice,
  DonePayload,
  Progress,
  QuestionPayload,
} from "./api.js";

export interface TrialOutcome {
  choice: Choice;
  rtMs: number;
}

export interface TrialView {
  /** Show the fixation marker for the given interval. */
  showFixation(ms: number): Promise<void>;
  /**
   * Render the question and resolve with the participant's choice, or
   * null when the local deadline expires without a click.
   */
  showQuestion(q: QuestionPayload): Promise<TrialOutcome | null>;
  /** Show the break card; resolve when the participant continues. */
  showBreak(b: BreakPayload): Promise<void>;
  showDone(d: DonePayload): void;
  onProgress?(p: Progress): void;
}

export class SessionRunner {
  private lastSubmittedIndex = -1;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly view: TrialView,
  ) {}

  async run(): Promise<DonePayload> {
    let firstTrial = true;
    for (;;) {
      const payload = await this.api.next(this.sessionId);
      if (payload.kind === "done") {
        this.view.showDone(payload);
        return payload;
      }
      if (payload.kind === "break") {
        await this.view.showBreak(payload);
        continue;
      }
      this.view.onProgress?.(payload.progress);
      if (!firstTrial) {
        await this.view.showFixation(payload.fixation_ms);
      }
      firstTrial = false;
      const outcome = await this.view.showQuestion(payload);
      if (outcome === null) {
        continue; // local timeout: post nothing, refetch
      }
      await this.submit(payload.triplet_index, outcome);
    }
  }

  private async submit(tripletIndex: number, outcome: TrialOutcome): Promise<void> {
    if (tripletIndex <= this.lastSubmittedIndex) {
      return; // duplicate resolution for an index we already posted
    }
    this.lastSubmittedIndex = tripletIndex;
    await this.api.answer(this.sessionId, tripletIndex, outcome.choice, outcome.rtMs);
  }
}

/**
 * DOM trial view: reference image on top, two options below, fixation
 * rectangle between trials, progress bar, and break/done cards.
 *
 * Mouse clicks and keyboard shortcuts (ArrowLeft -> opt1,
 * ArrowRight -> opt2) are recorded identically. A local countdown
 * matching the server deadline clears the question on expiry.
 */

import { BreakPayload, Choice, DonePayload, Progress, QuestionPayload } from "./api.js";
import { TrialOutcome, TrialView } from "./session.js";

/** Neutral mid-grey surround. */
const BACKGROUND = "#525252";

export interface DomViewOptions {
  now?: () => number;
  setTimeoutFn?: typeof setTimeout;
  clearTimeoutFn?: typeof clearTimeout;
  /** Pixel size of stimulus images (configuration, not a perceptual guarantee). */
  imageSizePx?: number;
}

export class DomTrialView implements TrialView {
  private readonly now: () => number;
  private readonly setTimeoutFn: typeof setTimeout;
  private readonly clearTimeoutFn: typeof clearTimeout;
  private readonly imageSizePx: number;
  private keyHandler: ((ev: KeyboardEvent) => void) | null = null;

  constructor(
    private readonly root: HTMLElement,
    options: DomViewOptions = {},
  ) {
    this.now = options.now ?? (() => performance.now());
    this.setTimeoutFn = options.setTimeoutFn ?? setTimeout.bind(globalThis);
    this.clearTimeoutFn = options.clearTimeoutFn ?? clearTimeout.bind(globalThis);
    this.imageSizePx = options.imageSizePx ?? 256;
    this.root.style.background = BACKGROUND;
  }

  private clear(): void {
    if (this.keyHandler) {
      this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
      this.keyHandler = null;
    }
    this.root.textContent = "";
  }

  private progressBar(p: Progress, phase: string): HTMLElement {
    const bar = this.root.ownerDocument.createElement("div");
    bar.className = "progress";
    const label = phase === "practice" ? "practice" : "progress";
    bar.textContent = `${label}: ${p.answered} / ${p.total}`;
    const fill = this.root.ownerDocument.createElement("div");
    fill.className = "progress-fill";
    fill.style.width = `${(100 * p.answered) / Math.max(p.total, 1)}%`;
    bar.appendChild(fill);
    return bar;
  }

  private stimulus(asset: string | null, index: number, cls: string): HTMLElement {
    const doc = this.root.ownerDocument;
    if (asset) {
      const img = doc.createElement("img");
      img.src = asset;
      img.width = this.imageSizePx;
      img.height = this.imageSizePx;
      img.className = cls;
      img.draggable = false;
      return img;
    }
    const box = doc.createElement("div");
    box.className = cls;
    box.textContent = `stimulus ${index}`;
    return box;
  }

  showFixation(ms: number): Promise<void> {
    this.clear();
    const marker = this.root.ownerDocument.createElement("div");
    marker.className = "fixation";
    marker.style.width = "20px";
    marker.style.height = "20px";
    marker.style.background = "#ffffff";
    marker.style.margin = "45vh auto";
    this.root.appendChild(marker);
    return new Promise((resolve) => this.setTimeoutFn(resolve, ms));
  }

  showQuestion(q: QuestionPayload): Promise<TrialOutcome | null> {
    this.clear();
    const doc = this.root.ownerDocument;
    const started = this.now();

    const container = doc.createElement("div");
    container.className = "trial";
    container.appendChild(this.progressBar(q.progress, q.phase));

    if (q.phase === "practice") {
      const tag = doc.createElement("div");
      tag.className = "practice-tag";
      tag.textContent = "practice";
      container.appendChild(tag);
    }

    const prompt = doc.createElement("p");
    prompt.className = "prompt";
    prompt.textContent = "Which of the bottom two images is more similar to the top image?";
    container.appendChild(prompt);

    const refRow = doc.createElement("div");
    refRow.className = "ref-row";
    refRow.appendChild(this.stimulus(q.ref_asset, q.ref, "stimulus ref"));
    container.appendChild(refRow);

    const optionRow = doc.createElement("div");
    optionRow.className = "option-row";
    const opt1 = this.stimulus(q.opt1_asset, q.opt1, "stimulus option opt1");
    const opt2 = this.stimulus(q.opt2_asset, q.opt2, "stimulus option opt2");
    optionRow.appendChild(opt1);
    optionRow.appendChild(opt2);
    container.appendChild(optionRow);
    this.root.appendChild(container);

    return new Promise((resolve) => {
      let settled = false;
      let timer: ReturnType<typeof setTimeout> | null = null;
      const finish = (outcome: TrialOutcome | null) => {
        if (settled) return; // exactly one resolution per question
        settled = true;
        if (timer !== null) this.clearTimeoutFn(timer);
        this.clear();
        resolve(outcome);
      };
      const pick = (choice: Choice) => finish({ choice, rtMs: this.now() - started });
      opt1.addEventListener("click", () => pick("opt1"));
      opt2.addEventListener("click", () => pick("opt2"));
      this.keyHandler = (ev: KeyboardEvent) => {
        if (ev.key === "ArrowLeft") pick("opt1");
        else if (ev.key === "ArrowRight") pick("opt2");
      };
      doc.addEventListener("keydown", this.keyHandler);
      timer = this.setTimeoutFn(() => finish(null), q.deadline_ms);
    });
  }

  showBreak(b: BreakPayload): Promise<void> {
    this.clear();
    const doc = this.root.ownerDocument;
    const card = doc.createElement("div");
    card.className = "break-card";
    const text = doc.createElement("p");
    text.textContent = `Time for a short break (${b.progress.answered} of ${b.progress.total} done). Continue when ready.`;
    card.appendChild(text);
    const button = doc.createElement("button");
    button.className = "continue";
    button.textContent = "Continue";
    card.appendChild(button);
    this.root.appendChild(card);
    return new Promise((resolve) => {
      button.addEventListener("click", () => {
        this.clear();
        resolve();
      });
    });
  }

  showDone(d: DonePayload): void {
    this.clear();
    const doc = this.root.ownerDocument;
    const card = doc.createElement("div");
    card.className = "done-card";
    card.textContent = `All done — ${d.progress.total} questions completed. Thank you!`;
    this.root.appendChild(card);
  }
}

/** Candidate labeling flow: fetch next unlabeled review, submit, advance.
 *
 * The controller never holds label truth: every submission round-trips to the
 * server and the next candidate is re-fetched, so a reload always lands on
 * identical state. A failed request surfaces in `lastError` and leaves the
 * current candidate in place for retry.
 */

import { ApiClient, ReviewInfo, SessionState } from "./api.js";

export type LabelValue = 0 | 1 | "skip";

export class LabelFlow {
  current: ReviewInfo | null = null;
  done = false;
  lastError: string | null = null;
  state: SessionState | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly annotator: string,
  ) {}

  /** Load session state and the first pending candidate. */
  async start(): Promise<void> {
    this.lastError = null;
    try {
      this.state = await this.api.getSession(this.sessionId);
      await this.advance();
    } catch (error) {
      this.lastError = String(error);
    }
  }

  private async advance(): Promise<void> {
    const next = await this.api.nextCandidate(this.sessionId, this.annotator);
    this.done = next.done;
    this.current = next.review;
  }

  /** Submit a label or skip for the current candidate, then advance. */
  async submit(value: LabelValue): Promise<boolean> {
    if (!this.current || this.done) return false;
    this.lastError = null;
    try {
      this.state = await this.api.postLabel(
        this.sessionId,
        this.current.id,
        this.annotator,
        value,
      );
      await this.advance();
      return true;
    } catch (error) {
      // keep the current candidate so nothing is lost; caller shows a banner
      this.lastError = String(error);
      return false;
    }
  }

  /** Retry loading after a failure. */
  async retry(): Promise<void> {
    await this.start();
  }

  progress(): { labeled: number; skipped: number; unlabeled: number } {
    const fallback = { labeled: 0, skipped: 0, unlabeled: 0 };
    if (!this.state) return fallback;
    return this.state.progress[this.annotator] ?? fallback;
  }
}

/** Map keyboard shortcuts to label values: 1 / 0 / s. */
export function shortcutToLabel(key: string): LabelValue | null {
  if (key === "1") return 1;
  if (key === "0") return 0;
  if (key === "s" || key === "S") return "skip";
  return null;
}

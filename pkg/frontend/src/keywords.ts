/** Bootstrap keyword review flow: approve or reject mined candidate keywords.
 *
 * Each decision posts immediately; when the pending queue empties the server
 * advances the iteration (or finishes the run), so the flow just re-fetches.
 */

import { ApiClient, PendingKeyword } from "./api.js";

export class KeywordFlow {
  pending: PendingKeyword[] = [];
  iteration = 0;
  finished = false;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly runId: string,
  ) {}

  async load(): Promise<void> {
    this.lastError = null;
    try {
      const payload = await this.api.pendingKeywords(this.runId);
      this.pending = payload.pending;
      this.iteration = payload.iteration;
      this.finished = payload.finished;
    } catch (error) {
      this.lastError = String(error);
    }
  }

  get currentKeyword(): PendingKeyword | null {
    return this.pending.length ? this.pending[0] : null;
  }

  /** Decide the head of the queue; reloads state from the server afterwards. */
  async decide(approved: boolean): Promise<boolean> {
    const keyword = this.currentKeyword;
    if (!keyword) return false;
    this.lastError = null;
    try {
      await this.api.decideKeyword(this.runId, keyword.keyword, approved);
      await this.load();
      return true;
    } catch (error) {
      this.lastError = String(error);
      return false;
    }
  }
}

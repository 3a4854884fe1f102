/** Session state machine, independent of the DOM.
 *
 * Holds the latest server snapshot and enforces the one-outstanding-query
 * contract on the client side: while a submission is in flight, further
 * submissions are ignored instead of queued, so the server never sees a
 * second label for the same query.  A 409 (stale or concurrent tab) is not
 * an error for the user; the controller re-syncs from the snapshot.
 */

import { Api, HttpError, Snapshot } from "./api.js";

export type SubmitResult = "ok" | "resynced" | "ignored";

export class SessionController {
  snapshot: Snapshot | null = null;
  private inFlight = false;

  constructor(
    private readonly api: Api,
    readonly sessionId: string,
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  /** Fetch the authoritative server state (start, resume, or re-sync). */
  async refresh(): Promise<Snapshot> {
    this.snapshot = await this.api.getSession(this.sessionId);
    return this.snapshot;
  }

  /** Submit a class for the outstanding query.
   *
   * Returns "ignored" when no query is outstanding or a submission is
   * already in flight (no request is made), "resynced" when the server
   * answered 409 and the view was refreshed, "ok" otherwise.
   */
  async submit(cls: number): Promise<SubmitResult> {
    const query = this.snapshot?.next;
    if (this.inFlight || !query) return "ignored";
    this.inFlight = true;
    try {
      await this.api.submitLabel(this.sessionId, query.example_id, cls);
      await this.refresh();
      return "ok";
    } catch (err) {
      if (err instanceof HttpError && err.status === 409) {
        await this.refresh();
        return "resynced";
      }
      throw err;
    } finally {
      this.inFlight = false;
    }
  }

  classCount(): number {
    const names = this.classNames();
    if (names) return names.length;
    return this.snapshot?.k ?? 2;
  }

  classNames(): string[] | null {
    const names = this.snapshot?.config?.["class_names"];
    return Array.isArray(names) ? names.map(String) : null;
  }
}

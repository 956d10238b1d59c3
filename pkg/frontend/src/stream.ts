// Resumable session subscription: applies envelopes to a SessionView and
// reconnects with from_seq after drops, deduplicating by sequence number.

import type { Api } from "./api.js";
import { streamFrames } from "./sse.js";
import { SessionView } from "./timeline.js";
import type { EventEnvelope } from "./types.js";

export interface SubscriptionCallbacks {
  onUpdate: (view: SessionView) => void;
  onConnectionChange?: (connected: boolean) => void;
}

export class SessionSubscription {
  readonly view = new SessionView();
  private abort = new AbortController();
  private stopped = false;

  constructor(
    private api: Api,
    private sessionId: string,
    private callbacks: SubscriptionCallbacks,
    private retryDelayMs = 1000,
  ) {}

  async run(): Promise<void> {
    while (!this.stopped && !this.view.terminal) {
      try {
        const url = this.api.eventsUrl(this.sessionId, this.view.nextSeq);
        for await (const frame of streamFrames(url, this.abort.signal)) {
          const envelope = JSON.parse(frame.data) as EventEnvelope;
          if (this.view.apply(envelope)) {
            this.callbacks.onUpdate(this.view);
          }
        }
        this.callbacks.onConnectionChange?.(true);
        if (this.view.terminal) return;
      } catch (err) {
        if (this.stopped) return;
        this.callbacks.onConnectionChange?.(false);
        await new Promise((r) => setTimeout(r, this.retryDelayMs));
      }
    }
  }

  stop(): void {
    this.stopped = true;
    this.abort.abort();
  }
}

// Short-interval polling of the session view; exercise turns are
// human-paced, so a couple of seconds is plenty and keeps the server
// stateless.

import type { ApiClient, SessionView } from './api.js';
import type { SyncState } from './state.js';

export interface PollHandle {
  stop(): void;
}

export function pollSession(
  client: ApiClient,
  sessionId: string,
  onView: (view: SessionView, sync: SyncState) => void,
  intervalMs = 2000,
  schedule: (fn: () => void, ms: number) => unknown = (fn, ms) => setInterval(fn, ms),
  cancel: (handle: unknown) => void = (handle) => clearInterval(handle as number),
): PollHandle {
  const sync: SyncState = { lastSyncedAt: null, lastError: null };
  let lastView: SessionView | null = null;

  const tick = async () => {
    try {
      const view = await client.getSession(sessionId);
      sync.lastSyncedAt = Date.now();
      sync.lastError = null;
      lastView = view;
      onView(view, { ...sync });
    } catch (error) {
      sync.lastError = error instanceof Error ? error.message : String(error);
      if (lastView) onView(lastView, { ...sync });
    }
  };

  void tick();
  const handle = schedule(() => void tick(), intervalMs);
  return { stop: () => cancel(handle) };
}

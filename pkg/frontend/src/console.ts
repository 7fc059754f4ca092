// Facilitator and participant consoles: render the polled session view and
// wire each control to its single API call.

import type { ApiClient, SessionView, TranscriptEvent } from './api.js';
import { ApiError } from './api.js';
import {
  ADVANCE_CONTROLS,
  controlStates,
  formatTimeRemaining,
  isStale,
  participantInputEnabled,
  type SyncState,
} from './state.js';
import { pollSession, type PollHandle } from './poll.js';

const POLL_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(error: unknown) {
  const banner = el<HTMLDivElement>('error-banner');
  if (error instanceof ApiError) {
    banner.textContent = `${error.code}: ${error.message}`;
  } else {
    banner.textContent = String(error);
  }
  banner.hidden = false;
}

function clearError() {
  el<HTMLDivElement>('error-banner').hidden = true;
}

export class ExerciseConsole {
  private poller: PollHandle | null = null;
  private view: SessionView | null = null;

  constructor(private client: ApiClient) {}

  attach(sessionId: string) {
    this.poller?.stop();
    this.poller = pollSession(
      this.client,
      sessionId,
      (view, sync) => this.render(view, sync),
      POLL_MS,
    );
  }

  detach() {
    this.poller?.stop();
    this.poller = null;
  }

  private render(view: SessionView, sync: SyncState) {
    this.view = view;
    el('phase-label').textContent = view.phase;
    el('time-label').textContent = formatTimeRemaining(view.time_remaining_seconds);
    el('resolved-label').textContent = view.resolved ? 'resolved' : 'unresolved';
    el('stale-flag').hidden = !isStale(sync, Date.now(), POLL_MS);

    const states = controlStates(view);
    for (const control of ADVANCE_CONTROLS) {
      el<HTMLButtonElement>(`signal-${control.signal}`).disabled = !states[control.signal];
    }
    el<HTMLButtonElement>('declare-resolution').disabled =
      view.phase !== 'IncidentAnalysis' && view.phase !== 'ResolvedCheck';
    el<HTMLButtonElement>('trigger-retro').disabled = view.phase !== 'Debrief';
    el<HTMLButtonElement>('next-turn').disabled =
      view.phase === 'End' || view.pause_requested;

    const input = el<HTMLTextAreaElement>('response-input');
    const submit = el<HTMLButtonElement>('submit-response');
    const enabled = participantInputEnabled(view);
    input.disabled = !enabled;
    submit.disabled = !enabled;

    const latest = el<HTMLPreElement>('latest-message');
    latest.textContent = view.latest_message?.narrative ?? '(no facilitator message yet)';

    const roles = el<HTMLUListElement>('role-list');
    roles.replaceChildren(
      ...view.participants.map((p) => {
        const item = document.createElement('li');
        const role = p.role ? (p.role.label || p.role.kind) : 'no role yet';
        item.textContent = `${p.display_name} — ${role}`;
        return item;
      }),
    );
  }

  private async refreshTranscript(sessionId: string) {
    const transcript = await this.client.getTranscript(sessionId);
    const log = el<HTMLOListElement>('transcript');
    log.replaceChildren(
      ...transcript.events.map((event: TranscriptEvent) => {
        const item = document.createElement('li');
        const body =
          typeof event.body['narrative'] === 'string'
            ? (event.body['narrative'] as string)
            : typeof event.body['text'] === 'string'
              ? (event.body['text'] as string)
              : JSON.stringify(event.body);
        item.textContent = `#${event.sequence_number} [${event.phase}] ${event.kind}: ${body}`;
        return item;
      }),
    );
  }

  wire(sessionIdInput: HTMLInputElement) {
    const sid = () => sessionIdInput.value.trim();

    for (const control of ADVANCE_CONTROLS) {
      el<HTMLButtonElement>(`signal-${control.signal}`).addEventListener('click', async () => {
        try {
          clearError();
          await this.client.advance(sid(), control.signal);
        } catch (error) {
          showError(error);
        }
      });
    }

    el<HTMLButtonElement>('declare-resolution').addEventListener('click', async () => {
      try {
        clearError();
        await this.client.declareResolution(sid());
      } catch (error) {
        showError(error);
      }
    });

    el<HTMLButtonElement>('next-turn').addEventListener('click', async () => {
      try {
        clearError();
        await this.client.takeTurn(sid());
        await this.refreshTranscript(sid());
      } catch (error) {
        showError(error);
      }
    });

    el<HTMLButtonElement>('submit-response').addEventListener('click', async () => {
      const input = el<HTMLTextAreaElement>('response-input');
      try {
        clearError();
        await this.client.takeTurn(sid(), input.value, this.view?.participants[0]?.participant_id);
        input.value = '';
        await this.refreshTranscript(sid());
      } catch (error) {
        showError(error);
      }
    });

    el<HTMLButtonElement>('trigger-retro').addEventListener('click', async () => {
      try {
        clearError();
        const retro = await this.client.runRetrospective(sid());
        el<HTMLPreElement>('retro-output').textContent =
          retro.retrospective +
          '\n\n' +
          retro.items.map((i) => `- ${i.finding} -> ${i.improvement}`).join('\n');
        await this.refreshTranscript(sid());
      } catch (error) {
        showError(error);
      }
    });

    el<HTMLButtonElement>('show-transcript').addEventListener('click', async () => {
      try {
        clearError();
        await this.refreshTranscript(sid());
      } catch (error) {
        showError(error);
      }
    });
  }
}

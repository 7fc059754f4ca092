// App bootstrap: connection settings, console attachment, scoreboard.

import { ApiClient } from './api.js';
import { ExerciseConsole } from './console.js';
import { Scoreboard } from './scoreboard.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function buildClient(): ApiClient {
  const base = el<HTMLInputElement>('api-base').value.trim().replace(/\/$/, '');
  const token = el<HTMLInputElement>('api-token').value.trim();
  return new ApiClient(base, token);
}

function main() {
  el<HTMLInputElement>('api-base').value =
    localStorage.getItem('ttx-api-base') ?? 'http://127.0.0.1:8420';
  el<HTMLInputElement>('api-token').value = localStorage.getItem('ttx-api-token') ?? '';

  let client = buildClient();
  let exerciseConsole = new ExerciseConsole(client);
  let scoreboard = new Scoreboard(client);
  exerciseConsole.wire(el<HTMLInputElement>('session-id'));
  scoreboard.wire();

  el<HTMLButtonElement>('connect').addEventListener('click', () => {
    localStorage.setItem('ttx-api-base', el<HTMLInputElement>('api-base').value.trim());
    localStorage.setItem('ttx-api-token', el<HTMLInputElement>('api-token').value.trim());
    client = buildClient();
    exerciseConsole.detach();
    exerciseConsole = new ExerciseConsole(client);
    exerciseConsole.wire(el<HTMLInputElement>('session-id'));
    scoreboard = new Scoreboard(client);
    scoreboard.wire();
    const sessionId = el<HTMLInputElement>('session-id').value.trim();
    if (sessionId) exerciseConsole.attach(sessionId);
  });

  el<HTMLButtonElement>('attach-session').addEventListener('click', () => {
    const sessionId = el<HTMLInputElement>('session-id').value.trim();
    if (sessionId) exerciseConsole.attach(sessionId);
  });

  el<HTMLButtonElement>('create-session').addEventListener('click', async () => {
    const banner = el<HTMLDivElement>('error-banner');
    banner.hidden = true;
    try {
      const narrative = el<HTMLTextAreaElement>('scenario-input').value.trim();
      const participants = el<HTMLInputElement>('participants-input')
        .value.split(',')
        .map((name) => name.trim())
        .filter((name) => name.length > 0)
        .map((name) => ({ participant_id: name.toLowerCase(), display_name: name }));
      const created = await client.createSession({ narrative }, participants);
      el<HTMLInputElement>('session-id').value = created.session_id;
      exerciseConsole.attach(created.session_id);
    } catch (error) {
      banner.textContent = String(error);
      banner.hidden = false;
    }
  });
}

document.addEventListener('DOMContentLoaded', main);

// Pure view-model logic. Everything here is derived from server responses;
// none of it recomputes workflow or scoring arithmetic.

import type { SessionView, UpbsResponse } from './api.js';

// One facilitator control per advance signal the server may list.
export const ADVANCE_CONTROLS = [
  { signal: 'proceed', label: 'Proceed' },
  { signal: 'resolved_yes', label: 'Resolved: yes' },
  { signal: 'resolved_no', label: 'Resolved: no' },
  { signal: 'clock', label: 'Check the clock' },
] as const;

export type ControlStates = Record<string, boolean>;

// A control is enabled exactly when its signal is legal in the current
// phase, as reported by the server.
export function controlStates(view: Pick<SessionView, 'legal_signals'>): ControlStates {
  const legal = new Set(view.legal_signals);
  const states: ControlStates = {};
  for (const control of ADVANCE_CONTROLS) {
    states[control.signal] = legal.has(control.signal);
  }
  return states;
}

export function allControlsDisabled(states: ControlStates): boolean {
  return Object.values(states).every((enabled) => !enabled);
}

// Participant response entry is open if and only if the facilitator paused.
export function participantInputEnabled(view: Pick<SessionView, 'pause_requested'>): boolean {
  return view.pause_requested;
}

// Displayed precision is three decimals everywhere scores appear.
export function formatScore(value: number): string {
  return value.toFixed(3);
}

export function formatTimeRemaining(seconds: number): string {
  const clamped = Math.max(0, Math.floor(seconds));
  const minutes = Math.floor(clamped / 60);
  const rest = clamped % 60;
  return `${minutes}:${String(rest).padStart(2, '0')}`;
}

export interface SyncState {
  lastSyncedAt: number | null;
  lastError: string | null;
}

// A view is stale once a poll has failed or the last success is older
// than two poll intervals.
export function isStale(sync: SyncState, nowMs: number, pollIntervalMs: number): boolean {
  if (sync.lastError !== null) return true;
  if (sync.lastSyncedAt === null) return true;
  return nowMs - sync.lastSyncedAt > 2 * pollIntervalMs;
}

export interface ScoreboardModel {
  teams: { teamId: string; display: string }[];
  deltas: { pair: string; display: string }[];
  series: { alpha: number; display: string; score: number }[];
  selected: { alpha: number; display: string } | null;
}

// Rows for the scoreboard, verbatim from one /scores/upbs response.
export function scoreboardModel(response: UpbsResponse, selectedAlpha?: number): ScoreboardModel {
  const series = response.results.map((r) => ({
    alpha: r.alpha,
    display: formatScore(r.score),
    score: r.score,
  }));
  let selected: ScoreboardModel['selected'] = null;
  if (selectedAlpha !== undefined) {
    const hit = response.results.find((r) => r.alpha === selectedAlpha);
    if (hit) selected = { alpha: hit.alpha, display: formatScore(hit.score) };
  }
  return {
    teams: response.teams.map((t) => ({
      teamId: t.team_id,
      display: formatScore(t.preparedness),
    })),
    deltas: response.deltas.map((d) => ({
      pair: `${d.team_a} vs ${d.team_b}`,
      display: formatScore(d.delta),
    })),
    series,
    selected,
  };
}

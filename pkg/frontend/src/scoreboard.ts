// Preparedness scoreboard: team table, pairwise delta matrix, and the
// score-vs-alpha curve. Every number on screen comes from one
// /scores/upbs response; the slider only selects which fetched alpha to
// highlight.

import type { ApiClient, TeamProfileInput, UpbsResponse } from './api.js';
import { ApiError } from './api.js';
import { formatScore, scoreboardModel } from './state.js';

export const ALPHA_GRID = Array.from({ length: 101 }, (_, i) => i / 100);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function parseProfilesCsv(text: string): TeamProfileInput[] {
  const lines = text
    .split('\n')
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length < 2) throw new Error('profile CSV needs a header row and teams');
  const header = lines[0].split(',').map((cell) => cell.trim());
  const expected = ['team_id', 'S', 'K', 'R', 'C', 'A', 'E', 'scale_max'];
  if (header.join(',') !== expected.join(',')) {
    throw new Error(`expected header ${expected.join(',')}`);
  }
  return lines.slice(1).map((line, index) => {
    const cells = line.split(',').map((cell) => cell.trim());
    if (cells.length !== expected.length) {
      throw new Error(`line ${index + 2}: expected ${expected.length} columns`);
    }
    const numbers = cells.slice(1).map((cell) => {
      const value = Number(cell);
      if (Number.isNaN(value)) throw new Error(`line ${index + 2}: ${cell} is not a number`);
      return value;
    });
    return {
      team_id: cells[0],
      S: numbers[0],
      K: numbers[1],
      R: numbers[2],
      C: numbers[3],
      A: numbers[4],
      E: numbers[5],
      scale_max: numbers[6],
    };
  });
}

export class Scoreboard {
  private response: UpbsResponse | null = null;

  constructor(private client: ApiClient) {}

  async load(profiles: TeamProfileInput[]) {
    // One fetch covers the whole slider range, so moving the slider never
    // recomputes anything client-side.
    this.response = await this.client.scoreUpbs(profiles, ALPHA_GRID);
    this.render();
  }

  selectedAlpha(): number {
    return Number(el<HTMLInputElement>('alpha-slider').value);
  }

  render() {
    if (!this.response) return;
    const model = scoreboardModel(this.response, this.selectedAlpha());

    const teams = el<HTMLTableSectionElement>('team-rows');
    teams.replaceChildren(
      ...model.teams.map((team) => {
        const row = document.createElement('tr');
        const name = document.createElement('td');
        name.textContent = team.teamId;
        const score = document.createElement('td');
        score.textContent = team.display;
        row.append(name, score);
        return row;
      }),
    );

    const deltas = el<HTMLTableSectionElement>('delta-rows');
    deltas.replaceChildren(
      ...model.deltas.map((delta) => {
        const row = document.createElement('tr');
        const pair = document.createElement('td');
        pair.textContent = delta.pair;
        const value = document.createElement('td');
        value.textContent = delta.display;
        row.append(pair, value);
        return row;
      }),
    );

    el('alpha-label').textContent = this.selectedAlpha().toFixed(2);
    el('upbs-value').textContent = model.selected ? model.selected.display : '--';
    this.drawCurve(model.series.map((point) => point.score));
  }

  private drawCurve(scores: number[]) {
    const canvas = el<HTMLCanvasElement>('upbs-chart');
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.strokeStyle = '#888';
    ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
    ctx.strokeStyle = '#0a6';
    ctx.beginPath();
    scores.forEach((score, index) => {
      const x = (index / (scores.length - 1)) * (width - 10) + 5;
      const y = height - 5 - score * (height - 10);
      if (index === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  wire() {
    el<HTMLButtonElement>('load-profiles').addEventListener('click', async () => {
      const banner = el<HTMLDivElement>('score-error');
      banner.hidden = true;
      try {
        const profiles = parseProfilesCsv(el<HTMLTextAreaElement>('profiles-input').value);
        await this.load(profiles);
      } catch (error) {
        // No cached ghost data: wipe the board before surfacing the error.
        this.response = null;
        el<HTMLTableSectionElement>('team-rows').replaceChildren();
        el<HTMLTableSectionElement>('delta-rows').replaceChildren();
        el('upbs-value').textContent = '--';
        banner.textContent =
          error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
        banner.hidden = false;
      }
    });

    el<HTMLInputElement>('alpha-slider').addEventListener('input', () => this.render());
  }
}

export { formatScore };

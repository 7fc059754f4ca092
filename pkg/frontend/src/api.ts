// Typed client for the exercise service. Every UI control maps to exactly
// one of these calls; the client never derives or recomputes engine state.

export interface FacilitatorMessageBody {
  narrative: string;
  pause_requested: boolean;
  resolution_declared: boolean;
  simulated_roles: string[];
}

export interface ParticipantView {
  participant_id: string;
  display_name: string;
  role: { kind: string; label: string } | null;
}

export interface SessionView {
  session_id: string;
  phase: string;
  participants: ParticipantView[];
  resolved: boolean;
  started_at: string;
  time_budget_seconds: number;
  time_remaining_seconds: number;
  time_remaining: boolean;
  legal_signals: string[];
  latest_message: FacilitatorMessageBody | null;
  pause_requested: boolean;
  event_count: number;
}

export interface TranscriptEvent {
  sequence_number: number;
  timestamp: string;
  phase: string;
  actor: string;
  kind: string;
  body: Record<string, unknown>;
}

export interface TeamProfileInput {
  team_id: string;
  S: number;
  K: number;
  R: number;
  C: number;
  A: number;
  E: number;
  scale_max?: number;
}

export interface UpbsResult {
  alpha: number;
  beta: number;
  p_avg: number;
  mean_abs_delta: number;
  score: number;
  team_ids: string[];
}

export interface UpbsResponse {
  results: UpbsResult[];
  teams: { team_id: string; preparedness: number }[];
  deltas: { team_a: string; team_b: string; delta: number }[];
}

export interface ActionItemView {
  item_id: string;
  finding: string;
  improvement: string;
  measurable_criterion: string;
  responsibility_domain: string | null;
  status: string;
  source_session: string | null;
}

export interface RetrospectiveResponse {
  retrospective: string;
  items: ActionItemView[];
  item_ids: string[];
  warnings: string[];
}

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = 'error';
      let message = `HTTP ${response.status}`;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.code === 'string') code = parsed.code;
        if (parsed && typeof parsed.message === 'string') message = parsed.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  createSession(scenario: object, participants: object[], timeBudgetMinutes?: number) {
    return this.request<{ session_id: string; phase: string }>('POST', '/sessions', {
      scenario,
      participants,
      time_budget_minutes: timeBudgetMinutes,
    });
  }

  getSession(sessionId: string) {
    return this.request<SessionView>('GET', `/sessions/${sessionId}`);
  }

  getTranscript(sessionId: string) {
    return this.request<{ session_id: string; events: TranscriptEvent[] }>(
      'GET',
      `/sessions/${sessionId}/transcript`,
    );
  }

  assignRole(sessionId: string, participantId: string, role: string, label = '') {
    return this.request<SessionView>('POST', `/sessions/${sessionId}/roles`, {
      participant_id: participantId,
      role,
      label,
    });
  }

  advance(sessionId: string, signal: string) {
    return this.request<{ session_id: string; phase: string }>(
      'POST',
      `/sessions/${sessionId}/advance`,
      { signal },
    );
  }

  declareResolution(sessionId: string) {
    return this.request<SessionView>('POST', `/sessions/${sessionId}/resolution`);
  }

  takeTurn(sessionId: string, humanInput?: string, participantId?: string) {
    return this.request<FacilitatorMessageBody>('POST', `/sessions/${sessionId}/turn`, {
      human_input: humanInput ?? null,
      participant_id: participantId ?? null,
    });
  }

  runRetrospective(sessionId: string) {
    return this.request<RetrospectiveResponse>('POST', `/sessions/${sessionId}/retrospective`);
  }

  scoreUpbs(profiles: TeamProfileInput[], alphas: number[]) {
    return this.request<UpbsResponse>('POST', '/scores/upbs', { profiles, alphas });
  }

  openActionItems(domain?: string) {
    const query = domain ? `?domain=${encodeURIComponent(domain)}` : '';
    return this.request<{ items: ActionItemView[] }>('GET', `/action-items${query}`);
  }
}

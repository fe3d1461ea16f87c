// Thin client over the documented endpoints; nothing else is ever called.

import type {
  EventPage,
  ExampleRecordWire,
  FeedbackKind,
  SessionHandle,
  SessionSummary,
  SkillRecordWire,
  WorldSnapshotWire,
} from './types.js';

export class ApiHttpError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiHttpError> {
  let code = 'unknown';
  let message = response.statusText;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiHttpError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async createSession(body: Record<string, unknown>): Promise<SessionHandle> {
    const response = await this.fetchFn(`${this.base}/api/session`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as SessionHandle;
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.getJson(`/api/session/${id}`);
  }

  pollEvents(id: string, since: number): Promise<EventPage> {
    return this.getJson(`/api/session/${id}/events?since=${since}`);
  }

  async postFeedback(id: string, kind: FeedbackKind, text = ''): Promise<void> {
    const body: Record<string, unknown> = { kind };
    if (text) body.text = text;
    const response = await this.fetchFn(`${this.base}/api/session/${id}/feedback`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
  }

  getWorld(id: string): Promise<WorldSnapshotWire> {
    return this.getJson(`/api/world/${id}`);
  }

  getSkills(): Promise<SkillRecordWire[]> {
    return this.getJson('/api/skills');
  }

  getSkillVersions(name: string): Promise<SkillRecordWire[]> {
    return this.getJson(`/api/skills/${encodeURIComponent(name)}/versions`);
  }

  getExamples(): Promise<ExampleRecordWire[]> {
    return this.getJson('/api/examples');
  }
}

// Session view state: event cursor, status, code panes, feedback gating.
// Pure reducer logic so it is testable without a DOM; the app wires it to
// the long-poll loop.

import type { EventPage, SessionStatus, TranscriptEvent } from './types.js';

export interface CodePanes {
  current: string | null;
  previous: string | null;
}

export interface SessionViewState {
  sessionId: string;
  cursor: number;
  status: SessionStatus;
  events: TranscriptEvent[];
  panes: CodePanes;
  instruction: string | null;
  lastDigest: string | null;
  feedbackInFlight: boolean;
}

export function initialSessionView(sessionId: string): SessionViewState {
  return {
    sessionId,
    cursor: 0,
    status: 'awaiting_agent',
    events: [],
    panes: { current: null, previous: null },
    instruction: null,
    lastDigest: null,
    feedbackInFlight: false,
  };
}

export function applyEventPage(state: SessionViewState, page: EventPage): SessionViewState {
  if (page.since !== state.cursor) {
    // a stale page (reload or race): ignore anything that is not a continuation
    if (page.since > state.cursor) return state;
  }
  const next: SessionViewState = {
    ...state,
    cursor: Math.max(state.cursor, page.next),
    status: page.status,
    events: [...state.events, ...page.events],
  };
  for (const event of page.events) {
    if (event.type === 'task_start') {
      next.instruction = String(event.instruction ?? '');
    } else if (event.type === 'agent_attempt') {
      next.panes = { previous: next.panes.current, current: String(event.response_text ?? '') };
    } else if (event.type === 'rollout') {
      next.lastDigest = String(event.digest ?? '');
    }
  }
  return next;
}

export function canSubmitFeedback(state: SessionViewState): boolean {
  return state.status === 'awaiting_feedback' && !state.feedbackInFlight;
}

export interface FeedbackValidation {
  ok: boolean;
  reason?: string;
}

export function validateFeedback(kind: string, text: string): FeedbackValidation {
  if (kind === 'correction' || kind === 'hint') {
    if (!text.trim()) {
      return { ok: false, reason: `${kind} needs nonempty text` };
    }
  }
  return { ok: true };
}

export function describeEvent(event: TranscriptEvent): string {
  switch (event.type) {
    case 'session_start':
      return `session started (mode ${String(event.mode)})`;
    case 'task_start':
      return `task: ${String(event.instruction)}`;
    case 'retrieval': {
      const examples = (event.examples as unknown[]) ?? [];
      const skills = (event.skills as unknown[]) ?? [];
      return `retrieved ${examples.length} examples, ${skills.length} skills`;
    }
    case 'prompt':
      return `prompt sent (iteration ${String(event.iteration)})`;
    case 'agent_attempt':
      return 'agent replied';
    case 'rollout': {
      const picks = event.pick_place_count ?? 0;
      const trace = event.trace as { error: { type: string; message: string } | null };
      return trace && trace.error
        ? `rollout failed: ${trace.error.type}: ${trace.error.message}`
        : `rollout ok (${String(picks)} pick-and-place)`;
    }
    case 'auto_correction':
      return `auto-correction: ${String(event.text)}`;
    case 'feedback':
      return event.text ? `${String(event.kind)}: ${String(event.text)}` : String(event.kind);
    case 'regression': {
      const report = event.report as { passed: number; total: number };
      return `regression ${report.passed}/${report.total}`;
    }
    case 'version_rejected':
      return `version ${String(event.version)} of ${String(event.name)} rejected`;
    case 'example_added':
      return `example stored (#${String(event.record_id)})`;
    case 'skill_upserted':
      return `skill ${String(event.name)} v${String(event.version)} stored`;
    case 'task_end':
      return `task ${String(event.status)}`;
    case 'session_end':
      return `session ${String(event.status)}`;
    default:
      return event.type;
  }
}

// Wire formats of the lyra HTTP API. The browser holds no authoritative state:
// everything here mirrors what the server sends.

export interface PoseWire {
  position: [number, number, number];
  rotation: [number, number, number, number]; // qx, qy, qz, qw
}

export interface ObjectWire {
  id: number;
  type: 'block' | 'cylinder' | 'zone' | 'plate';
  size: [number, number, number];
  color: string;
  pose: PoseWire;
}

export interface WorldSnapshotWire {
  version: number;
  seed: number;
  workspace: { x: [number, number]; y: [number, number]; z: [number, number] };
  ee: PoseWire;
  objects: ObjectWire[];
  actions: unknown[];
}

export interface SessionHandle {
  id: string;
  phase: string;
  created_at: number;
  status: SessionStatus;
}

export type SessionStatus = 'awaiting_agent' | 'awaiting_feedback' | 'done' | 'failed';

export interface SessionSummary extends SessionHandle {
  event_count: number;
  latest: { instruction: string; code: string; digest: string; error: string | null } | null;
}

export interface TranscriptEvent {
  seq: number;
  type: string;
  [key: string]: unknown;
}

export interface EventPage {
  since: number;
  next: number;
  events: TranscriptEvent[];
  status: SessionStatus;
}

export type FeedbackKind = 'accept' | 'reject' | 'correction' | 'hint';

export interface SkillRecordWire {
  record_id: number;
  name: string;
  version: number;
  supersedes: number | null;
  status: 'accepted' | 'rejected';
  docstring: string;
  header: string;
  source: string;
}

export interface ExampleRecordWire {
  record_id: number;
  instruction: string;
  code: string;
  outcome_digest: string;
}

export interface ApiError {
  code: string;
  message: string;
}

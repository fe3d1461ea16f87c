// Browser wiring: long-poll loop, scene canvas, feedback panel, skill browser.
// All state shown here is refetchable from the server; a reload loses nothing.

import { ApiClient, ApiHttpError } from './api.js';
import { diffLines } from './diff.js';
import { buildSceneModel, renderScene, shapeAt, type SceneModel } from './scene.js';
import {
  applyEventPage,
  canSubmitFeedback,
  describeEvent,
  initialSessionView,
  validateFeedback,
  type SessionViewState,
} from './session.js';
import type { FeedbackKind, SkillRecordWire, WorldSnapshotWire } from './types.js';

const api = new ApiClient('');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>('toast');
  box.textContent = message;
  box.classList.add('visible');
  window.setTimeout(() => box.classList.remove('visible'), 3500);
}

// -- scene panel ------------------------------------------------------------

let selectedObject: number | null = null;
let lastModel: SceneModel | null = null;
let lastGoodSnapshot: WorldSnapshotWire | null = null;

function paint(snapshot: WorldSnapshotWire | null): void {
  const canvas = el<HTMLCanvasElement>('scene');
  const context = canvas.getContext('2d');
  if (!context || !snapshot) return;
  const viewport = { width: canvas.width, height: canvas.height };
  lastModel = buildSceneModel(snapshot, viewport);
  renderScene(context, lastModel, viewport, selectedObject);
  el<HTMLSpanElement>('scene-meta').textContent =
    `${snapshot.objects.length} objects`;
}

async function refreshWorld(sessionId: string): Promise<void> {
  try {
    const snapshot = await api.getWorld(sessionId);
    lastGoodSnapshot = snapshot;
    paint(snapshot);
    el<HTMLDivElement>('scene-error').textContent = '';
  } catch (error) {
    if (error instanceof ApiHttpError && error.code === 'no_world') return;
    // malformed or failed fetch: keep the last good frame, show a banner
    el<HTMLDivElement>('scene-error').textContent =
      `scene refresh failed: ${String((error as Error).message)}`;
    paint(lastGoodSnapshot);
  }
}

// -- session panel ---------------------------------------------------------------

let view: SessionViewState | null = null;
let polling = false;

function renderSession(): void {
  if (!view) return;
  el<HTMLSpanElement>('session-status').textContent = view.status;
  el<HTMLSpanElement>('session-status').dataset.status = view.status;
  el<HTMLDivElement>('instruction').textContent = view.instruction ?? '';
  const log = el<HTMLUListElement>('event-log');
  log.innerHTML = '';
  for (const event of view.events) {
    const item = document.createElement('li');
    item.textContent = `${event.seq}. ${describeEvent(event)}`;
    item.dataset.type = event.type;
    log.appendChild(item);
  }
  log.scrollTop = log.scrollHeight;
  el<HTMLPreElement>('code-current').textContent = view.panes.current ?? '';
  el<HTMLPreElement>('code-previous').textContent = view.panes.previous ?? '';
  const enabled = canSubmitFeedback(view);
  for (const id of ['btn-accept', 'btn-reject', 'btn-correction', 'btn-hint']) {
    el<HTMLButtonElement>(id).disabled = !enabled;
  }
}

async function pollLoop(sessionId: string): Promise<void> {
  if (polling) return;
  polling = true;
  while (view && view.sessionId === sessionId) {
    try {
      const page = await api.pollEvents(sessionId, view.cursor);
      const hadNews = page.events.length > 0;
      view = applyEventPage(view, page);
      renderSession();
      if (hadNews) await refreshWorld(sessionId);
      if (view.status === 'done' || view.status === 'failed') break;
    } catch (error) {
      toast(`event poll failed: ${String((error as Error).message)}`);
      await new Promise((resolve) => setTimeout(resolve, 2000));
    }
  }
  polling = false;
}

async function submitFeedback(kind: FeedbackKind, text = ''): Promise<void> {
  if (!view) return;
  const validation = validateFeedback(kind, text);
  if (!validation.ok) {
    toast(validation.reason ?? 'invalid feedback');
    return;
  }
  if (!canSubmitFeedback(view)) {
    toast('session not awaiting feedback');
    return;
  }
  view = { ...view, feedbackInFlight: true };
  renderSession();
  try {
    await api.postFeedback(view.sessionId, kind, text);
    if (kind === 'correction') el<HTMLTextAreaElement>('correction-text').value = '';
    if (kind === 'hint') el<HTMLInputElement>('hint-text').value = '';
  } catch (error) {
    if (error instanceof ApiHttpError && error.status === 409) {
      toast('session not awaiting feedback');
      const summary = await api.getSession(view.sessionId);
      view = { ...view, status: summary.status };
    } else {
      toast(`feedback failed: ${String((error as Error).message)}`);
    }
  } finally {
    if (view) view = { ...view, feedbackInFlight: false };
    renderSession();
  }
}

async function attachSession(sessionId: string): Promise<void> {
  view = initialSessionView(sessionId);
  const summary = await api.getSession(sessionId);
  view = { ...view, status: summary.status };
  renderSession();
  await refreshWorld(sessionId);
  void pollLoop(sessionId);
}

// -- skill browser ------------------------------------------------------------------

async function renderSkillBrowser(): Promise<void> {
  const listNode = el<HTMLUListElement>('skill-list');
  listNode.innerHTML = '';
  let skills: SkillRecordWire[] = [];
  try {
    skills = await api.getSkills();
  } catch {
    listNode.innerHTML = '<li class="empty">memory unavailable</li>';
    return;
  }
  if (!skills.length) {
    listNode.innerHTML = '<li class="empty">no skills stored yet</li>';
    return;
  }
  for (const skill of skills) {
    const item = document.createElement('li');
    const button = document.createElement('button');
    button.textContent = `${skill.name} v${skill.version}`;
    button.addEventListener('click', () => void renderVersions(skill.name));
    item.appendChild(button);
    listNode.appendChild(item);
  }
}

async function renderVersions(name: string): Promise<void> {
  const versions = await api.getSkillVersions(name);
  const select = el<HTMLSelectElement>('version-select');
  select.innerHTML = '';
  for (const record of versions) {
    const option = document.createElement('option');
    option.value = String(record.version);
    option.textContent =
      `v${record.version}` + (record.status === 'rejected' ? ' (rejected)' : '');
    select.appendChild(option);
  }
  select.value = String(versions[versions.length - 1].version);
  const badges = el<HTMLDivElement>('version-badges');
  badges.innerHTML = '';
  for (const record of versions) {
    const badge = document.createElement('span');
    badge.className = `badge ${record.status}`;
    badge.textContent = `v${record.version} ${record.status === 'rejected' ? 'tombstone' : 'accepted'}`;
    badges.appendChild(badge);
  }
  const renderDiff = () => {
    const chosen = Number(select.value);
    const index = versions.findIndex((r) => r.version === chosen);
    const current = versions[index];
    const previous = index > 0 ? versions[index - 1] : null;
    paintDiff(previous?.source ?? '', current.source);
    el<HTMLDivElement>('diff-title').textContent = previous
      ? `${name}: v${previous.version} -> v${current.version}`
      : `${name}: v${current.version}`;
  };
  select.onchange = renderDiff;
  renderDiff();
}

function paintDiff(before: string, after: string): void {
  const table = el<HTMLTableElement>('diff-table');
  table.innerHTML = '';
  for (const row of diffLines(before, after)) {
    const tr = document.createElement('tr');
    tr.className = row.kind;
    const left = document.createElement('td');
    left.textContent = row.left ?? '';
    const right = document.createElement('td');
    right.textContent = row.right ?? '';
    tr.append(left, right);
    table.appendChild(tr);
  }
}

// -- boot --------------------------------------------------------------------------

export function boot(): void {
  el<HTMLButtonElement>('btn-accept').addEventListener('click', () => void submitFeedback('accept'));
  el<HTMLButtonElement>('btn-reject').addEventListener('click', () => void submitFeedback('reject'));
  el<HTMLButtonElement>('btn-correction').addEventListener('click', () => {
    void submitFeedback('correction', el<HTMLTextAreaElement>('correction-text').value);
  });
  el<HTMLButtonElement>('btn-hint').addEventListener('click', () => {
    void submitFeedback('hint', el<HTMLInputElement>('hint-text').value);
  });
  el<HTMLButtonElement>('btn-attach').addEventListener('click', () => {
    const sessionId = el<HTMLInputElement>('session-id').value.trim();
    if (sessionId) void attachSession(sessionId);
  });
  el<HTMLCanvasElement>('scene').addEventListener('click', (mouse) => {
    if (!lastModel) return;
    const rect = el<HTMLCanvasElement>('scene').getBoundingClientRect();
    const hit = shapeAt(lastModel, mouse.clientX - rect.left, mouse.clientY - rect.top);
    selectedObject = hit ? hit.id : null;
    el<HTMLSpanElement>('selected-object').textContent = hit
      ? `selected: ${hit.color} ${hit.kind} #${hit.id}`
      : '';
    paint(lastGoodSnapshot);
  });
  void renderSkillBrowser();

  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get('session');
  if (sessionId) void attachSession(sessionId);
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  boot();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', boot);
}

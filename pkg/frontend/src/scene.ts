// Scene rendering: a 2.5D orthographic projection of the server's snapshot.
// The model builder is pure; the canvas painter below it owns no state. The
// client never simulates: poses are drawn exactly as sent.

import type { ObjectWire, WorldSnapshotWire } from './types.js';

export interface Viewport {
  width: number;
  height: number;
}

export interface ScreenPoint {
  u: number;
  v: number;
}

export interface SceneShape {
  id: number;
  kind: ObjectWire['type'];
  color: string;
  top: ScreenPoint[];
  bottom: ScreenPoint[];
  zTop: number;
  zBottom: number;
  depthKey: number;
  centroid: ScreenPoint;
}

export interface SceneModel {
  outline: ScreenPoint[];
  shapes: SceneShape[];
  scale: number;
}

const MARGIN = 24;
const DEPTH_FORESHORTEN = 0.55; // table depth squashed toward the top of the canvas
const HEIGHT_LIFT = 0.9; // vertical meters to screen pixels, relative to scale

interface Frame {
  scale: number;
  x0: number;
  y0: number;
  originU: number;
  originV: number;
}

function frameFor(snapshot: WorldSnapshotWire, viewport: Viewport): Frame {
  const [x0, x1] = snapshot.workspace.x;
  const [y0, y1] = snapshot.workspace.y;
  const spanU = y1 - y0;
  const spanV = (x1 - x0) * DEPTH_FORESHORTEN + snapshot.workspace.z[1] * HEIGHT_LIFT;
  const scale = Math.min(
    (viewport.width - 2 * MARGIN) / spanU,
    (viewport.height - 2 * MARGIN) / spanV,
  );
  return {
    scale,
    x0,
    y0,
    originU: MARGIN,
    originV: MARGIN + snapshot.workspace.z[1] * HEIGHT_LIFT * scale,
  };
}

function project(frame: Frame, x: number, y: number, z: number): ScreenPoint {
  return {
    u: frame.originU + (y - frame.y0) * frame.scale,
    v: frame.originV + (x - frame.x0) * DEPTH_FORESHORTEN * frame.scale - z * HEIGHT_LIFT * frame.scale,
  };
}

function rotect(
  q: [number, number, number, number],
  v: [number, number, number],
): [number, number, number] {
  // quaternion sandwich: v + 2 w (q x v) + 2 (q x (q x v))
  const [qx, qy, qz, qw] = q;
  const tx = 2 * (qy * v[2] - qz * v[1]);
  const ty = 2 * (qz * v[0] - qx * v[2]);
  const tz = 2 * (qx * v[1] - qy * v[0]);
  return [
    v[0] + qw * tx + (qy * tz - qz * ty),
    v[1] + qw * ty + (qz * tx - qx * tz),
    v[2] + qw * tz + (qx * ty - qy * tx),
  ];
}

function footprintCorners(obj: ObjectWire, zSign: 1 | -1): [number, number, number][] {
  const [w, d, h] = obj.size;
  const corners: [number, number, number][] = [
    [-w / 2, -d / 2, (zSign * h) / 2],
    [w / 2, -d / 2, (zSign * h) / 2],
    [w / 2, d / 2, (zSign * h) / 2],
    [-w / 2, d / 2, (zSign * h) / 2],
  ];
  const [px, py, pz] = obj.pose.position;
  return corners.map((corner) => {
    const [rx, ry, rz] = rotect(obj.pose.rotation, corner);
    return [px + rx, py + ry, pz + rz];
  });
}

function circleCorners(obj: ObjectWire, zSign: 1 | -1, segments = 16): [number, number, number][] {
  const radius = obj.size[0] / 2;
  const [px, py, pz] = obj.pose.position;
  const z = pz + (zSign * obj.size[2]) / 2;
  const points: [number, number, number][] = [];
  for (let index = 0; index < segments; index += 1) {
    const angle = (2 * Math.PI * index) / segments;
    points.push([px + radius * Math.cos(angle), py + radius * Math.sin(angle), z]);
  }
  return points;
}

export function buildSceneModel(snapshot: WorldSnapshotWire, viewport: Viewport): SceneModel {
  const frame = frameFor(snapshot, viewport);
  const [x0, x1] = snapshot.workspace.x;
  const [y0, y1] = snapshot.workspace.y;
  const outline = [
    project(frame, x0, y0, 0),
    project(frame, x0, y1, 0),
    project(frame, x1, y1, 0),
    project(frame, x1, y0, 0),
  ];

  const shapes: SceneShape[] = snapshot.objects.map((obj) => {
    const round = obj.type === 'cylinder';
    const topWorld = round ? circleCorners(obj, 1) : footprintCorners(obj, 1);
    const bottomWorld = round ? circleCorners(obj, -1) : footprintCorners(obj, -1);
    const top = topWorld.map(([x, y, z]) => project(frame, x, y, z));
    const bottom = bottomWorld.map(([x, y, z]) => project(frame, x, y, z));
    const zTop = obj.pose.position[2] + obj.size[2] / 2;
    const zBottom = obj.pose.position[2] - obj.size[2] / 2;
    const centroid = top.reduce(
      (acc, p) => ({ u: acc.u + p.u / top.length, v: acc.v + p.v / top.length }),
      { u: 0, v: 0 },
    );
    return {
      id: obj.id,
      kind: obj.type,
      color: obj.color,
      top,
      bottom,
      zTop,
      zBottom,
      // painter order: back (small x) first, then low z
      depthKey: obj.pose.position[0] * 1000 + obj.pose.position[2],
      centroid,
    };
  });
  shapes.sort((a, b) => a.depthKey - b.depthKey);
  return { outline, shapes, scale: frame.scale };
}

const SIDE_DARKEN = 0.55;

function shade(color: string, factor: number): string {
  // known CSS color names pass through; sides use a translucent black overlay instead
  return factor >= 1 ? color : color;
}

export function renderScene(
  context: CanvasRenderingContext2D,
  model: SceneModel,
  viewport: Viewport,
  selectedId: number | null = null,
): void {
  context.clearRect(0, 0, viewport.width, viewport.height);
  context.save();

  // workspace outline
  context.beginPath();
  model.outline.forEach((p, i) => (i === 0 ? context.moveTo(p.u, p.v) : context.lineTo(p.u, p.v)));
  context.closePath();
  context.fillStyle = '#f4efe8';
  context.fill();
  context.strokeStyle = '#8a8177';
  context.lineWidth = 1.5;
  context.stroke();

  for (const shape of model.shapes) {
    const faces = shape.top.map((topPoint, index) => {
      const next = (index + 1) % shape.top.length;
      return [topPoint, shape.top[next], shape.bottom[next], shape.bottom[index]];
    });
    context.fillStyle = shade(shape.color, SIDE_DARKEN);
    context.globalAlpha = shape.kind === 'zone' ? 0.35 : 1.0;
    for (const face of faces) {
      context.beginPath();
      face.forEach((p, i) => (i === 0 ? context.moveTo(p.u, p.v) : context.lineTo(p.u, p.v)));
      context.closePath();
      context.fill();
      context.globalAlpha = shape.kind === 'zone' ? 0.35 : 0.25;
      context.fillStyle = '#000';
      context.fill();
      context.globalAlpha = shape.kind === 'zone' ? 0.35 : 1.0;
      context.fillStyle = shade(shape.color, SIDE_DARKEN);
    }
    // top face
    context.beginPath();
    shape.top.forEach((p, i) => (i === 0 ? context.moveTo(p.u, p.v) : context.lineTo(p.u, p.v)));
    context.closePath();
    context.fillStyle = shape.color;
    context.fill();
    context.strokeStyle = shape.id === selectedId ? '#111' : 'rgba(0,0,0,0.35)';
    context.lineWidth = shape.id === selectedId ? 2.5 : 1;
    context.stroke();
  }
  context.restore();
}

export function shapeAt(model: SceneModel, u: number, v: number): SceneShape | null {
  // nearest-front hit: walk shapes front-to-back, point-in-top-polygon test
  for (let index = model.shapes.length - 1; index >= 0; index -= 1) {
    const shape = model.shapes[index];
    if (pointInPolygon(shape.top, u, v)) return shape;
  }
  return null;
}

function pointInPolygon(poly: ScreenPoint[], u: number, v: number): boolean {
  let inside = false;
  for (let i = 0, j = poly.length - 1; i < poly.length; j = i, i += 1) {
    const a = poly[i];
    const b = poly[j];
    if (a.v > v !== b.v > v && u < ((b.u - a.u) * (v - a.v)) / (b.v - a.v) + a.u) {
      inside = !inside;
    }
  }
  return inside;
}

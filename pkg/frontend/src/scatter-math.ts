// Geometry helpers for the projection canvas, kept free of DOM access so the
// level-of-detail and hit-testing rules are unit-testable.

export interface Pt {
  id: string;
  x: number;
  y: number;
}

export interface Transform {
  scale: number;
  tx: number;
  ty: number;
}

export function fitTransform(
  points: Pt[],
  width: number,
  height: number,
  margin = 24,
): Transform {
  if (points.length === 0) return { scale: 1, tx: width / 2, ty: height / 2 };
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    if (p.x < minX) minX = p.x;
    if (p.x > maxX) maxX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.y > maxY) maxY = p.y;
  }
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const span = Math.max(spanX, spanY);
  const scale = span > 0 ? (Math.min(width, height) - 2 * margin) / span : 1;
  // Center the data box in the viewport.
  const tx = width / 2 - scale * (minX + spanX / 2);
  const ty = height / 2 - scale * (minY + spanY / 2);
  return { scale, tx, ty };
}

/** Re-center an existing fit on one point without changing the zoom. */
export function centerOn(t: Transform, point: Pt, width: number, height: number): Transform {
  return {
    scale: t.scale,
    tx: width / 2 - t.scale * point.x,
    ty: height / 2 - t.scale * point.y,
  };
}

export function toScreen(p: Pt, t: Transform): [number, number] {
  return [t.scale * p.x + t.tx, t.scale * p.y + t.ty];
}

/**
 * Deterministic grid thinning: at most one point per grid cell, first in
 * input order wins, so large corpora stay interactive. Points whose id is in
 * `keep` (selected or highlighted) are always retained.
 */
export function thin(points: Pt[], keep: Set<string>, maxVisible: number): Pt[] {
  if (points.length <= maxVisible) return points.slice();
  const side = Math.max(1, Math.floor(Math.sqrt(maxVisible)));
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    if (p.x < minX) minX = p.x;
    if (p.x > maxX) maxX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.y > maxY) maxY = p.y;
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const taken = new Set<number>();
  const visible: Pt[] = [];
  const kept = new Set<string>();
  for (const p of points) {
    if (keep.has(p.id)) {
      visible.push(p);
      kept.add(p.id);
      continue;
    }
    const cx = Math.min(side - 1, Math.floor(((p.x - minX) / spanX) * side));
    const cy = Math.min(side - 1, Math.floor(((p.y - minY) / spanY) * side));
    const cell = cx * side + cy;
    if (!taken.has(cell)) {
      taken.add(cell);
      visible.push(p);
      kept.add(p.id);
    }
  }
  return visible;
}

/** Closest point within `radius` screen pixels of (sx, sy), or null. */
export function nearest(
  points: Pt[],
  t: Transform,
  sx: number,
  sy: number,
  radius = 8,
): Pt | null {
  let best: Pt | null = null;
  let bestD2 = radius * radius;
  for (const p of points) {
    const [px, py] = toScreen(p, t);
    const d2 = (px - sx) * (px - sx) + (py - sy) * (py - sy);
    if (d2 <= bestD2) {
      bestD2 = d2;
      best = p;
    }
  }
  return best;
}

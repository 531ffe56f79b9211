// Data shaping for the meta view's bar charts; counts come straight from
// /meta and are never recomputed here.

export interface BarRow {
  label: string;
  count: number;
}

export function yearRows(byYear: Record<string, number>): BarRow[] {
  return Object.entries(byYear)
    .map(([label, count]) => ({ label, count }))
    .sort((a, b) => Number(a.label) - Number(b.label));
}

export function topRows(counts: Record<string, number>, limit: number): BarRow[] {
  return Object.entries(counts)
    .map(([label, count]) => ({ label, count }))
    .sort((a, b) => b.count - a.count || a.label.localeCompare(b.label))
    .slice(0, limit);
}

export function barWidthPct(count: number, max: number): number {
  if (max <= 0) return 0;
  return Math.max(1, Math.round((count / max) * 100));
}

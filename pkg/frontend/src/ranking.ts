// Pure list-state helpers for the re-rank panel. Reordering must be
// lossless: every operation returns a permutation of its input.

export const TOP_BAND = 10;

export function moveItem<T>(list: readonly T[], from: number, to: number): T[] {
  if (from < 0 || from >= list.length || to < 0 || to >= list.length) {
    return [...list];
  }
  const out = [...list];
  const [item] = out.splice(from, 1);
  out.splice(to, 0, item);
  return out;
}

export function moveToTop<T>(list: readonly T[], index: number): T[] {
  return moveItem(list, index, 0);
}

export function isPermutationOf(a: readonly string[], b: readonly string[]): boolean {
  if (a.length !== b.length) return false;
  const counts = new Map<string, number>();
  for (const x of a) counts.set(x, (counts.get(x) ?? 0) + 1);
  for (const y of b) {
    const c = counts.get(y);
    if (!c) return false;
    counts.set(y, c - 1);
  }
  return true;
}

export function inTopBand(index: number, band = TOP_BAND): boolean {
  return index < band;
}

/** Indices whose membership in the top band changed between two orders. */
export function bandChanges(
  before: readonly string[],
  after: readonly string[],
  band = TOP_BAND,
): string[] {
  const was = new Set(before.slice(0, band));
  const now = new Set(after.slice(0, band));
  const changed: string[] = [];
  for (const id of now) if (!was.has(id)) changed.push(id);
  for (const id of was) if (!now.has(id)) changed.push(id);
  return changed.sort();
}

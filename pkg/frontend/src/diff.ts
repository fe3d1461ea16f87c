// Side-by-side line diff for skill version sources (LCS-based).

export type DiffKind = 'same' | 'add' | 'del';

export interface DiffRow {
  kind: DiffKind;
  left: string | null;
  right: string | null;
}

export function diffLines(before: string, after: string): DiffRow[] {
  const a = before.split('\n');
  const b = after.split('\n');
  // trailing newline produces one empty trailing element on both sides; drop it
  if (a[a.length - 1] === '') a.pop();
  if (b[b.length - 1] === '') b.pop();

  const n = a.length;
  const m = b.length;
  const lcs: number[][] = Array.from({ length: n + 1 }, () => new Array<number>(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i -= 1) {
    for (let j = m - 1; j >= 0; j -= 1) {
      lcs[i][j] = a[i] === b[j] ? lcs[i + 1][j + 1] + 1 : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  const rows: DiffRow[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j]) {
      rows.push({ kind: 'same', left: a[i], right: b[j] });
      i += 1;
      j += 1;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      rows.push({ kind: 'del', left: a[i], right: null });
      i += 1;
    } else {
      rows.push({ kind: 'add', left: null, right: b[j] });
      j += 1;
    }
  }
  while (i < n) {
    rows.push({ kind: 'del', left: a[i], right: null });
    i += 1;
  }
  while (j < m) {
    rows.push({ kind: 'add', left: null, right: b[j] });
    j += 1;
  }
  return rows;
}

export function changedRowCount(rows: DiffRow[]): number {
  return rows.filter((row) => row.kind !== 'same').length;
}

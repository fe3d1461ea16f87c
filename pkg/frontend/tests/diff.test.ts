import { describe, expect, it } from 'vitest';

import { changedRowCount, diffLines } from '../src/diff.js';

describe('diffLines', () => {
  it('reports identical sources as all-same rows', () => {
    const source = 'skill a() doc "x" {\n    let y = 1\n}\n';
    const rows = diffLines(source, source);
    expect(rows.every((row) => row.kind === 'same')).toBe(true);
    expect(changedRowCount(rows)).toBe(0);
  });

  it('highlights exactly one changed constant as one del plus one add', () => {
    const before = 'skill s() doc "d" {\n    let gap = 0.005\n    s2()\n}\n';
    const after = 'skill s() doc "d" {\n    let gap = 0.01\n    s2()\n}\n';
    const rows = diffLines(before, after);
    const changed = rows.filter((row) => row.kind !== 'same');
    expect(changed).toHaveLength(2);
    expect(changed[0]).toEqual({ kind: 'del', left: '    let gap = 0.005', right: null });
    expect(changed[1]).toEqual({ kind: 'add', left: null, right: '    let gap = 0.01' });
  });

  it('reports pure insertions', () => {
    const before = 'a\nb\n';
    const after = 'a\nmiddle\nb\n';
    const rows = diffLines(before, after);
    expect(rows.map((r) => r.kind)).toEqual(['same', 'add', 'same']);
  });

  it('reports pure deletions', () => {
    const rows = diffLines('a\nb\nc\n', 'a\nc\n');
    expect(rows.map((r) => r.kind)).toEqual(['same', 'del', 'same']);
  });

  it('handles empty against nonempty', () => {
    const rows = diffLines('', 'one\ntwo\n');
    expect(rows.map((r) => r.kind)).toEqual(['add', 'add']);
  });
});

import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterAll, describe, expect, it } from 'vitest';

import {
  formatReport,
  hitsAtK,
  meanReciprocalRank,
  rankTargets,
  readCheckpoint,
  similarityFromEmbeddings,
  writeCheckpoint,
} from '../src/report.js';
import type { RankingReport } from '../src/report.js';

const tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), 'selfprop-report-'));
afterAll(() => {
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

describe('similarityFromEmbeddings', () => {
  it('scores are negative squared distances, by hand', () => {
    const source = Float64Array.from([0, 0, 1, 1]);
    const target = Float64Array.from([1, 0, 3, 4]);
    const scores = similarityFromEmbeddings(source, target, 2, 2, 2);
    // (0,0)->(1,0): 1; (0,0)->(3,4): 25; (1,1)->(1,0): 1; (1,1)->(3,4): 13
    expect(Array.from(scores)).toEqual([-1, -25, -1, -13]);
  });

  it('rejects mismatched table lengths', () => {
    expect(() => similarityFromEmbeddings(new Float64Array(3), new Float64Array(4), 2, 2, 2)).toThrow(
      /source table has length 3/,
    );
    expect(() => similarityFromEmbeddings(new Float64Array(4), new Float64Array(3), 2, 2, 2)).toThrow(
      /target table has length 3/,
    );
  });
});

describe('rankTargets', () => {
  // Two sources, four targets.
  const scores = Float64Array.from([
    5, 5, 3, 5,
    1, 2, 3, 4,
  ]);

  it('ranks with deterministic tie handling: ties break toward smaller ids', () => {
    const report = rankTargets(scores, 4, [[0, 1]], [0, 1, 2, 3], 3);
    expect(report.numCandidates).toBe(4);
    const row = report.rows[0]!;
    // Target 1 scores 5; no candidate is strictly higher; one tied candidate
    // (id 0) has a smaller id, so the rank is 2.
    expect(row.rank).toBe(2);
    expect(row.topTargets).toEqual([0, 1, 3]);
  });

  it('rank 1 when the true target is the unique maximum', () => {
    const report = rankTargets(scores, 4, [[1, 3]], [0, 1, 2, 3]);
    expect(report.rows[0]!.rank).toBe(1);
    expect(report.rows[0]!.topTargets).toEqual([3, 2, 1, 0]);
  });

  it('defaults the candidate pool to the distinct test targets', () => {
    const report = rankTargets(scores, 4, [
      [0, 1],
      [1, 2],
      [1, 1],
    ]);
    expect(report.numCandidates).toBe(2);
    // Pool {1, 2}: row 0 scores (5, 3), true target 1 ranks 1.
    expect(report.rows[0]!.rank).toBe(1);
    // Row 1 scores (2, 3), true target 2 ranks 1, target 1 ranks 2.
    expect(report.rows[1]!.rank).toBe(1);
    expect(report.rows[2]!.rank).toBe(2);
  });

  it('rejects bad inputs with specific messages', () => {
    expect(() => rankTargets(scores, 4, [])).toThrow(/no test pairs to rank/);
    expect(() => rankTargets(scores, 4, [[0, 1]], [0, 9])).toThrow(
      /candidate id 9 outside the 4 target columns/,
    );
    expect(() => rankTargets(scores, 4, [[7, 1]], [0, 1])).toThrow(
      /source id 7 outside similarity matrix/,
    );
    expect(() => rankTargets(scores, 4, [[0, 1]], [0, 2])).toThrow(
      /true target 1 is not in the candidate pool/,
    );
  });
});

describe('metrics', () => {
  it('hitsAtK by hand', () => {
    expect(hitsAtK([1, 2, 11], 1)).toBeCloseTo(1 / 3, 12);
    expect(hitsAtK([1, 2, 11], 10)).toBeCloseTo(2 / 3, 12);
    expect(hitsAtK([1, 1, 1], 1)).toBe(1);
    expect(() => hitsAtK([], 1)).toThrow(/empty rank list/);
  });

  it('meanReciprocalRank by hand', () => {
    expect(meanReciprocalRank([1])).toBe(1);
    expect(meanReciprocalRank([1, 2, 4])).toBeCloseTo(7 / 12, 12);
    expect(() => meanReciprocalRank([])).toThrow(/empty rank list/);
  });
});

describe('formatReport', () => {
  it('renders the exact text layout', () => {
    const report: RankingReport = {
      rows: [{ source: 0, trueTarget: 1, rank: 2, topTargets: [0, 1] }],
      numCandidates: 2,
    };
    const text = formatReport(report, ['s0'], ['t0', 't1']);
    expect(text).toBe(
      '# hits@1\t0.000000\n' +
        '# hits@10\t1.000000\n' +
        '# mrr\t0.500000\n' +
        '# pairs\t1\n' +
        '# candidates\t2\n' +
        's0\tt1\t2\tt0,t1\n',
    );
  });

  it('appends extra metrics in sorted key order', () => {
    const report: RankingReport = {
      rows: [{ source: 0, trueTarget: 0, rank: 1, topTargets: [0] }],
      numCandidates: 1,
    };
    const text = formatReport(report, ['a'], ['b'], {
      checkpoint_iteration: 5,
      alpha: '0.1',
    });
    const lines = text.split('\n');
    expect(lines[5]).toBe('# alpha\t0.1');
    expect(lines[6]).toBe('# checkpoint_iteration\t5');
    expect(lines[7]).toBe('a\tb\t1\tb');
  });
});

describe('checkpoint I/O', () => {
  it('round-trips values and header fields through the binary format', () => {
    const file = path.join(tmpDir, 'roundtrip.omega');
    const values = Float64Array.from([1.5, -2.25, 0.03375, 100]);
    writeCheckpoint(file, values, 2, 2, 3, 7);
    const ck = readCheckpoint(file);
    expect(ck.rows).toBe(2);
    expect(ck.cols).toBe(2);
    expect(ck.blockHeight).toBe(3);
    expect(ck.iteration).toBe(7);
    expect(Array.from(ck.values)).toEqual(Array.from(values, (x) => Math.fround(x)));
  });

  it('writes the documented byte layout', () => {
    const file = path.join(tmpDir, 'layout.omega');
    writeCheckpoint(file, Float64Array.from([1, 2]), 1, 2, 4, 9);
    const buf = fs.readFileSync(file);
    expect(buf.length).toBe(16 + 8);
    expect(buf.readInt32LE(0)).toBe(1);
    expect(buf.readInt32LE(4)).toBe(2);
    expect(buf.readInt32LE(8)).toBe(4);
    expect(buf.readInt32LE(12)).toBe(9);
    expect(buf.readFloatLE(16)).toBe(1);
    expect(buf.readFloatLE(20)).toBe(2);
  });

  it('rejects a value count that does not fill the matrix', () => {
    const file = path.join(tmpDir, 'bad-write.omega');
    expect(() => writeCheckpoint(file, new Float64Array(3), 2, 2)).toThrow(
      /3 cells do not fill a 2x2 matrix/,
    );
  });

  it('rejects truncated, corrupt, and mis-sized files', () => {
    const truncated = path.join(tmpDir, 'truncated.omega');
    fs.writeFileSync(truncated, Buffer.alloc(8));
    expect(() => readCheckpoint(truncated)).toThrow(/truncated checkpoint header/);

    const corrupt = path.join(tmpDir, 'corrupt.omega');
    const header = Buffer.alloc(16);
    header.writeInt32LE(-1, 0);
    header.writeInt32LE(2, 4);
    header.writeInt32LE(1, 8);
    header.writeInt32LE(0, 12);
    fs.writeFileSync(corrupt, header);
    expect(() => readCheckpoint(corrupt)).toThrow(/corrupt checkpoint header/);

    const short = path.join(tmpDir, 'short.omega');
    const good = Buffer.alloc(16 + 4);
    good.writeInt32LE(1, 0);
    good.writeInt32LE(2, 4);
    good.writeInt32LE(1, 8);
    good.writeInt32LE(0, 12);
    fs.writeFileSync(short, good);
    expect(() => readCheckpoint(short)).toThrow(/checkpoint is 20 bytes, expected 24/);
  });
});

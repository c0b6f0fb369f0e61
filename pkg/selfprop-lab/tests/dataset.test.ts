import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterAll, describe, expect, it } from 'vitest';

import {
  buildGraph,
  degree,
  hasIsolatedEntities,
  loadDbp15k,
  loadOpenea,
  readRows,
} from '../src/dataset.js';
import { FIXTURE_DIR, fixturePair } from './helpers.js';

const tmpDirs: string[] = [];

function tmpDir(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'selfprop-dataset-'));
  tmpDirs.push(dir);
  return dir;
}

afterAll(() => {
  for (const dir of tmpDirs) {
    fs.rmSync(dir, { recursive: true, force: true });
  }
});

describe('readRows', () => {
  it('splits tab-separated lines and skips blanks', () => {
    const dir = tmpDir();
    const file = path.join(dir, 'rows');
    fs.writeFileSync(file, 'a\tb\n\nc\td\r\n');
    expect(readRows(file, 2)).toEqual([
      ['a', 'b'],
      ['c', 'd'],
    ]);
  });

  it('reports the file and line on a field-count mismatch', () => {
    const dir = tmpDir();
    const file = path.join(dir, 'rows');
    fs.writeFileSync(file, 'a\tb\na\tb\tc\n');
    expect(() => readRows(file, 2)).toThrow(/rows:2: expected 2 tab-separated fields, got 3/);
  });
});

describe('buildGraph', () => {
  it('interns entities in first-occurrence order, subject before object', () => {
    const g = buildGraph([
      ['x', 'r', 'y'],
      ['z', 'r', 'x'],
    ]);
    expect(g.entityLabels).toEqual(['x', 'y', 'z']);
    expect(g.labelIds.get('z')).toBe(2);
  });

  it('neighbor sets are symmetric, deduped, and ascending', () => {
    const g = buildGraph([
      ['a', 'r', 'b'],
      ['a', 's', 'b'],
      ['c', 'r', 'a'],
    ]);
    // a=0, b=1, c=2; a neighbors {b, c}, b neighbors {a}, c neighbors {a}.
    expect(Array.from(g.neighborIds.slice(g.neighborPtr[0]!, g.neighborPtr[1]!))).toEqual([1, 2]);
    expect(Array.from(g.neighborIds.slice(g.neighborPtr[1]!, g.neighborPtr[2]!))).toEqual([0]);
    expect(degree(g, 0)).toBe(2);
  });

  it('drops exact duplicate triples but keeps distinct relations', () => {
    const g = buildGraph([
      ['a', 'r', 'b'],
      ['a', 'r', 'b'],
      ['a', 's', 'b'],
    ]);
    expect(g.numTriples).toBe(4);
  });

  it('a self-loop makes an entity its own neighbor', () => {
    const g = buildGraph([['a', 'r', 'a']]);
    expect(Array.from(g.neighborIds)).toEqual([0]);
  });

  it('extra entities intern after triple entities with empty neighborhoods', () => {
    const g = buildGraph([['a', 'r', 'b']], ['lonely']);
    expect(g.entityLabels).toEqual(['a', 'b', 'lonely']);
    expect(degree(g, 2)).toBe(0);
    expect(hasIsolatedEntities(g)).toBe(true);
  });

  it('rejects an empty triple list', () => {
    expect(() => buildGraph([])).toThrow(/no triples/);
  });
});

describe('loadOpenea', () => {
  it('loads the fixture with the expected split sizes', () => {
    const pair = fixturePair();
    expect(pair.source.numEntities).toBe(30);
    expect(pair.target.numEntities).toBe(30);
    expect(pair.seedPairs.length).toBe(6);
    expect(pair.validPairs.length).toBe(3);
    expect(pair.testPairs.length).toBe(21);
    expect(hasIsolatedEntities(pair.source)).toBe(false);
    expect(hasIsolatedEntities(pair.target)).toBe(false);
  });

  it('splits cover each entity once across seed, valid, and test', () => {
    const pair = fixturePair();
    const sources = [...pair.seedPairs, ...pair.validPairs, ...pair.testPairs].map(([s]) => s);
    expect(new Set(sources).size).toBe(30);
  });

  it('rejects a link whose label is not in the graph', () => {
    const dir = tmpDir();
    fs.writeFileSync(path.join(dir, 'rel_triples_1'), 'a\tr\tb\n');
    fs.writeFileSync(path.join(dir, 'rel_triples_2'), 'x\tr\ty\n');
    fs.writeFileSync(path.join(dir, 'ent_links'), 'a\tx\n');
    const foldDir = path.join(dir, '721_5fold', '1');
    fs.mkdirSync(foldDir, { recursive: true });
    fs.writeFileSync(path.join(foldDir, 'train_links'), 'a\tx\n');
    fs.writeFileSync(path.join(foldDir, 'test_links'), 'b\tmissing\n');
    expect(() => loadOpenea(dir)).toThrow(/unknown entity label "missing"/);
  });

  it('rejects an entity repeated across splits', () => {
    const dir = tmpDir();
    fs.writeFileSync(path.join(dir, 'rel_triples_1'), 'a\tr\tb\n');
    fs.writeFileSync(path.join(dir, 'rel_triples_2'), 'x\tr\ty\n');
    fs.writeFileSync(path.join(dir, 'ent_links'), 'a\tx\nb\ty\n');
    const foldDir = path.join(dir, '721_5fold', '1');
    fs.mkdirSync(foldDir, { recursive: true });
    fs.writeFileSync(path.join(foldDir, 'train_links'), 'a\tx\n');
    fs.writeFileSync(path.join(foldDir, 'test_links'), 'a\ty\n');
    expect(() => loadOpenea(dir)).toThrow(/already present in 'seed' split/);
  });

  it('entities appearing only in ent_links are appended as isolated extras', () => {
    const dir = tmpDir();
    fs.writeFileSync(path.join(dir, 'rel_triples_1'), 'a\tr\tb\n');
    fs.writeFileSync(path.join(dir, 'rel_triples_2'), 'x\tr\ty\n');
    fs.writeFileSync(path.join(dir, 'ent_links'), 'a\tx\nghost\ty\n');
    const foldDir = path.join(dir, '721_5fold', '1');
    fs.mkdirSync(foldDir, { recursive: true });
    fs.writeFileSync(path.join(foldDir, 'train_links'), 'a\tx\n');
    fs.writeFileSync(path.join(foldDir, 'test_links'), 'ghost\ty\n');
    const pair = loadOpenea(dir);
    expect(pair.source.entityLabels).toEqual(['a', 'b', 'ghost']);
    expect(degree(pair.source, 2)).toBe(0);
  });
});

describe('loadDbp15k', () => {
  function writeDbp15k(dir: string, withFixedSplit: boolean): void {
    fs.writeFileSync(path.join(dir, 'ent_ids_1'), '10\ta\n11\tb\n12\tc\n');
    fs.writeFileSync(path.join(dir, 'ent_ids_2'), '20\tx\n21\ty\n22\tz\n');
    fs.writeFileSync(path.join(dir, 'rel_ids_1'), '5\tr\n');
    fs.writeFileSync(path.join(dir, 'rel_ids_2'), '6\tr\n');
    fs.writeFileSync(path.join(dir, 'triples_1'), '10\t5\t11\n11\t5\t12\n');
    fs.writeFileSync(path.join(dir, 'triples_2'), '20\t6\t21\n21\t6\t22\n');
    if (withFixedSplit) {
      fs.writeFileSync(path.join(dir, 'sup_ent_ids'), '10\t20\n');
      fs.writeFileSync(path.join(dir, 'ref_ent_ids'), '11\t21\n12\t22\n');
    } else {
      fs.writeFileSync(path.join(dir, 'ill_ent_ids'), '10\t20\n11\t21\n12\t22\n');
    }
  }

  it('maps id triples through the label files and uses the fixed split', () => {
    const dir = tmpDir();
    writeDbp15k(dir, true);
    const pair = loadDbp15k(dir);
    expect(pair.source.entityLabels).toEqual(['a', 'b', 'c']);
    expect(pair.target.entityLabels).toEqual(['x', 'y', 'z']);
    expect(pair.seedPairs).toEqual([[0, 0]]);
    expect(pair.testPairs).toEqual([
      [1, 1],
      [2, 2],
    ]);
  });

  it('falls back to splitting ill_ent_ids in file order with ceil(0.3 N) seeds', () => {
    const dir = tmpDir();
    writeDbp15k(dir, false);
    const pair = loadDbp15k(dir);
    expect(pair.seedPairs).toEqual([[0, 0]]);
    expect(pair.testPairs).toEqual([
      [1, 1],
      [2, 2],
    ]);
  });

  it('rejects an unmapped entity id', () => {
    const dir = tmpDir();
    writeDbp15k(dir, true);
    fs.writeFileSync(path.join(dir, 'triples_1'), '10\t5\t99\n');
    expect(() => loadDbp15k(dir)).toThrow(/unmapped entity id "99"/);
  });
});

describe('fixture path', () => {
  it('resolves to the repo fixture', () => {
    expect(fs.existsSync(path.join(FIXTURE_DIR, 'rel_triples_1'))).toBe(true);
  });
});

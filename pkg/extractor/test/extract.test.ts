import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";

import { roisForWord } from "../src/annotations.js";
import { ExtractionSpec, runExtraction } from "../src/extract.js";

const NOUNS = ["dog", "cat", "cup", "tree", "ball"];
const VERBS = ["run", "jump", "hold", "throw", "sit"];

function toyAnnotations() {
  const images = [];
  for (let i = 0; i < 3; i++) {
    images.push({
      id: `img${i}`,
      width: 100,
      height: 100,
      objects: NOUNS.map((name, j) => ({
        name,
        box: [5 * j + i, 10 + i, 5 * j + 20 + i, 40 + i],
      })),
      relationships: VERBS.map((predicate, j) => ({
        predicate,
        participants: [
          [j + i, 0, j + i + 15, 15],
          [j + 30, 30, j + 55, 60],
        ],
      })),
    });
  }
  // one degenerate region that must be skipped with a log entry
  images[0].objects.push({ name: "dog", box: [50, 50, 50, 80] });
  return { images };
}

function toyCorpus(): string {
  const lines: string[] = [];
  const all = [...NOUNS, ...VERBS];
  for (let d = 0; d < 6; d++) {
    const filler = Array.from({ length: 40 }, (_, i) => `tok${d}_${i}`);
    const doc = [...filler];
    for (const w of all) doc.splice((d * 7 + w.length) % doc.length, 0, w);
    lines.push(doc.join(" "));
  }
  // make "run" very frequent to exercise the sampling cap
  lines.push(Array.from({ length: 30 }, () => "run and").join(" "));
  return lines.join("\n") + "\n";
}

function writeToy(dir: string): ExtractionSpec {
  fs.writeFileSync(path.join(dir, "annotations.json"), JSON.stringify(toyAnnotations()));
  fs.writeFileSync(path.join(dir, "corpus.txt"), toyCorpus());
  return {
    name: "toy-10",
    words: [
      ...NOUNS.map((word) => ({ word, type: "noun" as const })),
      ...VERBS.map((word) => ({ word, type: "verb" as const })),
    ],
    annotationsPath: path.join(dir, "annotations.json"),
    corpusPath: path.join(dir, "corpus.txt"),
    windowHalfWidth: 25,
    maxVisualPerWord: 3,
    maxLinguisticPerWord: 5,
    dimVisual: 12,
    dimLinguistic: 8,
    outManifest: path.join(dir, "manifest.json"),
    outEmbeddings: path.join(dir, "embeddings.jsonl"),
    outLog: path.join(dir, "extraction.log"),
  };
}

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "lexalign-extract-"));
}

test("verb ROIs are participant-box unions, noun ROIs are object boxes", () => {
  const images = toyAnnotations().images as any;
  const dog = roisForWord(images, "dog", "noun");
  assert.deepEqual(dog.rois[0].box, [0, 10, 20, 40]);
  assert.equal(dog.skipped.length, 1); // the degenerate box
  const run = roisForWord(images, "run", "verb");
  assert.deepEqual(run.rois[0].box, [0, 0, 55, 60]); // union of both participants
});

test("toy extraction passes the engine's validate command", () => {
  const dir = tmpdir();
  const spec = writeToy(dir);
  const summary = runExtraction(spec, 7n);
  assert.equal(summary.emittedWords.length, 10);
  assert.equal(summary.droppedWords.length, 0);

  const proc = spawnSync(
    "python3",
    ["-m", "lexalign.cli", "validate", "--manifest", spec.outManifest, "--embeddings", spec.outEmbeddings, "--json"],
    { encoding: "utf-8" },
  );
  assert.equal(proc.status, 0, `validate failed: ${proc.stdout} ${proc.stderr}`);
  const report = JSON.parse(proc.stdout);
  assert.equal(report.ok, true);
  assert.deepEqual(report.issues, []);
});

test("extraction is deterministic in (corpus, seed) and respects caps", () => {
  const dirA = tmpdir();
  const dirB = tmpdir();
  const a = writeToy(dirA);
  const b = writeToy(dirB);
  runExtraction(a, 99n);
  runExtraction(b, 99n);
  assert.equal(
    fs.readFileSync(a.outEmbeddings, "utf-8"),
    fs.readFileSync(b.outEmbeddings, "utf-8"),
  );
  assert.equal(
    fs.readFileSync(a.outManifest, "utf-8"),
    fs.readFileSync(b.outManifest, "utf-8"),
  );
  const manifest = JSON.parse(fs.readFileSync(a.outManifest, "utf-8"));
  const run = manifest.words.find((w: any) => w.word === "run");
  assert.equal(run.n_linguistic, 5); // capped despite 30+ occurrences
  for (const w of manifest.words) {
    assert.ok(w.n_visual >= 1 && w.n_visual <= 3);
    assert.ok(w.n_linguistic >= 1 && w.n_linguistic <= 5);
  }
  // different seed, different subsample of the frequent word
  const dirC = tmpdir();
  const c = writeToy(dirC);
  runExtraction(c, 100n);
  assert.notEqual(
    fs.readFileSync(a.outEmbeddings, "utf-8"),
    fs.readFileSync(c.outEmbeddings, "utf-8"),
  );
});

test("dense indices per word and modality", () => {
  const dir = tmpdir();
  const spec = writeToy(dir);
  runExtraction(spec, 1n);
  const seen = new Map<string, number[]>();
  for (const line of fs.readFileSync(spec.outEmbeddings, "utf-8").trim().split("\n")) {
    const rec = JSON.parse(line);
    const key = `${rec.word}|${rec.modality}`;
    const arr = seen.get(key) ?? [];
    arr.push(rec.index);
    seen.set(key, arr);
    assert.equal(
      rec.vector.length,
      rec.modality === "visual" ? spec.dimVisual : spec.dimLinguistic,
    );
  }
  for (const [, indices] of seen) {
    assert.deepEqual(indices, Array.from({ length: indices.length }, (_, i) => i));
  }
});

test("words missing from the corpus are dropped and logged", () => {
  const dir = tmpdir();
  const spec = writeToy(dir);
  spec.words = [...spec.words, { word: "zebra", type: "noun" }];
  const withZebra = toyAnnotations();
  (withZebra.images[0].objects as any).push({ name: "zebra", box: [0, 0, 9, 9] });
  fs.writeFileSync(spec.annotationsPath, JSON.stringify(withZebra));
  const summary = runExtraction(spec, 5n);
  assert.deepEqual(summary.droppedWords, ["zebra"]);
  const log = fs.readFileSync(spec.outLog!, "utf-8");
  assert.match(log, /zebra\tdropped: absent from corpus/);
  const manifest = JSON.parse(fs.readFileSync(spec.outManifest, "utf-8"));
  assert.equal(manifest.words.length, 10);
});

test("spec validation rejects bad configurations", () => {
  const dir = tmpdir();
  const spec = writeToy(dir);
  assert.throws(() => runExtraction({ ...spec, windowHalfWidth: 1 }, 0n), /half-width/);
  assert.throws(() => runExtraction({ ...spec, maxVisualPerWord: 0 }, 0n), /caps/);
  assert.throws(
    () => runExtraction({ ...spec, words: [spec.words[0], spec.words[0]] }, 0n),
    /duplicate/,
  );
});

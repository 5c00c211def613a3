/**
 * End-to-end extraction: annotated images + text corpus in, the engine's
 * manifest.json + embeddings.jsonl out.  Occurrences and regions beyond the
 * per-word caps are subsampled uniformly without replacement from per-word
 * seed streams; records are written ordered by (word, modality, index) so a
 * given corpus snapshot and seed always produce identical files.
 */

import * as fs from "node:fs";

import { AnnotatedImage, roisForWord } from "./annotations.js";
import { HashTextEncoder, HashVisualEncoder, TextEncoder, VisualEncoder } from "./encoders.js";
import { mix, sampleWithoutReplacement } from "./rng.js";
import { contextWindow, findOccurrences, tokenize } from "./windowing.js";

export interface WordSpec {
  word: string;
  type: "noun" | "verb";
}

export interface ExtractionSpec {
  name: string;
  words: WordSpec[];
  annotationsPath: string;
  corpusPath: string;
  windowHalfWidth: number; // default 25: a 51-word window
  maxVisualPerWord: number;
  maxLinguisticPerWord: number;
  dimVisual: number;
  dimLinguistic: number;
  outManifest: string;
  outEmbeddings: string;
  outLog?: string;
}

export interface ExtractionSummary {
  emittedWords: string[];
  droppedWords: string[];
  logLines: string[];
}

const STREAM_VISUAL = 0;
const STREAM_LINGUISTIC = 1;

interface EmbeddingRecord {
  word: string;
  modality: "visual" | "linguistic";
  index: number;
  vector: number[];
}

export function validateSpec(spec: ExtractionSpec): void {
  if (spec.windowHalfWidth < 2) throw new Error("window half-width must be >= 2");
  if (spec.maxVisualPerWord < 1 || spec.maxLinguisticPerWord < 1) {
    throw new Error("per-word exemplar caps must be >= 1");
  }
  if (spec.words.length < 2) throw new Error("need at least 2 words");
  const seen = new Set<string>();
  for (const w of spec.words) {
    if (seen.has(w.word)) throw new Error(`duplicate word ${w.word}`);
    seen.add(w.word);
    if (w.type !== "noun" && w.type !== "verb") {
      throw new Error(`word ${w.word}: type must be noun or verb`);
    }
  }
}

export function loadAnnotations(path: string): AnnotatedImage[] {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  return doc.images as AnnotatedImage[];
}

/** One document per line. */
export function loadCorpus(path: string): string[][] {
  return fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map(tokenize);
}

export function runExtraction(
  spec: ExtractionSpec,
  seed: bigint,
  visualEncoder?: VisualEncoder,
  textEncoder?: TextEncoder,
): ExtractionSummary {
  validateSpec(spec);
  const venc = visualEncoder ?? new HashVisualEncoder(spec.dimVisual, mix(seed, 101));
  const tenc = textEncoder ?? new HashTextEncoder(spec.dimLinguistic, mix(seed, 102));
  if (venc.dim !== spec.dimVisual || tenc.dim !== spec.dimLinguistic) {
    throw new Error("encoder dimensions disagree with the spec");
  }
  const images = loadAnnotations(spec.annotationsPath);
  const documents = loadCorpus(spec.corpusPath);

  const log: string[] = [];
  const records: EmbeddingRecord[] = [];
  const emitted: WordSpec[] = [];
  const dropped: string[] = [];

  for (let w = 0; w < spec.words.length; w++) {
    const { word, type } = spec.words[w];

    const { rois, skipped } = roisForWord(images, word, type);
    log.push(...skipped);
    let chosenRois = rois;
    if (rois.length > spec.maxVisualPerWord) {
      const pick = sampleWithoutReplacement(mix(seed, w, STREAM_VISUAL), rois.length, spec.maxVisualPerWord);
      chosenRois = pick.map((i) => rois[i]);
    }

    const occurrences: Array<{ doc: number; pos: number }> = [];
    documents.forEach((tokens, d) => {
      for (const pos of findOccurrences(tokens, word)) occurrences.push({ doc: d, pos });
    });
    let chosenOcc = occurrences;
    if (occurrences.length > spec.maxLinguisticPerWord) {
      const pick = sampleWithoutReplacement(
        mix(seed, w, STREAM_LINGUISTIC),
        occurrences.length,
        spec.maxLinguisticPerWord,
      );
      chosenOcc = pick.map((i) => occurrences[i]);
    }

    if (chosenRois.length === 0 || chosenOcc.length === 0) {
      const why = chosenRois.length === 0 ? "no usable image regions" : "absent from corpus";
      log.push(`${word}\tdropped: ${why}`);
      dropped.push(word);
      continue;
    }

    chosenRois.forEach((roi, index) => {
      records.push({
        word,
        modality: "visual",
        index,
        vector: venc.encodeRegion(roi.imageId, roi.box),
      });
    });
    chosenOcc.forEach(({ doc, pos }, index) => {
      const win = contextWindow(documents[doc], pos, spec.windowHalfWidth);
      records.push({
        word,
        modality: "linguistic",
        index,
        vector: tenc.encodeWindow(win.tokens, win.targetOffset),
      });
    });
    emitted.push({ word, type });
  }

  if (emitted.length < 2) {
    throw new Error(`only ${emitted.length} words survived extraction; need at least 2`);
  }

  const counts = new Map<string, { visual: number; linguistic: number }>();
  for (const rec of records) {
    const c = counts.get(rec.word) ?? { visual: 0, linguistic: 0 };
    c[rec.modality] += 1;
    counts.set(rec.word, c);
  }
  const manifest = {
    name: spec.name,
    dim_visual: spec.dimVisual,
    dim_linguistic: spec.dimLinguistic,
    words: emitted.map(({ word, type }) => ({
      word,
      type,
      n_visual: counts.get(word)!.visual,
      n_linguistic: counts.get(word)!.linguistic,
    })),
  };

  fs.writeFileSync(spec.outManifest, JSON.stringify(manifest, null, 2) + "\n");
  const lines = records.map((rec) =>
    JSON.stringify({ word: rec.word, modality: rec.modality, index: rec.index, vector: rec.vector }),
  );
  fs.writeFileSync(spec.outEmbeddings, lines.join("\n") + "\n");
  if (spec.outLog) {
    fs.writeFileSync(spec.outLog, log.length ? log.join("\n") + "\n" : "");
  }
  return { emittedWords: emitted.map((w) => w.word), droppedWords: dropped, logLines: log };
}

#!/usr/bin/env node
/** Thin driver: lexalign-extract --spec extraction.json [--seed N] */

import * as fs from "node:fs";
import * as path from "node:path";

import { ExtractionSpec, runExtraction } from "./extract.js";

function usage(): never {
  console.error("usage: lexalign-extract --spec <extraction.json> [--seed <int>]");
  process.exit(2);
}

function main(argv: string[]): number {
  let specPath: string | undefined;
  let seed = 0n;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--spec") specPath = argv[++i];
    else if (argv[i] === "--seed") seed = BigInt(argv[++i]);
    else usage();
  }
  if (!specPath) usage();

  const raw = JSON.parse(fs.readFileSync(specPath, "utf-8"));
  const base = path.dirname(path.resolve(specPath));
  const resolve = (p: string) => (path.isAbsolute(p) ? p : path.join(base, p));
  const spec: ExtractionSpec = {
    name: raw.name ?? "extracted",
    words: raw.words,
    annotationsPath: resolve(raw.annotations),
    corpusPath: resolve(raw.corpus),
    windowHalfWidth: raw.windowHalfWidth ?? 25,
    maxVisualPerWord: raw.maxVisualPerWord ?? 20,
    maxLinguisticPerWord: raw.maxLinguisticPerWord ?? 20,
    dimVisual: raw.dimVisual ?? 2048,
    dimLinguistic: raw.dimLinguistic ?? 768,
    outManifest: resolve(raw.outManifest ?? "manifest.json"),
    outEmbeddings: resolve(raw.outEmbeddings ?? "embeddings.jsonl"),
    outLog: raw.outLog ? resolve(raw.outLog) : undefined,
  };
  try {
    const summary = runExtraction(spec, seed);
    console.log(
      `extracted ${summary.emittedWords.length} words ` +
        `(${summary.droppedWords.length} dropped) -> ${spec.outManifest}`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));

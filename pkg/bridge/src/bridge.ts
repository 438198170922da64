/**
 * End-to-end export: corpus in, emissions binary out.
 *
 * For every corpus document: render the chain template, run the
 * stand-in encoder, take the hidden state at each of the l mask slots,
 * score it against every label's frozen name embedding, and write the
 * resulting l x m matrix under the document's id, in corpus order.
 */
import { readFileSync } from "node:fs";

import { hiddenStates, loadModel, promptTokens } from "./encoder.js";
import { writeEmissions } from "./emissions.js";
import { ShapeError } from "./errors.js";
import { buildSchedule, DEFAULT_ITERATIONS } from "./template.js";
import { loadTaxonomy } from "./taxonomy.js";
import { labelEmbeddings, slotLogits } from "./verbalizer.js";

export interface BridgeConfig {
  model: string;
  taxonomy: string;
  corpus: string;
  out: string;
  iterations?: number;
  /** accepted for config compatibility; the stand-in encoder is CPU-only */
  device?: string;
  batchSize?: number;
}

export interface ExportSummary {
  out: string;
  count: number;
  m: number;
  l: number;
}

interface CorpusDoc {
  id: string;
  text: string;
}

function readCorpus(path: string): CorpusDoc[] {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ShapeError(`cannot read corpus ${path}: ${(err as Error).message}`);
  }
  const docs: CorpusDoc[] = [];
  raw.split("\n").forEach((line, n) => {
    if (line.trim() === "") return;
    let obj: any;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new ShapeError(`corpus line ${n + 1} is not valid JSON`);
    }
    if (typeof obj?.id !== "string" || typeof obj?.text !== "string") {
      throw new ShapeError(`corpus line ${n + 1} needs string 'id' and 'text'`);
    }
    docs.push({ id: obj.id, text: obj.text });
  });
  return docs;
}

export function exportEmissions(config: BridgeConfig): ExportSummary {
  const lm = loadModel(config.model);
  const tax = loadTaxonomy(config.taxonomy);
  const schedule = buildSchedule(tax.depth, config.iterations ?? DEFAULT_ITERATIONS);
  const labels = labelEmbeddings(tax, lm);
  const docs = readCorpus(config.corpus);
  const batch = Math.max(1, config.batchSize ?? 16);

  function* records() {
    for (let lo = 0; lo < docs.length; lo += batch) {
      for (const doc of docs.slice(lo, lo + batch)) {
        const stream = promptTokens(doc.text, schedule.levels);
        const hidden = hiddenStates(stream, lm);
        if (hidden.length !== schedule.levels.length) {
          throw new ShapeError(
            `document '${doc.id}' produced ${hidden.length} mask slots, expected ${schedule.levels.length}`,
          );
        }
        yield { id: doc.id, logits: hidden.map((h) => slotLogits(h, labels)) };
      }
    }
  }

  const count = writeEmissions(config.out, tax.m, schedule.levels.length, records());
  return { out: config.out, count, m: tax.m, l: schedule.levels.length };
}

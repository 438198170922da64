#!/usr/bin/env node
/** CLI wrapper around exportEmissions; flags mirror BridgeConfig. */
import { parseArgs } from "node:util";

import { exportEmissions } from "./bridge.js";
import { renderTemplate, buildSchedule, DEFAULT_ITERATIONS } from "./template.js";

function usage(): never {
  console.error(
    "usage: bridge export --taxonomy FILE --corpus FILE --out FILE " +
      "[--model ID] [--iters N] [--batch-size N] [--device D]\n" +
      "       bridge template --depth N [--iters N] [--text S]",
  );
  process.exit(1);
}

function main(): number {
  const { values, positionals } = parseArgs({
    options: {
      model: { type: "string", default: "builtin" },
      taxonomy: { type: "string" },
      corpus: { type: "string" },
      out: { type: "string" },
      iters: { type: "string" },
      "batch-size": { type: "string" },
      device: { type: "string" },
      depth: { type: "string" },
      text: { type: "string", default: "x" },
    },
    allowPositionals: true,
  });
  const command = positionals[0];
  const iters = values.iters === undefined ? DEFAULT_ITERATIONS : Number(values.iters);

  if (command === "template") {
    if (values.depth === undefined) usage();
    const schedule = buildSchedule(Number(values.depth), iters);
    console.log(renderTemplate(values.text!, schedule));
    console.log(JSON.stringify({ l: schedule.levels.length, levels: schedule.levels }));
    return 0;
  }
  if (command === "export") {
    if (!values.taxonomy || !values.corpus || !values.out) usage();
    const summary = exportEmissions({
      model: values.model!,
      taxonomy: values.taxonomy,
      corpus: values.corpus,
      out: values.out,
      iterations: iters,
      device: values.device,
      batchSize: values["batch-size"] === undefined ? undefined : Number(values["batch-size"]),
    });
    console.log(JSON.stringify(summary));
    return 0;
  }
  usage();
}

try {
  process.exit(main());
} catch (err) {
  const e = err as Error;
  console.error(`bridge: ${e.name}: ${e.message}`);
  process.exit(e.name === "ShapeError" || e.name === "VocabularyError" ? 2 : 1);
}

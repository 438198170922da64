/**
 * Label scoring: each label's vector is the average of its name
 * subtokens' embeddings (frozen — the bridge never trains anything),
 * and a slot's label logits are plain dot products against the slot's
 * hidden state.
 */
import { MaskedLM, tokenize } from "./encoder.js";
import { VocabularyError } from "./errors.js";
import { Taxonomy } from "./taxonomy.js";

export function labelEmbeddings(tax: Taxonomy, lm: MaskedLM): Float64Array[] {
  return tax.nodes.map((node) => {
    const subtokens = tokenize(node.name);
    if (subtokens.length === 0) {
      throw new VocabularyError(`label '${node.name}' has no usable subtokens`);
    }
    const missing = subtokens.filter((t) => !lm.hasToken(t));
    if (missing.length > 0) {
      throw new VocabularyError(
        `label '${node.name}' is not verbalizable: model vocabulary lacks [${missing.join(", ")}]`,
      );
    }
    const v = new Float64Array(lm.dim);
    for (const t of subtokens) {
      const e = lm.embed(t);
      for (let d = 0; d < lm.dim; d++) v[d] += e[d];
    }
    for (let d = 0; d < lm.dim; d++) v[d] /= subtokens.length;
    return v;
  });
}

export function slotLogits(hidden: Float64Array, labels: Float64Array[]): Float64Array {
  const out = new Float64Array(labels.length);
  labels.forEach((v, k) => {
    let dot = 0;
    for (let d = 0; d < v.length; d++) dot += hidden[d] * v[d];
    out[k] = dot;
  });
  return out;
}

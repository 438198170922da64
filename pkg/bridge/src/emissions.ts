/**
 * Writer for the binary emissions format the consumer reads back:
 *
 *   magic "ICRFEMIT" | u32 version=1 | u32 m | u32 l | u64 count
 *   then per record: u32 idLen | idLen UTF-8 bytes | l*m little-endian f32
 *
 * The count field lives at byte offset 20 and is patched after all
 * records are written.
 */
import { openSync, writeSync, closeSync } from "node:fs";

import { ShapeError } from "./errors.js";

export const EMISSIONS_MAGIC = "ICRFEMIT";
export const EMISSIONS_VERSION = 1;
export const HEADER_BYTES = 28;

export interface EmissionRecord {
  id: string;
  /** row-major l x m logits */
  logits: Float64Array[] | number[][];
}

function header(m: number, l: number, count: number): Buffer {
  const buf = Buffer.alloc(HEADER_BYTES);
  buf.write(EMISSIONS_MAGIC, 0, "ascii");
  buf.writeUInt32LE(EMISSIONS_VERSION, 8);
  buf.writeUInt32LE(m, 12);
  buf.writeUInt32LE(l, 16);
  buf.writeBigUInt64LE(BigInt(count), 20);
  return buf;
}

export function writeEmissions(
  path: string,
  m: number,
  l: number,
  records: Iterable<EmissionRecord>,
): number {
  const fd = openSync(path, "w");
  let count = 0;
  try {
    writeSync(fd, header(m, l, 0));
    for (const { id, logits } of records) {
      if (logits.length !== l) {
        throw new ShapeError(`record '${id}' has ${logits.length} rows, expected l=${l}`);
      }
      const payload = Buffer.alloc(4 * l * m);
      logits.forEach((row, i) => {
        if (row.length !== m) {
          throw new ShapeError(`record '${id}' row ${i} has ${row.length} columns, expected m=${m}`);
        }
        for (let j = 0; j < m; j++) {
          payload.writeFloatLE(Number(row[j]), 4 * (i * m + j));
        }
      });
      const idBytes = Buffer.from(id, "utf-8");
      const lenBuf = Buffer.alloc(4);
      lenBuf.writeUInt32LE(idBytes.length, 0);
      writeSync(fd, lenBuf);
      writeSync(fd, idBytes);
      writeSync(fd, payload);
      count += 1;
    }
    const countBuf = Buffer.alloc(8);
    countBuf.writeBigUInt64LE(BigInt(count), 0);
    writeSync(fd, countBuf, 0, 8, 20);
  } finally {
    closeSync(fd);
  }
  return count;
}

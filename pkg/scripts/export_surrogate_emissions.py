#!/usr/bin/env python3
"""Dump a trained model's per-example logits into the emissions binary format.

The output can be fed back through ``hiericrf train --emissions`` /
``eval --emissions``, and doubles as a reference fixture for external
emitters that target the same format.
"""
import argparse

from hiericrf import load_taxonomy, read_corpus, store_emissions
from hiericrf.training import SurrogateEmitter, load_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--taxonomy", required=True)
    ap.add_argument("--model", required=True)
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    tax = load_taxonomy(args.taxonomy)
    verb, _, schedule, _ = load_model(args.model, tax)
    emitter = SurrogateEmitter.from_params(verb)
    corpus = read_corpus(args.corpus, tax)
    count = store_emissions(
        args.out,
        tax.m,
        schedule.l,
        ((ex.id, emitter.logits(ex, schedule).logits) for ex in corpus),
    )
    print(f"wrote {count} records to {args.out}")


if __name__ == "__main__":
    main()

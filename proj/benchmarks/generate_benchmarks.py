#!/usr/bin/env python3
"""Regenerate the bundled benchmark stand-ins.

The original ISCAS sources are not redistributable through this repo's
package mirror, so we synthesize netlists with the same interface shape
(input/output/gate/flip-flop counts) from a fixed seed.  Every file starts
with a three-inverter chain rooted at the first input (a convenient victim
for directed toggling) and a `hub1` gate that is forced to fan out to at
least three downstream gates (a convenient payload target).

Running this script rewrites the .bench files in place; they are committed,
so a run must be a no-op unless this script changes.
"""

import random
from collections import deque
from pathlib import Path

HERE = Path(__file__).resolve().parent

# name, inputs, outputs, combinational gates, flip-flops, seed
PROFILES = [
    ("c432", 36, 7, 160, 0, 432),
    ("c880", 60, 26, 383, 0, 880),
    ("s298", 3, 6, 61, 14, 298),
    ("s344", 9, 11, 86, 15, 344),
    ("s349", 9, 11, 89, 15, 349),
]

KINDS = [
    ("NAND", 2, 30), ("NAND", 3, 10), ("NOR", 2, 12), ("AND", 2, 14),
    ("OR", 2, 9), ("XOR", 2, 7), ("NOT", 1, 12), ("BUF", 1, 3),
    ("AND", 3, 3),
]
KIND_POP = [k for k in KINDS for _ in range(k[2])]

# gate offsets (past the fixed preamble) that must consume hub1
HUB_SLOTS = (5, 15, 25)


def generate(name, n_in, n_out, n_comb, n_dff, seed):
    rng = random.Random(seed)
    inputs = [f"in{i}" for i in range(n_in)]
    dffq = [f"q{i}" for i in range(n_dff)]
    pool = inputs + dffq
    unconsumed = dict.fromkeys(pool)
    gates = []           # (out, kind, [ins])
    comb_outs = []
    fanout = {}

    def consume(n):
        unconsumed.pop(n, None)
        fanout[n] = fanout.get(n, 0) + 1

    def emit(out, kind, ins):
        for i in ins:
            consume(i)
        gates.append((out, kind, ins))
        pool.append(out)
        unconsumed[out] = None
        comb_outs.append(out)

    def pick(arity, force=None):
        ins = [] if force is None else [force]
        for n in list(unconsumed):
            if len(ins) >= arity:
                break
            if n not in ins:
                ins.append(n)
        while len(ins) < arity:
            c = rng.choice(pool)
            if c not in ins:
                ins.append(c)
        rng.shuffle(ins)
        return ins

    # fixed preamble: toggle chain + payload hub
    emit("inv1", "NOT", [inputs[0]])
    emit("inv2", "NOT", ["inv1"])
    emit("inv3", "NOT", ["inv2"])
    emit("hub1", "NAND", ["inv3", inputs[1 % n_in]])
    preamble = len(gates)

    for g in range(n_comb - preamble):
        kind, arity, _ = rng.choice(KIND_POP)
        if g in HUB_SLOTS:
            if arity < 2:
                kind, arity = "NAND", 2
            ins = pick(arity, force="hub1")
        else:
            ins = pick(arity)
        emit(f"n{g}", kind, ins)

    # flip-flop data inputs: drain stragglers first, then random deep nets
    dff_gates = []
    for i, q in enumerate(dffq):
        d = None
        for n in list(unconsumed):
            if n != q and n not in inputs:
                d = n
                break
        if d is None:
            d = rng.choice(comb_outs)
        consume(d)
        dff_gates.append((q, "DFF", [d]))

    leftovers = [n for n in unconsumed if n not in inputs and n not in dffq]
    assert len(leftovers) <= n_out, (name, leftovers)
    outputs = list(leftovers)
    for n in reversed(comb_outs):
        if len(outputs) >= n_out:
            break
        if n not in outputs:
            outputs.append(n)
    outputs.sort(key=pool.index)

    stuck = [n for n in unconsumed if n in inputs or n in dffq]
    assert not stuck, (name, stuck)
    assert fanout.get("hub1", 0) >= 3, name
    assert len(gates) == n_comb and len(dff_gates) == n_dff

    lines = [f"# {name} (regenerated stand-in, same interface shape as the original)"]
    lines.append(f"# {n_in} inputs, {n_out} outputs, {n_dff} flip-flops, {n_comb + n_dff} gates")
    lines += [f"INPUT({i})" for i in inputs]
    lines += [f"OUTPUT({o})" for o in outputs]
    lines += [f"{q} = {kind}({ins[0]})" for q, kind, ins in dff_gates]
    lines += [f"{o} = {kind}({', '.join(ins)})" for o, kind, ins in gates]
    return "\n".join(lines) + "\n"


def main():
    for profile in PROFILES:
        text = generate(*profile)
        path = HERE / f"{profile[0]}.bench"
        path.write_text(text)
        print(f"wrote {path.name}: {text.count(chr(10))} lines")


if __name__ == "__main__":
    main()

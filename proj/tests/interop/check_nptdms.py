#!/usr/bin/env python3
# Reads files from write_random_tdms with npTDMS and compares every object,
# property and sample against the JSON the writer emitted.
import json
import math
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
from nptdms import TdmsFile

FLOAT32, FLOAT64, STRING, BOOL, TIMESTAMP = 0x09, 0x0A, 0x20, 0x21, 0x44


def same_float(bits, got, fmt, ufmt):
    want = struct.unpack(fmt, struct.pack(ufmt, bits))[0]
    if math.isnan(want):
        return math.isnan(float(got))
    return struct.unpack(ufmt, struct.pack(fmt, float(got)))[0] == bits


def same_value(enc, got):
    dtype, want = enc["dtype"], enc["value"]
    if dtype == FLOAT32:
        return same_float(want, got, "<f", "<I")
    if dtype == FLOAT64:
        return same_float(want, got, "<d", "<Q")
    if dtype == TIMESTAMP:
        return [int(got.seconds), int(got.second_fractions)] == want
    if dtype == BOOL:
        return bool(got) == want
    if dtype == STRING:
        return got == want
    return int(got) == want


def same_props(want, got, where, errors):
    if [p["name"] for p in want] != list(got.keys()):
        errors.append(f"{where}: property names {list(got.keys())!r}")
        return
    for p in want:
        if not same_value(p["value"], got[p["name"]]):
            errors.append(f"{where}: property {p['name']!r} = {got[p['name']]!r}")


def same_data(ch, got, where, errors):
    want = ch["data"]
    if len(got) != len(want):
        errors.append(f"{where}: {len(got)} samples, expected {len(want)}")
        return
    if not want:
        return
    dtype = ch["dtype"]
    if dtype == FLOAT32:
        ok = np.asarray(got, dtype=np.float32).view(np.uint32).tolist() == want
    elif dtype == FLOAT64:
        ok = np.asarray(got, dtype=np.float64).view(np.uint64).tolist() == want
    elif dtype == TIMESTAMP:
        ok = [[int(s), int(f)] for s, f in zip(got.seconds, got.second_fractions)] == want
    elif dtype == BOOL:
        ok = [bool(x) for x in got] == want
    elif dtype == STRING:
        ok = list(got) == want
    else:
        ok = [int(x) for x in got] == want
    if not ok:
        errors.append(f"{where}: sample values differ")


def check(tdms_path, model):
    errors = []
    f = TdmsFile.read(str(tdms_path), raw_timestamps=True)
    same_props(model["properties"], f.properties, "root", errors)
    groups = f.groups()
    if [g.name for g in groups] != [g["name"] for g in model["groups"]]:
        return [f"group names {[g.name for g in groups]!r}"]
    for g_want, g_got in zip(model["groups"], groups):
        same_props(g_want["properties"], g_got.properties, g_want["name"], errors)
        channels = g_got.channels()
        if [c.name for c in channels] != [c["name"] for c in g_want["channels"]]:
            errors.append(f"{g_want['name']}: channel names {[c.name for c in channels]!r}")
            continue
        for c_want, c_got in zip(g_want["channels"], channels):
            where = f"{g_want['name']}/{c_want['name']}"
            same_props(c_want["properties"], c_got.properties, where, errors)
            same_data(c_want, c_got[:] if len(c_got) else [], where, errors)
    return errors


def main():
    writer, count, seed = sys.argv[1], sys.argv[2], sys.argv[3]
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([writer, tmp, count, seed], check=True)
        failures = 0
        for model_path in sorted(Path(tmp).glob("*.json")):
            errors = check(model_path.with_suffix(".tdms"), json.loads(model_path.read_text()))
            for e in errors:
                print(f"{model_path.stem}: {e}")
            failures += bool(errors)
        print(f"{count} files, {failures} mismatched")
        return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

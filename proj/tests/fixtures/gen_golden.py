#!/usr/bin/env python3
# Regenerates golden_nptdms.tdms and golden_nptdms.json with npTDMS, an
# independent TDMS implementation. The JSON holds the values npTDMS reads
# back from the file; the C++ parser must reproduce them bit-exact.
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np
from nptdms import ChannelObject, GroupObject, RootObject, TdmsFile, TdmsWriter

here = Path(__file__).resolve().parent
tdms_path = here / "golden_nptdms.tdms"
json_path = here / "golden_nptdms.json"

n = 64
top = np.array([426.72 + 10.0 * math.sin(0.3 * i) for i in range(n)], dtype=np.float64)
bottom = np.array([-3.5 + 0.25 * i for i in range(n)], dtype=np.float32)
counts = np.array([(-1) ** i * i * 1000 for i in range(n)], dtype=np.int32)
ticks = np.array([(i * 7919) % 65536 for i in range(n)], dtype=np.uint16)
big = np.array([i * (1 << 40) - 5 for i in range(n)], dtype=np.int64)
labels = ["idle", "strain", "vgp'7"]

with TdmsWriter(str(tdms_path)) as w:
    root = RootObject(properties={"author": "edgebench", "site": "Living Bridge"})
    group = GroupObject("Member 7", properties={"member": np.int32(7)})
    w.write_segment([
        root,
        group,
        ChannelObject("Member 7", "vgp_7_t", top[:40],
                      properties={"unit_string": "ue", "wf_increment": 0.01}),
        ChannelObject("Member 7", "vgp_7_b", bottom[:40]),
        ChannelObject("Member 7", "counts", counts[:40]),
    ])
    w.write_segment([
        ChannelObject("Member 7", "vgp_7_t", top[40:]),
        ChannelObject("Member 7", "vgp_7_b", bottom[40:]),
        ChannelObject("Member 7", "counts", counts[40:]),
    ])
    w.write_segment([
        GroupObject("Aux"),
        ChannelObject("Aux", "ticks", ticks),
        ChannelObject("Aux", "big", big),
        ChannelObject("Aux", "labels", labels),
    ])

f = TdmsFile.read(str(tdms_path))


def bits(x):
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


out = {"file_properties": {k: str(v) for k, v in f.properties.items()}, "groups": []}
for g in f.groups():
    gj = {"name": g.name, "channels": []}
    for c in g.channels():
        data = c[:]
        if c.data_type.__name__ == "String":
            values = [str(v) for v in data]
        else:
            values = [bits(v) for v in data]
        gj["channels"].append({"name": c.name, "dtype": c.data_type.__name__,
                               "count": len(data), "f64_bits": values})
    out["groups"].append(gj)
json_path.write_text(json.dumps(out, indent=1) + "\n")
print("wrote", tdms_path, tdms_path.stat().st_size, "bytes")

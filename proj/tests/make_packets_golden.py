# Copyright 2026 The ACPA-EEG Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes packets.golden with Python's struct module, independently of the C++ serializer."""
import random
import struct

MAGIC = b"EEG1"
VERSION = 1


def packet(flags, seq, ts, samples):
    head = MAGIC + struct.pack("<BBIQH", VERSION, flags, seq, ts, len(samples))
    body = b"".join(struct.pack("<8f", *s) for s in samples)
    return head + body


def f32_bits(x):
    return struct.unpack("<I", struct.pack("<f", x))[0]


def main():
    rng = random.Random(20260417)
    cases = [
        (0, 0, 0, []),
        (0, 1, 1_000_000, [[0.0] * 8]),
        (0xA5, 0xFFFFFFFF, 0xFFFFFFFFFFFFFFFF, [[1.5, -2.25, 3.0e4, -1e-3, 187500.0, -187500.0, 0.022351741790771484, 7.0]]),
    ]
    for n in (2, 10, 40):
        samples = [[rng.uniform(-200.0, 200.0) for _ in range(8)] for _ in range(n)]
        cases.append((rng.randrange(256), rng.randrange(2**32), rng.randrange(2**64), samples))
    with open("packets.golden", "w") as out:
        out.write("# packet datagrams: hex flags seq timestamp_us n_samples then 8*n float32 bit patterns\n")
        for flags, seq, ts, samples in cases:
            data = packet(flags, seq, ts, samples)
            bits = " ".join(f"{f32_bits(v):08x}" for s in samples for v in s)
            out.write(f"{data.hex()} {flags} {seq} {ts} {len(samples)} {bits}".rstrip() + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Writes the bundled 256-tap ECG-like impulse response.

The taps form one heartbeat: a small P bump, a QRS complex (negative Q,
dominant positive R, negative S) and a broad T wave. 28 taps are nonzero and
every other tap is exactly zero. Values are rounded to four decimals so the
file is stable across platforms.

    python3 scripts/make_ecg_ir.py > crates/core/data/ecg_ir_256.txt
"""
import math
import sys

N = 256

taps = [0.0] * N

# P wave
for i, v in zip(range(40, 45), [0.08, 0.14, 0.17, 0.14, 0.08]):
    taps[i] = v
# Q
taps[70], taps[71] = -0.12, -0.25
# R
for i, v in zip(range(72, 77), [0.35, 0.80, 1.00, 0.70, 0.25]):
    taps[i] = v
# S
for i, v in zip(range(77, 80), [-0.30, -0.18, -0.07]):
    taps[i] = v
# T wave: half sine over 13 taps
for j in range(13):
    taps[120 + j] = 0.3 * math.sin(math.pi * (j + 1) / 14)

taps = [round(v, 4) for v in taps]
assert sum(1 for v in taps if v != 0.0) == 28

out = sys.stdout
for v in taps:
    out.write(f"{v:.4f}\n")

#!/usr/bin/env python3
"""Regenerates the synthetic sample archive in this directory.

Output is fully determined by the fixed seed below.
"""
import csv
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
rng = random.Random(1941)

PHOTOGRAPHERS = ["ph_a", "ph_b", "ph_c"]
DETECTORS = ["mask_rcnn", "retinanet", "ssd", "yolov3"]
CLASSES = ["person", "person", "person", "horse", "car", "boat", "dog", "airplane"]
W, H = 64, 48

photos = []
for p_idx, ph in enumerate(PHOTOGRAPHERS):
    for k in range(8):
        pid = f"{ph}_{k:02d}"
        day = 1 + (k // 3) + 5 * p_idx
        if k == 7:
            date = ""
        elif k % 3 == 1:
            date = f"{day} Jun 1942"
        else:
            date = f"1942-06-{day:02d}"
        photos.append((pid, ph, date))

with open(os.path.join(HERE, "manifest.csv"), "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["photo_id", "photographer_id", "capture_date", "image_path", "width", "height"])
    for pid, ph, date in photos:
        w.writerow([pid, ph, date, f"images/{pid}.ppm", W, H])

for pid, ph, _ in photos:
    base = [rng.randrange(40, 200) for _ in range(3)]
    raster = bytearray()
    for y in range(H):
        for x in range(W):
            for c in range(3):
                v = base[c] // 2 + (x * 37 + y * 11 * (c + 1)) % 48 + rng.randrange(8)
                raster.append(min(v, 255))
    with open(os.path.join(HERE, "images", f"{pid}.ppm"), "wb") as f:
        f.write(f"P6\n{W} {H}\n255\n".encode())
        f.write(bytes(raster))

# Ground-truth objects per photo, scaled to 640x480 detector coordinates
# divided by 10 to fit the 64x48 thumbnails.
exports = {d: [] for d in DETECTORS}
for pid, ph, _ in photos:
    for _ in range(rng.randrange(0, 4)):
        cls = rng.choice(CLASSES)
        bw, bh = rng.randrange(6, 50), rng.randrange(6, 40)
        x0, y0 = rng.randrange(0, W - bw + 1), rng.randrange(0, H - bh + 1)
        for det in DETECTORS:
            if rng.random() < 0.25:
                continue
            jit = [rng.randrange(-1, 2) for _ in range(4)]
            box = [max(0, x0 + jit[0]), max(0, y0 + jit[1]),
                   min(W, x0 + bw + jit[2]), min(H, y0 + bh + jit[3])]
            exports[det].append({"photo_id": pid, "class": cls,
                                 "confidence": round(rng.uniform(0.2, 0.99), 3), "box": box})

for det, rows in exports.items():
    with open(os.path.join(HERE, f"detections_{det}.json"), "w") as f:
        json.dump({"detector_id": det, "detections": rows}, f, indent=1)
        f.write("\n")

with open(os.path.join(HERE, "features.csv"), "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["photo_id", "photographer_id"] + [f"f{i}" for i in range(8)])
    for pid, ph, _ in photos:
        centre = PHOTOGRAPHERS.index(ph) * 3.0
        w.writerow([pid, ph] + [f"{centre + rng.gauss(0, 1):.6f}" for _ in range(8)])

with open(os.path.join(HERE, "labels.csv"), "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["photo_id", "label"])
    for pid, ph, _ in photos:
        w.writerow([pid, ph])

with open(os.path.join(HERE, "config.json"), "w") as f:
    json.dump({
        "fusion": {"thresholds": {"mask_rcnn": 0.7, "retinanet": 0.3, "ssd": 0.5, "yolov3": 0.6},
                   "iou_threshold": 0.1, "merge_strategy": "mean_coordinates"},
        "framing": {"closeup_min_fraction": 0.65, "overall_max_fraction": 0.10},
        "split": {"fractions": [0.6, 0.2, 0.2], "seed": 7},
        "emd": {"cap": 256, "seed": 7},
        "tsne": {"perplexity": 5, "iterations": 1000, "learning_rate": 200, "seed": 7},
    }, f, indent=2)
    f.write("\n")

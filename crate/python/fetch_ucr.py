"""Rebuild data/ucr from the UCR datasets bundled inside PyPI wheels.

Trace ships with tslearn; Coffee and GunPoint ship with pyts. SyntheticControl
comes from the UCI control-chart file in the dtaidistance source archive: 600
series of length 60, 100 per class in class order. Its first 50 series of each
class become TRAIN and the rest TEST; the pipeline clusters the union, so the
split only matters for the file layout.

Packages are fetched with `pip download` (no install) and unpacked in a temp
dir, and each dataset is written in UCR layout as
<root>/<Name>/<Name>_{TRAIN,TEST}.tsv.

    python3 python/fetch_ucr.py [--root data/ucr] [--wheel-dir DIR]
"""

import argparse
import glob
import io
import os
import subprocess
import sys
import tarfile
import tempfile
import zipfile

import numpy as np

WHEELS = {"tslearn": "tslearn==0.9.0", "pyts": "pyts==0.13.0"}
DTAIDISTANCE = "dtaidistance==2.5.1"


def pip_download(spec, wheel_dir, *extra):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", spec, "--no-deps",
         "--timeout", "120", "-d", wheel_dir, *extra],
        check=True,
    )


def fetch_wheel(name, wheel_dir):
    found = glob.glob(os.path.join(wheel_dir, f"{name}-*.whl"))
    if not found:
        pip_download(WHEELS[name], wheel_dir)
        found = glob.glob(os.path.join(wheel_dir, f"{name}-*.whl"))
    return zipfile.ZipFile(found[0])


def fetch_sdist(pattern, spec, wheel_dir):
    found = glob.glob(os.path.join(wheel_dir, pattern))
    if not found:
        pip_download(spec, wheel_dir, "--no-binary", ":all:")
        found = glob.glob(os.path.join(wheel_dir, pattern))
    return tarfile.open(found[0])


def write_tsv(path, labels, rows):
    with open(path, "w") as out:
        for label, row in zip(labels, rows):
            out.write("\t".join([str(int(label))] + [repr(float(v)) for v in row]) + "\n")


def save(root, name, split, labels, rows):
    os.makedirs(os.path.join(root, name), exist_ok=True)
    path = os.path.join(root, name, f"{name}_{split}.tsv")
    write_tsv(path, labels, rows)
    print(f"wrote {path} ({len(rows)} series)")


def trace(wheel, root):
    data = np.load(io.BytesIO(wheel.read("tslearn/.cached_datasets/Trace.npz")))
    for split in ("train", "test"):
        x = data[f"X_{split}"][:, :, 0]
        save(root, "Trace", split.upper(), data[f"y_{split}"], x)


def pyts_ucr(wheel, root, name):
    for split in ("TRAIN", "TEST"):
        text = wheel.read(f"pyts/datasets/cached_datasets/UCR/{name}/{name}_{split}.txt")
        table = np.loadtxt(io.BytesIO(text))
        save(root, name, split, table[:, 0], table[:, 1:])


def synthetic_control(sdist, root):
    member = next(m for m in sdist.getnames() if m.endswith("tests/rsrc/synthetic_control.data"))
    rows = np.loadtxt(sdist.extractfile(member))
    labels = np.repeat(np.arange(1, 7), 100)
    first = np.tile(np.arange(100) < 50, 6)
    save(root, "SyntheticControl", "TRAIN", labels[first], rows[first])
    save(root, "SyntheticControl", "TEST", labels[~first], rows[~first])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--root", default=os.path.normpath(os.path.join(os.path.dirname(__file__), "..", "data", "ucr")))
    parser.add_argument("--wheel-dir")
    args = parser.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        wheel_dir = args.wheel_dir or tmp
        trace(fetch_wheel("tslearn", wheel_dir), args.root)
        pyts = fetch_wheel("pyts", wheel_dir)
        for name in ("Coffee", "GunPoint"):
            pyts_ucr(pyts, args.root, name)
        synthetic_control(fetch_sdist("dtaidistance-*.tar.gz", DTAIDISTANCE, wheel_dir), args.root)


if __name__ == "__main__":
    main()

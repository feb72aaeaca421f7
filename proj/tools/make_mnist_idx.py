#!/usr/bin/env python3
"""Write an MNIST subset as an IDX image/label pair.

The source is the 5000-digit MNIST sample bundled with mlxtend
(mlxtend/data/data/mnist_5k.csv.gz: 784 pixel columns in 0..255, then the
digit). Pass either that .csv.gz file or an mlxtend wheel that contains it.
"""
import argparse
import gzip
import io
import struct
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(source):
    if source.endswith(".whl"):
        with zipfile.ZipFile(source) as wheel:
            raw = wheel.read(MEMBER)
    else:
        with open(source, "rb") as f:
            raw = f.read()
    text = gzip.decompress(raw).decode("ascii")
    for line in io.StringIO(text):
        line = line.strip()
        if line:
            values = [int(float(v)) for v in line.split(",")]
            yield values[:-1], values[-1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="mnist_5k.csv.gz or mlxtend-*.whl")
    parser.add_argument("--images", required=True)
    parser.add_argument("--labels", required=True)
    parser.add_argument("--limit", type=int, default=0)
    args = parser.parse_args()

    pixels, digits = [], []
    for row, digit in read_rows(args.source):
        if len(row) != 784 or not all(0 <= p <= 255 for p in row) or not 0 <= digit <= 9:
            raise SystemExit("unexpected row format")
        pixels.append(bytes(row))
        digits.append(digit)
        if args.limit and len(digits) == args.limit:
            break

    with open(args.images, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(pixels), 28, 28))
        f.writelines(pixels)
    with open(args.labels, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(digits)))
        f.write(bytes(digits))
    print(f"wrote {len(digits)} images")


if __name__ == "__main__":
    main()

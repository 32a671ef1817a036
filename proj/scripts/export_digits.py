"""Writes the 8x8 grayscale digit scans as CSV: 64 integer pixels (0..16), label."""

import argparse
import csv

from sklearn.datasets import load_digits


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output CSV path")
    args = parser.parse_args()

    digits = load_digits()
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        for pixels, label in zip(digits.data, digits.target):
            writer.writerow([int(p) for p in pixels] + [int(label)])
    print(f"wrote {len(digits.target)} rows to {args.out}")


if __name__ == "__main__":
    main()

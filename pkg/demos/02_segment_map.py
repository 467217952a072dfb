"""Segment part-worth space by profit argmax.

Eight random 2-D products (the second coordinate doubles as the price)
partition the plane into nonlinear segments; each segment collects the
part-worths under which one product is the most profitable.  Segments
cluster near the origin, where consumers are nearly indifferent.
"""

import numpy as np

from acquest.choice import random_planar_market, segment_map, write_segment_csv

market = random_planar_market(n_products=8, bounds=(-10, 10), seed=7)
axis1, axis2, labels = segment_map(market, (-10, 10), resolution=120)

present, counts = np.unique(labels, return_counts=True)
print("products and the share of the grid they win:")
for k, n in zip(present, counts):
    print(f"  product {k}: position {np.round(market.vectors[k], 2).tolist()}, "
          f"price {market.prices[k]:+.2f}, wins {n / labels.size:.1%}")

# a coarse look at the segmentation (one character per grid cell)
step = len(axis1) // 40 or 1
print("\nsegment map (coarse):")
for row in labels[::-step]:
    print("".join(chr(ord("a") + int(k)) for k in row[::step]))

write_segment_csv("segment_map.csv", axis1, axis2, labels)
print(f"\nfull {labels.shape[0]}x{labels.shape[1]} grid written to segment_map.csv")
print("boundary crossings shrink toward the origin: short utility vectors make "
      "shares even, so small preference changes flip the winner")

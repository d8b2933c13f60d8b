"""Writes the 20-trajectory toy real/generated pair and density queries.

The pair lives on an 8x8 grid with 6 time slots. Real trajectories share a
few starting cells and route fragments so that start-conditioned and
pattern metrics have material to compare; the generated side perturbs them.
"""
import random

W = 8
N_TIME = 6
HEADER = """# hrnet trajectory dataset v1
count = 20
max_lat = 35.8
max_lon = 139.8
min_lat = 35.6
min_lon = 139.6
n_time = 6
w = 8
---
"""


def walk(rng, start, length):
  cells = [start]
  while len(cells) < length:
    r, c = divmod(cells[-1], W)
    r = min(W - 1, max(0, r + rng.choice([-2, -1, 0, 1, 1, 2])))
    c = min(W - 1, max(0, c + rng.choice([-1, 0, 1, 3])))
    nxt = r * W + c
    if nxt != cells[-1]:
      cells.append(nxt)
  return cells


def slots(rng, length):
  s = sorted(rng.randrange(N_TIME) for _ in range(length))
  return s


def dataset(rng, starts, fragments, perturb):
  out = []
  for _ in range(20):
    if rng.random() < 0.4:
      cells = list(rng.choice(fragments))
      if rng.random() < perturb and len(cells) > 1:
        cells[-1] = (cells[-1] + 9) % (W * W)
        if cells[-1] == cells[-2]:
          cells[-1] = (cells[-1] + 1) % (W * W)
    else:
      cells = walk(rng, rng.choice(starts), rng.randint(1, 6))
    out.append(list(zip(cells, slots(rng, len(cells)))))
  return out


def write(path, trajectories):
  with open(path, "w") as f:
    f.write(HEADER)
    for t in trajectories:
      f.write(" ".join(f"{c}:{s}" for c, s in t) + "\n")


def main():
  rng = random.Random(20240601)
  starts = [3, 17, 17, 40, 40, 40, 58]
  fragments = [walk(rng, 17, 5), walk(rng, 40, 4), walk(rng, 3, 3)]
  write("tests/data/toy_real.txt", dataset(rng, starts, fragments, 0.0))
  write("tests/data/toy_gen.txt", dataset(rng, starts + [11], fragments, 0.5))
  with open("tests/data/toy_density_queries.txt", "w") as f:
    for _ in range(40):
      size = rng.randint(1, 6)
      f.write(" ".join(str(c) for c in sorted(rng.sample(range(W * W), size))) + "\n")


if __name__ == "__main__":
  main()

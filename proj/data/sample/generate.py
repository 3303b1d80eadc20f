"""Regenerates the bundled sample images (deterministic).

Each image is 32x32 gray-scale with a few filled shapes on a shaded
background plus mild noise. The matching edge map marks pixels whose region
differs from a 4-neighbor; edges are bright (255), background is 0.
"""
import numpy as np

SIZE = 32


def make(seed):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE]
    region = np.zeros((SIZE, SIZE), dtype=int)
    levels = [rng.uniform(0.55, 0.9)]
    for k in range(1, 4):
        if rng.random() < 0.5:
            r0, c0 = rng.integers(3, SIZE - 12, 2)
            h, w = rng.integers(5, 11, 2)
            mask = (yy >= r0) & (yy < r0 + h) & (xx >= c0) & (xx < c0 + w)
        else:
            cy, cx = rng.uniform(8, SIZE - 8, 2)
            rad = rng.uniform(3, 7)
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= rad ** 2
        region[mask] = k
        levels.append(rng.uniform(0.05, 0.45))
    img = np.array(levels)[region] + rng.normal(0, 0.03, (SIZE, SIZE))
    img = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
    edge = np.zeros((SIZE, SIZE), dtype=np.uint8)
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        shifted = np.roll(region, (dr, dc), axis=(0, 1))
        edge |= (shifted != region).astype(np.uint8)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = 0
    return img, edge * 255


def write_pgm(path, arr):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (arr.shape[1], arr.shape[0]))
        f.write(arr.astype(np.uint8).tobytes())


if __name__ == "__main__":
    rows = ["image_id,path,gt_path,role"]
    for i in range(1, 6):
        img, edge = make(i)
        write_pgm(f"img{i}.pgm", img)
        write_pgm(f"img{i}_edges.pgm", edge)
        rows.append(f"img{i},img{i}.pgm,img{i}_edges.pgm,auto")
    with open("manifest.csv", "w") as f:
        f.write("\n".join(rows) + "\n")

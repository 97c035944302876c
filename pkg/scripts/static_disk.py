"""Static FBP of a disk for a range of mollifier widths and angle counts."""
import argparse

from hybridct.fbp import FbpConfig, static_fbp
from hybridct.geometry import ImageGrid, make_disk_phantom, relative_l2_error
from hybridct.radon import ScanGeometry, forward_static


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--q", type=int, default=128)
    a = ap.parse_args()
    grid = ImageGrid(a.n)
    disk = make_disk_phantom(grid)
    print(" p   gamma*q  rel-L2 (disk)")
    for p in (45, 90, 180, 360):
        sino = forward_static(disk, ScanGeometry(p, a.q))
        for factor in (1.0, 1.5, 2.0, 3.0):
            img = static_fbp(sino, FbpConfig(gamma=factor / a.q, n_pix_out=a.n))
            print(f"{p:4d}  {factor:5.1f}   {relative_l2_error(img, disk, grid.disk_mask()):.4f}")


if __name__ == "__main__":
    main()

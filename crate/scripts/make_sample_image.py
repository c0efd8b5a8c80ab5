#!/usr/bin/env python3
"""Write the bundled 256x256 RGB test image (public-domain NASA photo
shipped with scikit-image) as a binary PPM."""
import sys
from pathlib import Path

import numpy as np
from skimage import data
from skimage.transform import resize

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("crates/core/fixtures/astronaut_256.ppm")
img = resize(data.astronaut(), (256, 256), anti_aliasing=True)
img = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
with open(out, "wb") as f:
    f.write(b"P6\n256 256\n255\n")
    f.write(img.tobytes())
print(f"wrote {out}")

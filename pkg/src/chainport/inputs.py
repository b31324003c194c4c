"""Random and file-based spin inputs.

Random product inputs draw each site independently from the Haar measure on a
qubit (normalised complex Gaussian 2-vectors); random entangled inputs are
Haar-random on the joint 2**n space. Both use numpy's PCG64 generator seeded
with the run seed, drawing site by site in order.

Input files are JSON: a list with one entry per site, each entry a pair of
amplitudes written as ``[re, im]``::

    [[[1, 0], [0, 0]], [[0.7071, 0], [0, 0.7071]]]
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .config import INPUT_FILE_WARN_TOL
from .errors import ConfigError

log = logging.getLogger(__name__)


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_product_inputs(n: int, rng: np.random.Generator) -> list[np.ndarray]:
    return [haar_qubit(rng) for _ in range(n)]


def haar_joint_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def load_inputs(path, n: int) -> list[np.ndarray]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"input file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"input file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, list) or len(data) != n:
        raise ConfigError(f"input file {p} must list {n} sites")
    sites = []
    for j, site in enumerate(data, start=1):
        try:
            v = np.array([complex(float(re), float(im)) for re, im in site])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"site {j} in {p}: expected two [re, im] pairs") from exc
        if v.size != 2:
            raise ConfigError(f"site {j} in {p}: expected two amplitudes, got {v.size}")
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ConfigError(f"site {j} in {p} has zero norm")
        if abs(nrm - 1) > INPUT_FILE_WARN_TOL:
            log.warning("site %d input norm %.6g, renormalising", j, nrm)
        sites.append(v / nrm)
    return sites

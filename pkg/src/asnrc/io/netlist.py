"""Structural netlist export of a reservoir.

One ``N<i>`` neuron instance per node and one ``L<i>_<j>`` RC line per
nonzero edge (signal from neuron j into neuron i). The line resistance falls
with edge strength, ``R = r_unit * w_max / |w|``, and the capacitance is
chosen so that ``R * C`` equals the edge delay times the step duration.
Nothing here runs a circuit simulator.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from asnrc.errors import ModelFileError
from asnrc.io.model_file import ModelFile
from asnrc.logs import log_tag

logger = logging.getLogger(__name__)

_NEURON = re.compile(r"^N(\d+)\s+ASN\b")
_LINE = re.compile(r"^L(\d+)_(\d+)\s+R=(\S+)\s+C=(\S+)$")
_STEP = re.compile(r"^\.PARAM\s+TSTEP=(\S+)$")


class ParsedNetlist(BaseModel):
    model_config = ConfigDict(frozen=True)

    neurons: List[int]
    edges: Dict[Tuple[int, int], Tuple[float, float]]
    step: float

    def delays(self) -> Dict[Tuple[int, int], int]:
        """Integer delay per edge recovered from its RC time constant."""
        return {edge: int(round(r * c / self.step)) for edge, (r, c) in self.edges.items()}

    def adjacency(self, n: int) -> np.ndarray:
        mask = np.zeros((n, n), dtype=bool)
        for i, j in self.edges:
            mask[i, j] = True
        return mask


def export_netlist(model: ModelFile, path: Union[str, Path], step_seconds: float = 1e-9,
                   r_unit: float = 1e3) -> Path:
    if step_seconds <= 0 or r_unit <= 0:
        raise ValueError("step duration and unit resistance must be positive")
    topo = model.topology()
    device = model.device
    w = topo.w_self.toarray()
    edges = topo.edges()
    w_max = float(max((abs(w[i, j]) for i, j in edges), default=1.0))

    lines = [
        "* reservoir netlist",
        f"* neurons={topo.n} edges={len(edges)} seed={topo.seed} d_max={topo.d_max}",
        f".PARAM TSTEP={float(step_seconds)!r}",
    ]
    for i in range(topo.n):
        lines.append(f"N{i} ASN VDD={float(device.v_dd)!r} BETA={float(device.slope_beta)!r} "
                     f"ALPHA={float(device.noise_amp_alpha)!r}")
    for i, j in edges:
        # Plain floats so repr() prints bare numbers under NumPy 2
        r = float(r_unit * w_max / abs(w[i, j]))
        c = float(int(topo.delays[i, j]) * step_seconds / r)
        lines.append(f"L{i}_{j} R={r!r} C={c!r}")
    lines.append(".END")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log_tag(logger, "Model", "netlist with %d neurons and %d lines written to %s", topo.n, len(edges), path)
    return path


def parse_netlist(path: Union[str, Path]) -> ParsedNetlist:
    neurons: List[int] = []
    edges: Dict[Tuple[int, int], Tuple[float, float]] = {}
    step = None
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("*") or line == ".END":
            continue
        if match := _STEP.match(line):
            step = float(match.group(1))
        elif match := _NEURON.match(line):
            neurons.append(int(match.group(1)))
        elif match := _LINE.match(line):
            i, j = int(match.group(1)), int(match.group(2))
            edges[(i, j)] = (float(match.group(3)), float(match.group(4)))
        else:
            raise ModelFileError(f"{path}:{number}: unrecognised netlist line {line!r}")
    if step is None:
        raise ModelFileError(f"{path}: missing .PARAM TSTEP")
    return ParsedNetlist(neurons=neurons, edges=edges, step=step)

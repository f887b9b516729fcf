"""Run configuration: flat key = value files, defaults, and validation.

The format is line oriented: ``key = value`` pairs, ``# comments``, blank
lines, and cosmetic ``[section]`` headers.  Unknown keys and syntax errors
are rejected with line numbers.  ``bump`` is the only repeatable key (one
``A,R,ybar,zbar`` quadruple per line); every other repeat is an error.
CLI flags are applied as overrides on top of the file, which in turn sits
on top of the documented defaults.

``RunConfig.resolved_lines()`` dumps the fully-resolved configuration
(defaults included, sampled bumps materialized) in a form that parses
back to an equivalent configuration; it is written into every output
directory for provenance.
"""

import re

import numpy as np

from .evolution import BoundarySpec, GridGeometry
from .initial_data import (
    DEFAULT_AMPLITUDE_RANGE,
    DEFAULT_BUMP_COUNT,
    DEFAULT_RADIUS_RANGE,
    PerturbationSpec,
    RiemannProblemSpec,
    sample_perturbations,
    table1_problem,
)
from .state import EosSpec, PrimitiveState

#: full-scale reference grid; ``scale`` divides it uniformly
FULL_GRID = (1800, 600, 300)
DEFAULT_EXTENTS = ((-1.5, 1.5), (0.0, 1.0), (0.0, 0.5))
DEFAULT_NX_1D = 400

#: snapshot-time presets per reference problem (their last entry is the
#: default t_end)
SNAPSHOT_PRESETS = {
    "a": (0.5, 1.0, 1.5, 2.0, 2.5),
    "b": (0.4, 0.8, 1.2, 1.6, 2.0),
    "c": (0.0, 0.6, 1.2, 1.8, 2.4),
    "d": (0.9, 1.8, 2.7, 3.6, 4.5),
    "e": (0.6, 1.2, 1.8, 2.4, 3.0),
    "f": (0.0, 0.9, 1.8, 2.7, 3.6),
}

_STATE_KEYS = tuple(f"{side}_{q}" for side in ("left", "right")
                    for q in ("rho", "n", "eps", "vx", "vy", "vz"))

#: every legal key; bump is the only repeatable one
KEYS = (
    ("problem", "dim", "scale", "nx", "ny", "nz",
     "x0", "x1", "y0", "y1", "z0", "z1",
     "bc_x", "bc_y", "bc_z",
     "cfl", "rk", "flux", "reconstruction",
     "t_end", "snapshots",
     "seed", "bump_count", "amp_min", "amp_max",
     "radius_min", "radius_max", "bump", "unperturbed",
     "out", "reference", "norms_every",
     "eos", "cs2", "gamma") + _STATE_KEYS
)

_SECTION_RE = re.compile(r"^\[[A-Za-z0-9_. -]+\]$")
_BOOL = {"on": True, "true": True, "yes": True, "1": True,
         "off": False, "false": False, "no": False, "0": False}


class ConfigError(ValueError):
    """Malformed configuration text or invalid value."""


def _fail(key, line, msg):
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{msg} (key {key!r})")


def _to_int(key, raw, line):
    try:
        return int(raw)
    except (TypeError, ValueError):
        _fail(key, line, f"expected an integer, got {raw!r}")


def _to_float(key, raw, line):
    try:
        return float(raw)
    except (TypeError, ValueError):
        _fail(key, line, f"expected a number, got {raw!r}")


def _to_bool(key, raw, line):
    try:
        return _BOOL[str(raw).strip().lower()]
    except KeyError:
        _fail(key, line, f"expected on/off, got {raw!r}")


def _to_choice(key, raw, line, choices):
    value = str(raw).strip()
    if value not in choices:
        _fail(key, line, f"must be one of {'/'.join(choices)}, got {raw!r}")
    return value


class RunConfig:
    """Fully-resolved run description; build with parse_config()."""

    def __init__(self, values):
        get = values.get
        self.problem = get("problem")
        self.dim = get("dim", 3)
        self.nx, self.ny, self.nz = get("shape", (None, None, None))
        self.scale = get("scale")
        self.extents = get("extents", DEFAULT_EXTENTS)
        self.bc = get("bc", ("outflow", "periodic", "periodic"))
        self.cfl = get("cfl")
        self.rk = get("rk", 4)
        self.flux = get("flux", "marquina")
        self.reconstruction = get("reconstruction", True)
        self.t_end = get("t_end")
        self.snapshots = get("snapshots")
        self.seed = get("seed")
        self.bump_count = get("bump_count", DEFAULT_BUMP_COUNT)
        self.amplitude_range = get("amplitude_range", DEFAULT_AMPLITUDE_RANGE)
        self.radius_range = get("radius_range", DEFAULT_RADIUS_RANGE)
        self.bumps = get("bumps")
        self.unperturbed = get("unperturbed", False)
        self.out = get("out", "srrp_out")
        self.reference = get("reference", "numerical1d")
        self.norms_every = get("norms_every", 1)
        self.eos_kind = get("eos_kind")
        self.cs2 = get("cs2")
        self.gamma = get("gamma")
        self.states = get("states", {})
        self._pert = None
        self._finalize()

    # -- resolution ------------------------------------------------------

    def _finalize(self):
        if self.problem is None:
            raise ConfigError("missing required key 'problem' (a-f or custom)")
        if self.dim not in (1, 3):
            raise ConfigError(f"dim must be 1 or 3, got {self.dim}")
        self._resolve_shape()
        if self.problem == "custom":
            self._check_custom_states()
            if self.t_end is None:
                raise ConfigError("custom problems need an explicit t_end")
            if self.snapshots is None:
                self.snapshots = []
        else:
            if self.problem not in SNAPSHOT_PRESETS:
                raise ConfigError(f"unknown problem label {self.problem!r}; "
                                  "choose a-f or custom")
            if self.states:
                raise ConfigError("explicit state keys require problem = custom")
            preset = SNAPSHOT_PRESETS[self.problem]
            if self.t_end is None:
                self.t_end = preset[-1]
            if self.snapshots is None:
                self.snapshots = [t for t in preset if t <= self.t_end + 1e-12]
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        self.snapshots = sorted({float(t) for t in self.snapshots})
        bad = [t for t in self.snapshots
               if t < 0 or t > self.t_end + 1e-12 * max(1.0, self.t_end)]
        if bad:
            raise ConfigError(f"snapshot times {bad} outside [0, t_end]")
        if self.cfl is not None and not 0.0 < self.cfl < 1.0:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.rk not in (2, 4):
            raise ConfigError(f"rk must be 2 or 4, got {self.rk}")
        if self.norms_every < 1:
            raise ConfigError(f"norms_every must be >= 1, got {self.norms_every}")
        if self.seed is not None and self.bumps is not None:
            raise ConfigError("seed and explicit bump lines are mutually "
                              "exclusive")
        if not (0 < self.amplitude_range[0] <= self.amplitude_range[1]):
            raise ConfigError(f"bad amplitude range {self.amplitude_range}")
        if not (0 < self.radius_range[0] <= self.radius_range[1]):
            raise ConfigError(f"bad radius range {self.radius_range}")
        for lo, hi in self.extents:
            if hi <= lo:
                raise ConfigError(f"extents must increase, got ({lo}, {hi})")

    def _resolve_shape(self):
        explicit = [n for n in (self.nx, self.ny, self.nz) if n is not None]
        if self.scale is not None:
            if explicit:
                raise ConfigError("scale and explicit nx/ny/nz are mutually "
                                  "exclusive")
            if self.scale < 1 or FULL_GRID[2] % self.scale:
                raise ConfigError(f"scale must divide {FULL_GRID[2]} "
                                  f"(full grid {FULL_GRID}), got {self.scale}")
        if self.dim == 1:
            if (self.ny or 1) != 1 or (self.nz or 1) != 1:
                raise ConfigError("dim = 1 requires ny = nz = 1")
            self.nx = self.nx or (FULL_GRID[0] // self.scale if self.scale
                                  else DEFAULT_NX_1D)
            self.ny = self.nz = 1
        elif explicit:
            if len(explicit) != 3:
                raise ConfigError("dim = 3 grids need all of nx, ny, nz "
                                  "when any is given")
        else:
            scale = self.scale or 1
            self.nx = FULL_GRID[0] // scale
            self.ny = FULL_GRID[1] // scale
            self.nz = FULL_GRID[2] // scale
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n < 1:
                raise ConfigError(f"{name} must be >= 1, got {n}")

    def _check_custom_states(self):
        if self.eos_kind is None:
            raise ConfigError("custom problems need key 'eos' "
                              "(ultrarelativistic or perfect_gas)")
        need = ("rho",) if self.eos_kind == "ultrarelativistic" \
            else ("n", "eps")
        for side in ("left", "right"):
            for q in need:
                if self.states.get(f"{side}_{q}") is None:
                    raise ConfigError(f"missing required key '{side}_{q}' "
                                      f"for a custom {self.eos_kind} problem")

    # -- derived objects -------------------------------------------------

    def eos(self):
        if self.problem != "custom":
            return table1_problem(self.problem).eos
        if self.eos_kind == "ultrarelativistic":
            return EosSpec.ultrarelativistic(
                1.0 / 3.0 if self.cs2 is None else self.cs2)
        return EosSpec.perfect_gas(
            4.0 / 3.0 if self.gamma is None else self.gamma)

    def problem_spec(self):
        if self.problem != "custom":
            return table1_problem(self.problem)
        eos = self.eos()
        sides = []
        for side in ("left", "right"):
            v = [self.states.get(f"{side}_v{c}") or 0.0 for c in "xyz"]
            if eos.system == "I":
                sides.append(PrimitiveState(rho=self.states[f"{side}_rho"],
                                            v=v))
            else:
                sides.append(PrimitiveState(n=self.states[f"{side}_n"],
                                            eps=self.states[f"{side}_eps"],
                                            v=v))
        return RiemannProblemSpec(sides[0], sides[1], eos, label="custom")

    def geometry(self):
        return GridGeometry((self.nx, self.ny, self.nz), self.extents)

    def boundaries(self):
        return BoundarySpec(x=self.bc[0], y=self.bc[1], z=self.bc[2])

    def perturbation(self):
        """PerturbationSpec actually applied (None for planar/1D runs)."""
        if self.dim == 1 or self.unperturbed:
            return None
        if self._pert is None:
            if self.bumps is not None:
                self._pert = PerturbationSpec(self.bumps)
            elif self.seed is not None:
                Ly = self.extents[1][1] - self.extents[1][0]
                Lz = self.extents[2][1] - self.extents[2][0]
                self._pert = sample_perturbations(
                    self.seed, count=self.bump_count,
                    amplitude_range=self.amplitude_range,
                    radius_range=self.radius_range, domain=(Ly, Lz))
        return self._pert

    # -- provenance ------------------------------------------------------

    def resolved_lines(self):
        """Canonical key = value dump; parses back to this configuration."""
        g = lambda v: f"{v:.17g}"
        lines = [f"problem = {self.problem}", f"dim = {self.dim}",
                 f"nx = {self.nx}", f"ny = {self.ny}", f"nz = {self.nz}"]
        for (lo, hi), a in zip(self.extents, "xyz"):
            lines += [f"{a}0 = {g(lo)}", f"{a}1 = {g(hi)}"]
        lines += [f"bc_{a} = {k}" for a, k in zip("xyz", self.bc)]
        lines += ["# cfl = auto (scheme default)" if self.cfl is None
                  else f"cfl = {g(self.cfl)}",
                  f"rk = {self.rk}", f"flux = {self.flux}",
                  f"reconstruction = {'on' if self.reconstruction else 'off'}",
                  f"t_end = {g(self.t_end)}",
                  "snapshots = " + ",".join(g(t) for t in self.snapshots),
                  f"unperturbed = {'on' if self.unperturbed else 'off'}",
                  f"out = {self.out}", f"reference = {self.reference}",
                  f"norms_every = {self.norms_every}"]
        if self.problem == "custom":
            lines.append(f"eos = {self.eos_kind}")
            eos = self.eos()
            lines.append(f"cs2 = {g(eos.cs2)}" if eos.system == "I"
                         else f"gamma = {g(eos.gamma)}")
            prob = self.problem_spec()
            for side, st in (("left", prob.left), ("right", prob.right)):
                if eos.system == "I":
                    lines.append(f"{side}_rho = {g(st.rho)}")
                else:
                    lines += [f"{side}_n = {g(st.n)}",
                              f"{side}_eps = {g(st.eps)}"]
                lines += [f"{side}_v{c} = {g(st.v[i])}"
                          for i, c in enumerate("xyz")]
        pert = self.perturbation()
        if self.seed is not None:
            lines.append(f"# sampled from seed = {self.seed}")
        if pert is None or len(pert) == 0:
            lines.append("# perturbations: none")
        else:
            lines += ["bump = " + ",".join(g(v) for v in row)
                      for row in pert.bumps]
        return lines


def parse_config(text, overrides=None):
    """RunConfig from flat key = value text plus optional override pairs.

    ``overrides`` (e.g. from CLI flags) is a mapping of key to raw string
    value applied after the file.  Unknown keys, repeats (except bump),
    and malformed lines are rejected with their line number.
    """
    raw = {}
    bumps = []
    for lineno, line in enumerate(str(text).splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if _SECTION_RE.match(body):
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, "
                              f"got {line.strip()!r}")
        key, _, value = (part.strip() for part in body.partition("="))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key == "bump":
            bumps.append((value, lineno))
        elif key in raw:
            raise ConfigError(f"line {lineno}: repeated key {key!r}")
        else:
            raw[key] = (value, lineno)
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        if key == "bump":
            bumps.append((str(value), 0))
        else:
            raw[key] = (str(value), 0)
    return RunConfig(_typed_values(raw, bumps))


def _typed_values(raw, bumps):
    values = {}

    def take(key, conv, *args):
        if key in raw:
            value, line = raw.pop(key)
            values[key] = conv(key, value, line, *args) \
                if args else conv(key, value, line)

    take("problem", lambda k, v, l: v.strip())
    take("dim", _to_int)
    take("scale", _to_int)
    shape = [None, None, None]
    for i, key in enumerate(("nx", "ny", "nz")):
        if key in raw:
            value, line = raw.pop(key)
            shape[i] = _to_int(key, value, line)
    if any(n is not None for n in shape):
        values["shape"] = tuple(shape)
    extents = list(DEFAULT_EXTENTS)
    touched = False
    for d, a in enumerate("xyz"):
        lo, hi = extents[d]
        if f"{a}0" in raw:
            value, line = raw.pop(f"{a}0")
            lo, touched = _to_float(f"{a}0", value, line), True
        if f"{a}1" in raw:
            value, line = raw.pop(f"{a}1")
            hi, touched = _to_float(f"{a}1", value, line), True
        extents[d] = (lo, hi)
    if touched:
        values["extents"] = tuple(extents)
    bc = ["outflow", "periodic", "periodic"]
    touched = False
    for d, a in enumerate("xyz"):
        if f"bc_{a}" in raw:
            value, line = raw.pop(f"bc_{a}")
            bc[d] = _to_choice(f"bc_{a}", value, line,
                               ("outflow", "periodic"))
            touched = True
    if touched:
        values["bc"] = tuple(bc)
    take("cfl", _to_float)
    take("rk", _to_int)
    take("flux", _to_choice, ("marquina", "hlle"))
    take("reconstruction", _to_bool)
    take("t_end", _to_float)
    if "snapshots" in raw:
        value, line = raw.pop("snapshots")
        parts = [p for p in value.split(",") if p.strip()]
        values["snapshots"] = [_to_float("snapshots", p, line) for p in parts]
    take("seed", _to_int)
    take("bump_count", _to_int)
    amp = [None, None]
    if "amp_min" in raw:
        value, line = raw.pop("amp_min")
        amp[0] = _to_float("amp_min", value, line)
    if "amp_max" in raw:
        value, line = raw.pop("amp_max")
        amp[1] = _to_float("amp_max", value, line)
    if any(a is not None for a in amp):
        values["amplitude_range"] = (
            DEFAULT_AMPLITUDE_RANGE[0] if amp[0] is None else amp[0],
            DEFAULT_AMPLITUDE_RANGE[1] if amp[1] is None else amp[1])
    rad = [None, None]
    if "radius_min" in raw:
        value, line = raw.pop("radius_min")
        rad[0] = _to_float("radius_min", value, line)
    if "radius_max" in raw:
        value, line = raw.pop("radius_max")
        rad[1] = _to_float("radius_max", value, line)
    if any(r is not None for r in rad):
        values["radius_range"] = (
            DEFAULT_RADIUS_RANGE[0] if rad[0] is None else rad[0],
            DEFAULT_RADIUS_RANGE[1] if rad[1] is None else rad[1])
    if bumps:
        rows = []
        for value, line in bumps:
            parts = value.split(",")
            if len(parts) != 4:
                _fail("bump", line,
                      f"expected A,R,ybar,zbar, got {value!r}")
            rows.append([_to_float("bump", p, line) for p in parts])
        values["bumps"] = np.asarray(rows)
    take("unperturbed", _to_bool)
    take("out", lambda k, v, l: v.strip())
    take("reference", _to_choice, ("exact", "numerical1d"))
    take("norms_every", _to_int)
    if "eos" in raw:
        value, line = raw.pop("eos")
        alias = {"I": "ultrarelativistic", "II": "perfect_gas"}
        value = value.strip()
        values["eos_kind"] = alias[value] if value in alias else _to_choice(
            "eos", value, line, ("ultrarelativistic", "perfect_gas"))
    take("cs2", _to_float)
    take("gamma", _to_float)
    states = {}
    for key in _STATE_KEYS:
        if key in raw:
            value, line = raw.pop(key)
            states[key] = _to_float(key, value, line)
    if states:
        values["states"] = states
    assert not raw, f"unconsumed config keys: {sorted(raw)}"
    return values

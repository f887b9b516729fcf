"""Binary grid snapshots and CSV slice export.

Checkpoint layout (little-endian, 104-byte header, then payload):

    bytes  field
    0:8    magic  b"SRRPSNAP"
    8:12   format version (u32, currently 1)
    12:16  system tag (u32: 1 barotropic, 2 perfect gas)
    16:24  EOS parameter (f64: cs2 or gamma)
    24:36  nx, ny, nz (3 x u32)
    36:40  padding (u32, zero)
    40:88  extents x0,x1,y0,y1,z0,z1 (6 x f64)
    88:96  time (f64)
    96:104 step index (u64)
    104:   interior cell data, ncomp*nz*ny*nx f64, x-fastest row-major

The roundtrip is bit-exact; any size/magic/version inconsistency raises
SnapshotError.  Boundary conditions are run configuration, not state, so
they are not stored; pass them to read_snapshot when resuming.
"""

import struct

import numpy as np

from .evolution import GridField, GridGeometry
from .state import EosSpec

MAGIC = b"SRRPSNAP"
VERSION = 1
_HEADER = struct.Struct("<8sIId3II6ddQ")


class SnapshotError(Exception):
    """Unreadable, truncated, or inconsistent snapshot file."""


def write_snapshot(field, path):
    """Write the field's interior, geometry, and metadata to ``path``."""
    geom = field.geometry
    eos = field.eos
    system = 1 if eos.system == "I" else 2
    extents = [v for pair in geom.extents for v in pair]
    header = _HEADER.pack(MAGIC, VERSION, system, eos.param,
                          geom.nx, geom.ny, geom.nz, 0, *extents,
                          field.t, field.step)
    with open(path, "wb") as fh:
        fh.write(header)
        np.ascontiguousarray(field.interior, dtype="<f8").tofile(fh)


def read_snapshot(path, boundaries=None):
    """Reconstruct a GridField from ``path`` (bit-exact inverse of write)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise SnapshotError(f"{path}: truncated header "
                                f"({len(head)} of {_HEADER.size} bytes)")
        (magic, version, system, param, nx, ny, nz, _pad,
         x0, x1, y0, y1, z0, z1, t, step) = _HEADER.unpack(head)
        if magic != MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise SnapshotError(f"{path}: unsupported version {version}")
        if system not in (1, 2):
            raise SnapshotError(f"{path}: unknown system tag {system}")
        eos = (EosSpec.ultrarelativistic(param) if system == 1
               else EosSpec.perfect_gas(param))
        try:
            geometry = GridGeometry((nx, ny, nz),
                                    ((x0, x1), (y0, y1), (z0, z1)))
        except ValueError as err:
            raise SnapshotError(f"{path}: bad geometry ({err})") from None
        want = eos.ncomp * nz * ny * nx
        data = np.frombuffer(fh.read(), dtype="<f8")
        if data.size != want:
            raise SnapshotError(f"{path}: payload has {data.size} values, "
                                f"expected {want}")
    interior = data.reshape(eos.ncomp, nz, ny, nx)
    return GridField.from_interior(interior, geometry, eos, t=t, step=step,
                                   boundaries=boundaries)


def write_slice_csv(field, path, z=None):
    """CSV of a z = const plane: rows x,y,e,n,vy (n is rho for system I).

    ``z`` selects the nearest cell plane; default is the domain middle.
    """
    geom = field.geometry
    zc = geom.centers("z")
    iz = int(np.argmin(np.abs(zc - (z if z is not None
                                    else 0.5 * sum(geom.extents[2])))))
    prims = field.recover_primitives()
    e = field.interior[0, iz]
    den = prims["rho" if field.eos.system == "I" else "n"][iz]
    vy = prims["v"][1, iz]
    x = geom.centers("x")
    y = geom.centers("y")
    with open(path, "w") as fh:
        fh.write(f"# z = {zc[iz]:.17g}\n")
        fh.write("x,y,e,n,vy\n")
        for iy in range(geom.ny):
            for ix in range(geom.nx):
                fh.write(f"{x[ix]:.17g},{y[iy]:.17g},{e[iy, ix]:.17g},"
                         f"{den[iy, ix]:.17g},{vy[iy, ix]:.17g}\n")

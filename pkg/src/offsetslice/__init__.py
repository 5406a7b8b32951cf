"""Direct slicing of dilated and eroded triangle-mesh volumes."""

from .contour import (
    Bitmap,
    BitmapSpec,
    ChainError,
    Contour,
    ContourSet,
    Segment2,
    accumulate_divide_conquer,
    accumulate_progressive,
    rasterize_winding,
    reverse_contours,
    segments_to_contours,
    winding_extract,
)
from .engine import (
    EngineConfig,
    OffsetSpec,
    SlabConfig,
    SlicePlan,
    SliceResult,
    affected_slices,
    bisect_height,
    slice_offset,
    slice_single,
)
from .mesh import (
    IndexedMesh,
    MeshError,
    ZInterval,
    load_stl,
    mesh_bounds,
    mesh_from_soup,
    mesh_to_soup,
    triangle_z_interval,
)

__version__ = "0.1.0"

__all__ = [
    "Bitmap",
    "BitmapSpec",
    "ChainError",
    "Contour",
    "ContourSet",
    "EngineConfig",
    "IndexedMesh",
    "MeshError",
    "OffsetSpec",
    "Segment2",
    "SlabConfig",
    "SlicePlan",
    "SliceResult",
    "ZInterval",
    "accumulate_divide_conquer",
    "accumulate_progressive",
    "affected_slices",
    "bisect_height",
    "load_stl",
    "mesh_bounds",
    "mesh_from_soup",
    "mesh_to_soup",
    "rasterize_winding",
    "reverse_contours",
    "segments_to_contours",
    "slice_offset",
    "slice_single",
    "triangle_z_interval",
    "winding_extract",
    "__version__",
]

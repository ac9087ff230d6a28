"""XML scene descriptors: one shape entry per placed mesh.

The descriptor stores everything needed to rebuild a scene: frame
origin, boundary ring, shape entries (mesh file, translation, material
name), antennas, and devices.  Mesh files are referenced relative to the
descriptor's directory so a dataset stays relocatable.  In-memory meshes
without a backing file are materialized into a meshes/ directory next to
the descriptor; the ground plane is stored as a flag and rebuilt on load.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET

import numpy as np

from ..errors import NotFoundError, ParseError, SchemaError
from ..geodesy import GeoCoord, LocalFrame
from ..ingest import AntennaRecord, read_ply, write_ply
from .materials import MaterialTable, default_materials
from .scene import GROUND_MODEL_ID, PlacedModel, RadioDevice, Scene, Sector, add_ground_plane

DESCRIPTOR_VERSION = "1"


def _f(value: float) -> str:
    return repr(float(value))


def write_descriptor(scene: Scene, path) -> str:
    """Write the scene as XML; returns the path written.

    Catalog-backed meshes are referenced in place; generated meshes are
    written next to the descriptor under meshes/.
    """
    path = str(path)
    base = os.path.dirname(os.path.abspath(path))
    root = ET.Element("scene", name=scene.name, version=DESCRIPTOR_VERSION)
    ET.SubElement(
        root,
        "frame",
        lon=_f(scene.frame.origin.lon),
        lat=_f(scene.frame.origin.lat),
        alt=_f(scene.frame.origin.alt),
    )
    boundary = ET.SubElement(root, "boundary")
    for x, y in scene.boundary:
        ET.SubElement(boundary, "point", x=_f(x), y=_f(y))

    ground = None
    for m in scene.models:
        if m.model_id == GROUND_MODEL_ID:
            ground = m
            continue
        mesh_file = m.mesh_file
        if not mesh_file:
            mesh_file = os.path.join(base, "meshes", f"{m.model_id}.ply")
            os.makedirs(os.path.dirname(mesh_file), exist_ok=True)
            write_ply(mesh_file, m.mesh)
        shape = ET.SubElement(
            root,
            "shape",
            id=m.model_id,
            type=m.model_type,
            lod=str(m.lod),
            file=os.path.relpath(mesh_file, base).replace(os.sep, "/"),
            material=m.material.name,
        )
        t = m.translation
        ET.SubElement(shape, "translate", x=_f(t[0]), y=_f(t[1]), z=_f(t[2]))
    if ground is not None:
        ET.SubElement(root, "ground", material=ground.material.name)

    for a in scene.antennas:
        el = ET.SubElement(
            root,
            "antenna",
            id=a.antenna_id,
            lon=_f(a.position.lon),
            lat=_f(a.position.lat),
        )
        if a.pole_type is not None:
            el.set("pole_type", a.pole_type)
        if a.source:
            el.set("source", a.source)

    for d in scene.devices:
        el = ET.SubElement(
            root,
            "device",
            id=d.device_id,
            role=d.role,
            x=_f(d.position[0]),
            y=_f(d.position[1]),
            z=_f(d.position[2]),
            source=d.source,
        )
        for s in d.sectors:
            ET.SubElement(
                el,
                "sector",
                azimuth=_f(s.azimuth_deg),
                width=_f(s.width_deg),
                downtilt=_f(s.downtilt_deg),
            )

    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write("\n")
    return path


def _req(el: ET.Element, attr: str, path: str) -> str:
    val = el.get(attr)
    if val is None:
        raise SchemaError(f"{path}: <{el.tag}> is missing attribute {attr!r}")
    return val


def load_descriptor(path, materials: "MaterialTable | None" = None) -> Scene:
    """Load a descriptor back into a Scene; inverse of write_descriptor."""
    path = str(path)
    base = os.path.dirname(os.path.abspath(path))
    table = materials if materials is not None else default_materials()
    try:
        root = ET.parse(path).getroot()
    except OSError as exc:
        raise NotFoundError(f"descriptor not found: {exc}")
    except ET.ParseError as exc:
        raise ParseError(f"bad XML: {exc}", path=path, line=exc.position[0])
    if root.tag != "scene":
        raise SchemaError(f"{path}: root element must be <scene>, got <{root.tag}>")

    frame_el = root.find("frame")
    if frame_el is None:
        raise SchemaError(f"{path}: missing <frame>")
    origin = GeoCoord(
        float(_req(frame_el, "lon", path)),
        float(_req(frame_el, "lat", path)),
        float(frame_el.get("alt", "0.0")),
    )
    boundary_el = root.find("boundary")
    if boundary_el is None or len(boundary_el) < 3:
        raise SchemaError(f"{path}: missing or too-short <boundary>")
    ring = np.array(
        [[float(_req(p, "x", path)), float(_req(p, "y", path))] for p in boundary_el]
    )
    scene = Scene(name=root.get("name", os.path.basename(path)), frame=LocalFrame(origin=origin), boundary=ring)

    def lookup_material(name: str, entry: str):
        if name not in table:
            raise NotFoundError(f"{path}: {entry}: material {name!r} unknown", available=sorted(table))
        return table[name]

    for shape in root.findall("shape"):
        model_id = _req(shape, "id", path)
        entry = f"shape {model_id!r}"
        rel = _req(shape, "file", path)
        mesh_file = os.path.normpath(os.path.join(base, rel))
        if not os.path.exists(mesh_file):
            raise NotFoundError(f"{path}: {entry}: mesh file {rel!r} not found")
        tr_el = shape.find("translate")
        if tr_el is None:
            raise SchemaError(f"{path}: {entry}: missing <translate>")
        scene.models.append(
            PlacedModel(
                model_id=model_id,
                model_type=shape.get("type", ""),
                lod=int(shape.get("lod", "0")),
                mesh=read_ply(mesh_file),
                translation=np.array(
                    [float(_req(tr_el, a, path)) for a in ("x", "y", "z")]
                ),
                material=lookup_material(_req(shape, "material", path), entry),
                mesh_file=mesh_file,
            )
        )

    for a in root.findall("antenna"):
        scene.antennas.append(
            AntennaRecord(
                antenna_id=_req(a, "id", path),
                position=GeoCoord(float(_req(a, "lon", path)), float(_req(a, "lat", path))),
                pole_type=a.get("pole_type"),
                source=a.get("source", ""),
            )
        )

    for d in root.findall("device"):
        scene.devices.append(
            RadioDevice(
                device_id=_req(d, "id", path),
                role=_req(d, "role", path),
                position=np.array([float(_req(d, a, path)) for a in ("x", "y", "z")]),
                sectors=[
                    Sector(
                        float(_req(s, "azimuth", path)),
                        float(_req(s, "width", path)),
                        float(s.get("downtilt", "0.0")),
                    )
                    for s in d.findall("sector")
                ],
                source=d.get("source", "custom"),
            )
        )

    ground_el = root.find("ground")
    if ground_el is not None:
        add_ground_plane(scene, lookup_material(_req(ground_el, "material", path), "ground"))
    return scene

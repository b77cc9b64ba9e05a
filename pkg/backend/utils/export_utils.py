import os
import csv
import json
import tempfile

import numpy as np
from fpdf import FPDF

import config
from errors import IOFailure


def _safe_filename(s: str):
    return "".join(c for c in s if c.isalnum() or c in (" ", "-", "_")).rstrip().replace(" ", "_")


def default_path(kind: str, run_id: str, ext: str) -> str:
    """<EXPORT_DIR>/<kind>_<run_id>.<ext>"""
    os.makedirs(config.EXPORT_DIR, exist_ok=True)
    return os.path.join(config.EXPORT_DIR, f"{_safe_filename(kind)}_{_safe_filename(run_id)}.{ext}")


def _atomic_write(destination, write, binary=False):
    """Write through a temp file in the same directory, then rename over the destination."""
    destination = os.path.abspath(destination)
    folder = os.path.dirname(destination)
    try:
        os.makedirs(folder, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp_", suffix=os.path.splitext(destination)[1])
        try:
            with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": "\n"})) as fh:
                write(fh)
            os.replace(tmp, destination)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
    except OSError as e:
        raise IOFailure(f"cannot write {destination}: {e}", path=destination)
    return destination


# ------------------------------
# Geometry
# ------------------------------
def write_obj(destination, vertices, triangles, cone_tags=()) -> str:
    """
    Wavefront OBJ: "v x1 x2 x3" with 9 decimals, 1-indexed triangle faces and
    one "# cone i up|down" comment per tagged vertex (i 1-indexed).
    """
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=int).reshape(-1, 3)

    def write(fh):
        fh.write("# maximal graph mesh\n")
        fh.write(f"# vertices {len(vertices)} faces {len(triangles)}\n")
        for k, direction in cone_tags:
            fh.write(f"# cone {k + 1} {direction}\n")
        for x in vertices:
            fh.write("v %.9f %.9f %.9f\n" % (x[0], x[1], x[2]))
        for t in triangles + 1:
            fh.write("f %d %d %d\n" % (t[0], t[1], t[2]))

    return _atomic_write(destination, write)


def write_ply(destination, vertices, triangles) -> str:
    """Binary little-endian PLY with double vertices, same vertex order as the OBJ."""
    vertices = np.asarray(vertices, dtype="<f8").reshape(-1, 3)
    triangles = np.asarray(triangles, dtype="<i4").reshape(-1, 3)
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(vertices)}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {len(triangles)}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    faces = np.zeros(len(triangles), dtype=[("n", "u1"), ("idx", "<i4", (3,))])
    faces["n"] = 3
    faces["idx"] = triangles

    def write(fh):
        fh.write(header.encode("ascii"))
        fh.write(vertices.tobytes())
        fh.write(faces.tobytes())

    return _atomic_write(destination, write, binary=True)


# ------------------------------
# Reports
# ------------------------------
def write_json_report(destination, report: dict) -> str:
    return _atomic_write(destination, lambda fh: fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n"))


def export_cone_csv(destination, cones: list) -> str:
    """
    One row per cone-like singularity from the report's cone list.
    """
    def write(fh):
        writer = csv.writer(fh)
        writer.writerow(["Interval", "Axis", "Sign", "Direction", "Expected", "Reversed convention",
                         "Apex x1", "Apex x2", "Apex x3", "Nondegenerate", "Embedded (proxy)"])
        for c in cones:
            comp = c.get("component", {})
            apex = c.get("apex") or ["", "", ""]
            writer.writerow([
                comp.get("label", ""), comp.get("axis", ""), comp.get("sign", ""),
                c.get("direction", ""), c.get("expected_direction", ""), c.get("reversed_convention_direction", ""),
                *apex, c.get("nondegenerate", ""), c.get("embedded_neighborhood_check", ""),
            ])

    return _atomic_write(destination, write)


def generate_report_pdf(destination, report: dict) -> str:
    """
    Basic one-page summary of a verification report.
    """
    pdf = FPDF()
    pdf.set_auto_page_break(auto=True, margin=12)
    pdf.add_page()
    pdf.set_font("Helvetica", "B", 16)
    pdf.cell(0, 10, "Verification Report", ln=True, align="C")
    pdf.ln(6)

    params = report.get("params", {})
    pdf.set_font("Helvetica", "", 12)
    pdf.cell(0, 8, f"Type: ({params.get('m', '-')}, {params.get('n', '-')})", ln=True)
    pdf.cell(0, 8, f"a: {params.get('a', [])}", ln=True)
    pdf.cell(0, 8, f"b: {params.get('b', [])}", ln=True)
    pdf.cell(0, 8, f"Tolerance level: {report.get('tol_level', '-')}", ln=True)
    pdf.cell(0, 8, f"Overall: {'PASS' if report.get('passed') else 'FAIL'}", ln=True)
    pdf.ln(6)

    pdf.set_font("Helvetica", "B", 14)
    pdf.cell(0, 8, "Checks:", ln=True)
    pdf.set_font("Helvetica", "", 11)
    checks = report.get("checks") or {}
    if checks:
        for name in sorted(checks):
            entry = checks[name]
            passed = entry.get("passed") if isinstance(entry, dict) else entry
            pdf.cell(0, 6, f"- {name}: {'pass' if passed else 'FAIL'}", ln=True)
    else:
        pdf.cell(0, 6, "No checks recorded.", ln=True)

    pdf.ln(6)
    pdf.set_font("Helvetica", "B", 14)
    pdf.cell(0, 8, "Cone-like singularities:", ln=True)
    pdf.set_font("Helvetica", "", 11)
    cones = report.get("cones") or []
    if cones:
        for c in cones:
            label = c.get("component", {}).get("label", "")
            pdf.cell(0, 6, f"- {label}: {c.get('direction', '')} (expected: {c.get('expected_direction', '')})", ln=True)
    else:
        pdf.cell(0, 6, "No cones classified.", ln=True)

    def write(fh):
        fh.write(bytes(pdf.output()))

    return _atomic_write(destination, write, binary=True)

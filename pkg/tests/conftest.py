import pytest

from pipeflow.geometry import disk, make_section
from pipeflow.mesh import mesh_at_level, polar_mesh, refine


@pytest.fixture(scope="session")
def unit_disk():
    return disk()


@pytest.fixture(scope="session")
def ellipse_like():
    return make_section("StarShaped", 1.0, [[2, 0.1, 0.0]])


@pytest.fixture(scope="session")
def three_lobe():
    return make_section("StarShaped", 1.0, [[3, 0.15, 0.0]])


@pytest.fixture(scope="session")
def disk_levels(unit_disk):
    """Base (4 rings, 16 sectors) disk mesh and three refinements."""
    meshes = [polar_mesh(unit_disk, 4, 16)]
    for _ in range(3):
        meshes.append(refine(meshes[-1]))
    return meshes


@pytest.fixture(scope="session")
def disk_mesh(disk_levels):
    # level 2: 16 rings x 64 sectors worth of resolution
    return disk_levels[2]


@pytest.fixture(scope="session")
def lobe_mesh(three_lobe):
    return mesh_at_level(three_lobe, 4, 16, 2)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for report in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", []):
        for key, value in getattr(report, "user_properties", []):
            if key == "criterion":
                status = "PASS" if report.passed else "FAIL"
                lines.append((value[0], f"[{status}] {value[0]}: {value[1]}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

"""Independent topological-order checker for decomposition plans.

Works on the raw plan JSON shape; imports nothing from the package.
"""


def topologically_valid(plan: dict) -> bool:
    seen = set()
    names = [s["name"] for s in plan.get("sub_functions", [])]
    if len(names) != len(set(names)) or not names:
        return False
    for sub in plan["sub_functions"]:
        for dep in sub.get("depends_on", []):
            if dep not in seen:
                return False
        seen.add(sub["name"])
    return True


def walk_manifest(manifest: dict) -> list:
    """Section ids in manifest order, independent of the loader."""
    return [rec["section_id"] for rec in manifest.get("sections", [])]

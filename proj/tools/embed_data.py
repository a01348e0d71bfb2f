#!/usr/bin/env python3
"""Regenerate include/agentlint/data/*.hpp from data/*.json."""
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
FILES = {"markers.json": "kMarkersJson", "registry.json": "kRegistryJson", "python_stdlib.json": "kStdlibJson"}
DELIM = "agentlint_json"

for name, symbol in FILES.items():
    body = (ROOT / "data" / name).read_text(encoding="utf-8")
    assert ")" + DELIM + '"' not in body
    out = ROOT / "include" / "agentlint" / "data" / (name.replace(".json", ".hpp"))
    out.write_text(
        "#pragma once\n\n"
        "// generated by tools/embed_data.py from data/" + name + "; do not edit\n\n"
        "#include <string_view>\n\n"
        "namespace agentlint::data {\n\n"
        "inline constexpr std::string_view " + symbol + " = R\"" + DELIM + "(" + body + ")" + DELIM + "\";\n\n"
        "}  // namespace agentlint::data\n",
        encoding="utf-8")
    print("wrote", out.relative_to(ROOT))

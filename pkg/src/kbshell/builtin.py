"""The bundled Sanjeevani knowledge base.

Ships embedded in the package as `kbs/sanjeevani.kb` and doubles as the
reference corpus for end-to-end tests. The advice bodies are sample
content, not medical advice.
"""

from __future__ import annotations

from importlib import resources

from .model import KnowledgeBase
from .parser import parse_kb

SANJEEVANI = "sanjeevani"

# Which treatment section serves each diabetesop value.
TREATMENT_SECTIONS = {
    "naturalcare": "treatdiabetesnatural",
    "acupuncture": "treatdiabetesacupuncture",
    "homeopathic": "treatdiabeteshomeopathic",
    "massage": "treatdiabetesmassage",
    "gems": "treatdiabetesgems",
}

_cached: KnowledgeBase | None = None


def builtin_source() -> str:
    """The embedded `.kb` source text, exactly as packaged."""
    return resources.files("kbshell").joinpath("kbs/sanjeevani.kb").read_text("utf-8")


def builtin_kb() -> KnowledgeBase:
    """Parse (once) and return the embedded knowledge base."""
    global _cached
    if _cached is None:
        result = parse_kb(builtin_source())
        if result.diagnostics:
            # The packaged KB is verified clean by the test suite; hitting
            # this means a corrupted installation.
            raise RuntimeError(
                "embedded sanjeevani.kb failed to parse: "
                + "; ".join(d.render("sanjeevani.kb") for d in result.diagnostics))
        _cached = result.kb
    return _cached

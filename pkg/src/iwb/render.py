"""Subprocess screenshot renderer contract.

A renderer is any command template containing ``{input}`` (HTML file) and
``{output}`` (PNG file) placeholders, e.g. a headless-browser wrapper.
The template is argv-split without a shell and the placeholders are
substituted per token, so paths with spaces survive.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path


class RendererFailure(RuntimeError):
    """Renderer exited nonzero, timed out, or produced no output image."""

    def __init__(self, message: str, log=None) -> None:
        super().__init__(message)
        self.log = log


@dataclass
class RendererCommand:
    command_template: str
    timeout_seconds: int = 60

    def __post_init__(self) -> None:
        for placeholder in ("{input}", "{output}"):
            if self.command_template.count(placeholder) != 1:
                raise ValueError(
                    f"renderer template must contain {placeholder} exactly once: "
                    f"{self.command_template!r}"
                )

    def argv(self, input_path: str | Path, output_path: str | Path) -> list[str]:
        return [
            token.replace("{input}", str(input_path)).replace("{output}", str(output_path))
            for token in shlex.split(self.command_template)
        ]


def render_file(cmd: RendererCommand, html_path: str | Path, image_path: str | Path) -> Path:
    """Run the renderer on an HTML file; returns the output image path."""
    image_path = Path(image_path)
    argv = cmd.argv(html_path, image_path)
    try:
        proc = subprocess.run(
            argv,
            capture_output=True,
            timeout=cmd.timeout_seconds,
        )
    except subprocess.TimeoutExpired as exc:
        raise RendererFailure(f"renderer timed out after {cmd.timeout_seconds}s: {argv}") from exc
    except OSError as exc:
        raise RendererFailure(f"renderer could not be executed: {argv}: {exc}") from exc
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise RendererFailure(f"renderer exited {proc.returncode}: {stderr[:500]}")
    if not image_path.exists():
        raise RendererFailure(f"renderer produced no output image at {image_path}")
    return image_path


def render_html(cmd: RendererCommand, html_text: str, workdir: str | Path, stem: str) -> Path:
    """Write html_text under workdir and render it to ``<stem>.png``."""
    workdir = Path(workdir)
    html_path = workdir / f"{stem}.html"
    html_path.write_text(html_text, encoding="utf-8")
    return render_file(cmd, html_path, workdir / f"{stem}.png")

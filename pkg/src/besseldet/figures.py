"""Figure rendering for the batch front-end: one PNG per command next
to the delimited output.  Strictly opt-in and purely descriptive; the
CSV/JSON files stay the canonical results."""

from __future__ import annotations

import os


class FigureError(RuntimeError):
    """Figure output could not be written."""


def render_figures(payload: dict, directory: str) -> str:
    """Render the command's result table to <directory>/<command>.png
    and return the path."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    command = payload["command"]
    columns = payload["columns"]
    rows = payload["rows"]
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise FigureError(f"cannot create {directory}: {exc}") from exc
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if command in ("rate-scan", "trace-scan") and rows:
        radii = [row[0] for row in rows]
        ax.loglog(radii, [row[1] for row in rows], "o-", label="value")
        ax.loglog(radii, [row[2] for row in rows], "--", label="envelope")
        ax.set_xlabel("R")
        ax.set_ylabel(columns[1])
        ax.legend()
    elif command == "verify-identity" and rows:
        radii = [row[0] for row in rows]
        ax.semilogy(radii, [max(row[4], 1e-17) for row in rows], "o-")
        ax.set_xlabel("R")
        ax.set_ylabel("relative residual")
    elif command == "clt" and payload.get("reports"):
        for report in payload["reports"]:
            ax.plot(
                report["cdf_grid"], report["cdf_values"], label=f"R={report['R']:g}"
            )
        ax.plot(
            payload["reports"][0]["cdf_grid"],
            payload["reports"][0]["normal_values"],
            "k--",
            label="normal",
        )
        ax.set_xlabel("x")
        ax.set_ylabel("F(x)")
        ax.legend()
    elif command == "sample" and rows:
        ax.plot([row[1] for row in rows], [row[0] for row in rows], ".", markersize=2)
        ax.set_xlabel("point")
        ax.set_ylabel("configuration")
    elif command == "selftest" and rows:
        ax.semilogy([max(row[2], 1e-18) for row in rows], ".", markersize=2)
        ax.set_xlabel("check index")
        ax.set_ylabel("residual")
    else:
        ax.bar(range(len(rows[0]) if rows else 0), rows[0] if rows else [])
        ax.set_xticks(range(len(columns)))
        ax.set_xticklabels(columns, rotation=45, ha="right")
    ax.set_title(command)
    fig.tight_layout()
    target = os.path.join(directory, f"{command}.png")
    try:
        fig.savefig(target, dpi=300)
    except OSError as exc:
        raise FigureError(f"cannot write {target}: {exc}") from exc
    finally:
        plt.close(fig)
    return target

"""Dependency-free SVG figures with fixed axes, so outputs diff cleanly."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

W, H = 480, 360
MARGIN = 50

SWEEP_X = (0.0, 0.7)
SWEEP_Y = (-0.5, 2.5)


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, xlim, ylim, width=W, height=H):
        self.xlim, self.ylim = xlim, ylim
        self.width, self.height = width, height
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        x0, x1 = self.xlim
        return MARGIN + (x - x0) / (x1 - x0) * (self.width - 2 * MARGIN)

    def py(self, y: float) -> float:
        y0, y1 = self.ylim
        return self.height - MARGIN - (y - y0) / (y1 - y0) * (self.height - 2 * MARGIN)

    def add(self, element: str) -> None:
        self.parts.append(element)

    def polyline(self, xs, ys, color, dash=None, width=1.5):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'
        )

    def line(self, x0, y0, x1, y1, color="#000", dash=None, width=1.0):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{_f(self.px(x0))}" y1="{_f(self.py(y0))}" x2="{_f(self.px(x1))}" '
            f'y2="{_f(self.py(y1))}" stroke="{color}" stroke-width="{width}"{extra}/>'
        )

    def text(self, x, y, s, anchor="middle", size=11, raw=False):
        X, Y = (x, y) if raw else (self.px(x), self.py(y))
        self.add(
            f'<text x="{_f(X)}" y="{_f(Y)}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif">{escape(s)}</text>'
        )

    def frame(self, xlabel, ylabel, xticks, yticks):
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        self.add(
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{self.width - 2 * MARGIN}" '
            f'height="{self.height - 2 * MARGIN}" fill="none" stroke="#000"/>'
        )
        for t in xticks:
            self.line(t, y0, t, y0 + 0.02 * (y1 - y0))
            self.text(self.px(t), self.height - MARGIN + 14, f"{t:g}", raw=True)
        for t in yticks:
            self.line(x0, t, x0 + 0.015 * (x1 - x0), t)
            self.text(MARGIN - 6, self.py(t) + 4, f"{t:g}", anchor="end", raw=True)
        self.text(self.width / 2, self.height - 12, xlabel, raw=True)
        self.add(
            f'<text x="14" y="{_f(self.height / 2)}" font-size="11" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_f(self.height / 2)})">'
            f"{escape(ylabel)}</text>"
        )

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'
        )


def sweep_figure(theta, curve, points, thresholds) -> str:
    """Analytic violation curves with Monte Carlo points and 1-sigma bars.

    ``curve`` is (mu, ell, tau) sequences; ``points`` rows are
    (mu, ell, tau, ell_std, tau_std); ``thresholds`` is (mu_ell, mu_tau).
    """
    cv = _Canvas(SWEEP_X, SWEEP_Y)
    cv.frame("dephasing factor mu", "maximal violation", [0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
             [-0.5, 0, 0.5, 1, 1.5, 2, 2.5])
    cv.line(SWEEP_X[0], 0.0, SWEEP_X[1], 0.0, color="#888", width=0.8)
    for mu_th in thresholds:
        if SWEEP_X[0] <= mu_th <= SWEEP_X[1]:
            cv.line(mu_th, SWEEP_Y[0], mu_th, SWEEP_Y[1], color="#666", dash="2,3", width=0.8)
    mus, ells, taus = curve
    cv.polyline(mus, ells, "#1f5fbf")
    cv.polyline(mus, taus, "#c0392b", dash="6,3")
    for mu, ell, tau, ell_std, tau_std in points:
        for val, std, color in ((ell, ell_std, "#1f5fbf"), (tau, tau_std, "#c0392b")):
            if not (math.isfinite(val) and SWEEP_Y[0] <= val <= SWEEP_Y[1]):
                continue
            if math.isfinite(std) and std > 0:
                cv.line(mu, max(SWEEP_Y[0], val - std), mu, min(SWEEP_Y[1], val + std), color=color)
            cv.add(f'<circle cx="{_f(cv.px(mu))}" cy="{_f(cv.py(val))}" r="3" fill="{color}"/>')
    cv.text(0.69, 2.35, f"theta = {theta:.6g} rad", anchor="end")
    cv.text(0.69, 2.2, "linear (solid), determinant (dashed)", anchor="end", size=9)
    return cv.render()


def disc_figure(title, raw, primary, secondary) -> str:
    """Raw / primary / secondary preparations in the x-z plane of the Bloch ball.

    Each argument is a sequence of (x, z) Bloch coordinates.
    """
    cv = _Canvas((-1.15, 1.15), (-1.15, 1.15), width=400, height=400)
    cv.frame("x", "z", [-1, -0.5, 0, 0.5, 1], [-1, -0.5, 0, 0.5, 1])
    r = cv.px(1.0) - cv.px(0.0)
    cv.add(
        f'<circle cx="{_f(cv.px(0))}" cy="{_f(cv.py(0))}" r="{_f(r)}" fill="none" stroke="#999"/>'
    )
    cv.line(-1, 0, 1, 0, color="#ccc", width=0.6)
    cv.line(0, -1, 0, 1, color="#ccc", width=0.6)
    for x, z in raw:
        X, Y = cv.px(x), cv.py(z)
        cv.add(
            f'<polygon points="{_f(X)},{_f(Y - 5)} {_f(X - 4.5)},{_f(Y + 3.5)} {_f(X + 4.5)},{_f(Y + 3.5)}" '
            f'fill="none" stroke="#1f77b4"/>'
        )
    for x, z in primary:
        cv.add(f'<circle cx="{_f(cv.px(x))}" cy="{_f(cv.py(z))}" r="3" fill="#ff7f0e"/>')
    for x, z in secondary:
        cv.add(
            f'<rect x="{_f(cv.px(x) - 3)}" y="{_f(cv.py(z) - 3)}" width="6" height="6" '
            f'fill="none" stroke="#2ca02c"/>'
        )
    cv.text(200, 30, title, raw=True, size=12)
    return cv.render()

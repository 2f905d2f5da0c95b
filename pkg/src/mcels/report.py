"""Static SVG bar charts and a markdown table from aggregate CSV rows."""

from xml.sax.saxutils import escape

CHART_METRICS = (
    ("mean_target_prob", "Target probability (higher is better)"),
    ("mean_l1", "L1 distance (lower is better)"),
    ("mean_sparsity", "Sparsity (higher is better)"),
)

_COLORS = ("#4878cf", "#ee854a", "#6acc65", "#d65f5f", "#956cb4", "#8c613c")

_PLOT_HEIGHT = 240
_BAR_WIDTH = 46
_BAR_GAP = 10
_GROUP_GAP = 40
_MARGIN_LEFT = 50
_MARGIN_TOP = 40
_MARGIN_BOTTOM = 60


def bar_chart_svg(title, groups):
    """Grouped bar chart.

    groups: list of (group_label, [(bar_label, value), ...]).
    Bar heights are proportional to values; each bar carries its numeric
    value both as a text label and a data-value attribute.
    """
    if not groups:
        raise ValueError("no data to plot")
    values = [v for _, bars in groups for _, v in bars]
    peak = max(max(values), 1e-12)
    methods = []
    for _, bars in groups:
        for label, _ in bars:
            if label not in methods:
                methods.append(label)

    x = _MARGIN_LEFT
    body = []
    for group_label, bars in groups:
        group_start = x
        for bar_label, value in bars:
            height = _PLOT_HEIGHT * value / peak
            y = _MARGIN_TOP + _PLOT_HEIGHT - height
            color = _COLORS[methods.index(bar_label) % len(_COLORS)]
            body.append(
                f'<rect class="bar" x="{x:.1f}" y="{y:.1f}" '
                f'width="{_BAR_WIDTH}" height="{height:.4f}" fill="{color}" '
                f'data-value="{value!r}"/>'
            )
            body.append(
                f'<text x="{x + _BAR_WIDTH / 2:.1f}" y="{y - 4:.1f}" '
                f'font-size="10" text-anchor="middle">{value:.3f}</text>'
            )
            x += _BAR_WIDTH + _BAR_GAP
        center = (group_start + x - _BAR_GAP) / 2
        body.append(
            f'<text x="{center:.1f}" y="{_MARGIN_TOP + _PLOT_HEIGHT + 16}" '
            f'font-size="11" text-anchor="middle">{escape(group_label)}</text>'
        )
        x += _GROUP_GAP
    width = x - _GROUP_GAP + _MARGIN_LEFT

    legend = []
    for i, method in enumerate(methods):
        lx = _MARGIN_LEFT + i * 120
        ly = _MARGIN_TOP + _PLOT_HEIGHT + 36
        color = _COLORS[i % len(_COLORS)]
        legend.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        legend.append(f'<text x="{lx + 14}" y="{ly}" font-size="11">{escape(method)}</text>')

    height_total = _MARGIN_TOP + _PLOT_HEIGHT + _MARGIN_BOTTOM
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{max(width, 320)}" '
        f'height="{height_total}">',
        f'<text x="{_MARGIN_LEFT}" y="20" font-size="14">{escape(title)}</text>',
        f'<line x1="{_MARGIN_LEFT - 6}" y1="{_MARGIN_TOP + _PLOT_HEIGHT}" '
        f'x2="{max(width, 320) - 10}" y2="{_MARGIN_TOP + _PLOT_HEIGHT}" '
        'stroke="#444" stroke-width="1"/>',
        *body,
        *legend,
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def reports_to_groups(reports, metric):
    """Reorder aggregate rows into (dataset, [(method, value)]) groups."""
    datasets = []
    for report in reports:
        if report.dataset not in datasets:
            datasets.append(report.dataset)
    groups = []
    for dataset in datasets:
        bars = [(r.method, getattr(r, metric)) for r in reports if r.dataset == dataset]
        groups.append((dataset, bars))
    return groups


def markdown_summary(reports):
    lines = [
        "| dataset | method | n | validity_rate | mean_target_prob | mean_l1 | mean_sparsity |",
        "|---|---|---|---|---|---|---|",
    ]
    for r in reports:
        lines.append(
            f"| {r.dataset} | {r.method} | {r.n} | {r.validity_rate:.4f} "
            f"| {r.mean_target_prob:.4f} | {r.mean_l1:.4f} | {r.mean_sparsity:.4f} |"
        )
    return "\n".join(lines) + "\n"

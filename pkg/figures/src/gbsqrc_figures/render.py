"""Figure construction: one builder per figure id.

Every builder is a pure function of the CSV directory.  Rendering is pinned
to the Agg backend with fixed size, dpi, and fonts so a re-render of the same
inputs is byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .loader import SchemaError, column, load_table, where  # noqa: E402

RC = {
    "figure.figsize": (9.0, 7.0),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4,
}


def _uniq(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def _capacity_summary(table, sweep_col, dtype=float):
    """One (sweep value, C_direct, C_norm or None, W) tuple per sweep point."""
    points = []
    for value in _uniq(table[sweep_col]):
        sub = where(table, **{sweep_col: value})
        c_norm = sub["C_norm_bits"][0]
        points.append((dtype(value),
                       float(sub["C_direct_bits"][0]),
                       float(c_norm) if c_norm != "" else None,
                       float(sub["W_bits"][0])))
    return points


def _plot_eps_curves(ax, table, group_col, label_fmt):
    for value in _uniq(table[group_col]):
        sub = where(table, **{group_col: value})
        ax.semilogy(column(sub, "N", int), column(sub, "eps_mean"),
                    marker="o", label=label_fmt.format(value))
    ax.set_xlabel("N random labellings")
    ax.set_ylabel("training error eps(N)")
    ax.legend(fontsize=7)


def build_fig2(in_dir):
    nw = load_table(in_dir, "capacity-vs-nw",
                    ("n_w", "N", "eps_mean", "C_direct_bits", "C_norm_bits",
                     "W_bits"))
    ns = load_table(in_dir, "capacity-vs-ns",
                    ("n_s", "C_direct_bits", "W_bits"))
    noise = load_table(in_dir, "capacity-vs-noise",
                       ("noise_amplitude", "C_direct_bits", "W_bits"))
    fig, axes = plt.subplots(2, 2)
    (ax_a, ax_b), (ax_c, ax_d) = axes

    _plot_eps_curves(ax_a, nw, "n_w", "N_w = {}")
    ax_a.set_title("memorization transition")

    points = _capacity_summary(nw, "n_w", int)
    n_ws = [p[0] for p in points]
    eps_p = points[0][3] / points[0][0]  # W = N_w * eps_p
    ax_b.plot(n_ws, [p[1] / eps_p for p in points], "o-", label="C_direct")
    norm = [(n, c / eps_p) for n, _, c, _ in points if c is not None]
    if norm:
        ax_b.plot([n for n, _ in norm], [c for _, c in norm], "s-",
                  label="C_normalized")
    ax_b.plot(n_ws, n_ws, "k--", lw=0.8, label="C = W")
    ax_b.set_xlabel("read-out features N_w")
    ax_b.set_ylabel("capacity (units of eps_p)")
    ax_b.set_title("capacity vs parameters")
    ax_b.legend(fontsize=7)

    for ax, table, col, title in ((ax_c, ns, "n_s", "capacity vs shots"),
                                  (ax_d, noise, "noise_amplitude",
                                   "capacity vs read-out noise")):
        pts = _capacity_summary(table, col)
        ax.semilogx([p[0] for p in pts], [p[1] for p in pts], "o-",
                    label="C_direct")
        ax.semilogx([p[0] for p in pts], [p[3] for p in pts], "k--", lw=0.8,
                    label="W budget")
        ax.set_xlabel(col)
        ax.set_ylabel("bits")
        ax.set_title(title)
        ax.legend(fontsize=7)
    return fig


def _plot_range_fit(ax, table, function):
    sub = where(table, function=function)
    if not sub["x"]:
        raise SchemaError(f"no rows for function {function!r}")
    for split, marker in (("train", "o"), ("test", "x")):
        part = where(sub, split=split)
        order = sorted(range(len(part["x"])),
                       key=lambda i: float(part["x"][i]))
        xs = [float(part["x"][i]) for i in order]
        ax.plot(xs, [float(part["target"][i]) for i in order], "-", lw=0.8,
                color="0.4" if split == "test" else "0.7",
                label=f"{split} target")
        ax.plot(xs, [float(part["prediction"][i]) for i in order], marker,
                label=f"{split} prediction")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(f"out-of-range fit: {function}")
    ax.legend(fontsize=7)


def build_fig3(in_dir):
    task = load_table(in_dir, "task-nmse",
                      ("n_w", "n_s_or_exact", "nmse_train", "nmse_test"))
    gen = load_table(in_dir, "generalize",
                     ("T_bits", "C_bits", "nmse_train", "nmse_test"))
    rng = load_table(in_dir, "range-generalize",
                     ("function", "split", "x", "target", "prediction"))
    fig, axes = plt.subplots(2, 2)
    (ax_a, ax_b), (ax_c, ax_d) = axes

    for variant in _uniq(task["n_s_or_exact"]):
        sub = where(task, n_s_or_exact=variant)
        label = "exact R" if variant == "exact" else f"N_s = {variant}"
        ax_a.semilogy(column(sub, "n_w", int), column(sub, "nmse_test"),
                      "o-", label=label)
    ax_a.set_xlabel("read-out features N_w")
    ax_a.set_ylabel("test NMSE")
    ax_a.set_title("task performance")
    ax_a.legend(fontsize=7)

    _plot_range_fit(ax_b, rng, _uniq(rng["function"])[0])

    t_over_c = [t / c for t, c in zip(column(gen, "T_bits"),
                                      column(gen, "C_bits"))]
    ax_c.semilogy(t_over_c, column(gen, "nmse_train"), "o-", label="train")
    ax_c.semilogy(t_over_c, column(gen, "nmse_test"), "s-", label="test")
    ax_c.axvline(1.0, color="k", ls="--", lw=0.8)
    ax_c.set_xlabel("training information T / capacity C")
    ax_c.set_ylabel("NMSE")
    ax_c.set_title("generalization onset")
    ax_c.legend(fontsize=7)

    functions = _uniq(rng["function"])
    _plot_range_fit(ax_d, rng, functions[1] if len(functions) > 1
                    else functions[0])
    return fig


def build_sm1(in_dir):
    table = load_table(in_dir, "eps-p",
                       ("learner", "noise_amplitude", "bits_per_param",
                        "eps_p_bits"))
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for learner in _uniq(table["learner"]):
        sub = where(table, learner=learner)
        line, = ax.semilogx(column(sub, "noise_amplitude"),
                            column(sub, "bits_per_param"), "o-",
                            label=learner)
        ax.axhline(float(sub["eps_p_bits"][0]), color=line.get_color(),
                   ls="--", lw=0.8)
    ax.set_xlabel("injected noise amplitude")
    ax.set_ylabel("bits per parameter")
    ax.set_title("precision-floor calibration (dashed: eps_p)")
    ax.legend(fontsize=7)
    return fig


def build_sm2(in_dir):
    table = load_table(in_dir, "elm-baseline",
                       ("n_hidden", "N", "eps_mean", "C_direct_bits",
                        "W_bits"))
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    _plot_eps_curves(ax_a, table, "n_hidden", "hidden = {}")
    ax_a.set_title("classical baseline memorization")
    pts = _capacity_summary(table, "n_hidden", int)
    ax_b.plot([p[0] for p in pts], [p[1] for p in pts], "o-",
              label="C_direct")
    ax_b.plot([p[0] for p in pts], [p[3] for p in pts], "k--", lw=0.8,
              label="W budget")
    ax_b.set_xlabel("hidden-layer width")
    ax_b.set_ylabel("bits")
    ax_b.set_title("baseline capacity")
    ax_b.legend(fontsize=7)
    return fig


def build_sm3(in_dir):
    table = load_table(in_dir, "capacity-vs-noise",
                       ("noise_amplitude", "N", "eps_mean", "C_direct_bits",
                        "W_bits"))
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    _plot_eps_curves(ax_a, table, "noise_amplitude", "a = {}")
    ax_a.set_title("memorization under read-out noise")
    pts = _capacity_summary(table, "noise_amplitude")
    ax_b.semilogx([p[0] for p in pts], [p[1] for p in pts], "o-",
                  label="C_direct")
    ax_b.semilogx([p[0] for p in pts], [p[3] for p in pts], "k--", lw=0.8,
                  label="W budget")
    ax_b.set_xlabel("noise amplitude")
    ax_b.set_ylabel("bits")
    ax_b.set_title("capacity decay")
    ax_b.legend(fontsize=7)
    return fig


def build_sm4(in_dir):
    table = load_table(in_dir, "range-generalize",
                       ("function", "split", "x", "target", "prediction"))
    functions = _uniq(table["function"])
    fig, axes = plt.subplots(1, len(functions),
                             figsize=(4.5 * len(functions), 4.0),
                             squeeze=False)
    for ax, function in zip(axes[0], functions):
        _plot_range_fit(ax, table, function)
    return fig


BUILDERS = {
    "fig2": build_fig2,
    "fig3": build_fig3,
    "sm1": build_sm1,
    "sm2": build_sm2,
    "sm3": build_sm3,
    "sm4": build_sm4,
}

FIGURE_IDS = tuple(BUILDERS)


def render(figure_id: str, in_dir: str | Path, out_path: str | Path) -> Path:
    if figure_id not in BUILDERS:
        raise SchemaError(
            f"unknown figure id {figure_id!r}; choose from {FIGURE_IDS}")
    out_path = Path(out_path)
    with plt.rc_context(RC):
        fig = BUILDERS[figure_id](Path(in_dir))
        try:
            fig.tight_layout()
            out_path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out_path, format="png",
                        metadata={"Software": "gbsqrc-figures"})
        finally:
            plt.close(fig)
    return out_path

//! Standalone matplotlib scripts. Each reads only the CSV files written next
//! to it and saves a PNG of the same stem.

use crate::config::FigureId;

const PRELUDE: &str = r#"import csv
import os
import sys

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in (rows[0].keys() if rows else [])}


def where(table, key, value):
    keep = [i for i, v in enumerate(table[key]) if v == value]
    return {k: [col[i] for i in keep] for k, col in table.items()}


def save(fig, stem):
    out = os.path.join(HERE, stem + ".png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out, file=sys.stderr)

"#;

const FIG1: &str = r#"
spec = load("spectra.csv")
prof = load("profiles.csv")
fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
for p, title in [(0, "v < w"), (1, "v > w")]:
    s = where(spec, "panel", p)
    axes[p].scatter(s["state"], s["energy"], c=s["atomic_weight"], cmap="coolwarm", s=6)
    axes[p].set_title(title)
    axes[p].set_xlabel("state")
    axes[p].set_ylabel("E")
for state in sorted(set(prof.get("state", []))):
    s = where(where(prof, "state", state), "atomic", 1.0)
    axes[2].plot(s["position"], s["weight"], marker=".", label=f"state {int(state)}")
axes[2].set_xlabel("position")
axes[2].set_ylabel("|psi|^2")
axes[2].legend(fontsize=7)
save(fig, "fig1")
"#;

const FIG2: &str = r#"
spec = load("spectra.csv")
stripes = sorted(set(spec["stripe_d"]))
fig, axes = plt.subplots(1, len(stripes), figsize=(4 * len(stripes), 3.5), squeeze=False)
for ax, d in zip(axes[0], stripes):
    s = where(spec, "stripe_d", d)
    ax.scatter(s["ky"], s["energy"], c=s["score"], cmap="coolwarm", vmin=-1, vmax=1, s=2)
    ax.set_title(f"d = {int(d)}")
    ax.set_xlabel("k_y")
    ax.set_ylabel("E")
save(fig, "fig2")
"#;

const FIG3: &str = r#"
spec = load("spectra.csv")
prof = load("profiles.csv")
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
for p, label in [(0, "bare lattice"), (1, "with emitters")]:
    s = where(spec, "panel", p)
    axes[0].scatter(s["re"], s["im"], s=6, label=label)
    q = where(prof, "panel", p)
    axes[1].plot(q["site"], q["weight"], marker=".", label="photonic" if p == 0 else "atomic")
axes[0].set_xlabel("Re E")
axes[0].set_ylabel("Im E")
axes[0].legend(fontsize=7)
axes[1].set_xlabel("site")
axes[1].set_ylabel("mean |psi|^2")
axes[1].legend(fontsize=7)
save(fig, "fig3")
"#;

const FIG4: &str = r#"
spec = load("spectra.csv")
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
for p, title in [(0, "photonic"), (1, "atomic")]:
    s = where(spec, "panel", p)
    axes[p].scatter(s["re"], s["im"], c=s["band"], cmap="viridis", s=2)
    axes[p].set_title(title)
    axes[p].set_xlabel("Re E")
    axes[p].set_ylabel("Im E")
save(fig, "fig4")
"#;

const FIG5: &str = r#"
spec = load("spectra.csv")
thetas = sorted(set(spec["theta"]))
fig, axes = plt.subplots(1, len(thetas), figsize=(4.5 * len(thetas), 3.5), squeeze=False)
for ax, theta in zip(axes[0], thetas):
    t = where(spec, "theta", theta)
    for p, label in [(0, "on-cell"), (1, "cell-breaking")]:
        s = where(t, "placement", p)
        line, = ax.plot(s["k"], s["lower"], label=label)
        ax.plot(s["k"], s["upper"], color=line.get_color())
    ax.set_title(f"theta = {theta:.3f}")
    ax.set_xlabel("k")
    ax.set_ylabel("E")
    ax.legend(fontsize=7)
save(fig, "fig5")
"#;

const FIG6: &str = r#"
spec = load("spectra.csv")
prof = load("profiles.csv")
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
axes[0].scatter(spec["re"], spec["im"], c=spec["atomic_weight"], cmap="coolwarm", s=6)
axes[0].set_xlabel("Re E")
axes[0].set_ylabel("Im E")
for p, label in [(0, "photonic"), (1, "atomic")]:
    q = where(prof, "panel", p)
    axes[1].semilogy(q["cell"], q["weight"], marker=".", label=label)
axes[1].set_xlabel("cell")
axes[1].set_ylabel("mean weight")
axes[1].legend(fontsize=7)
save(fig, "fig6")
"#;

pub fn script(id: FigureId) -> String {
    let body = match id {
        FigureId::Fig1 => FIG1,
        FigureId::Fig2 => FIG2,
        FigureId::Fig3 => FIG3,
        FigureId::Fig4 => FIG4,
        FigureId::Fig5 => FIG5,
        FigureId::Fig6 => FIG6,
    };
    format!("{PRELUDE}{body}")
}

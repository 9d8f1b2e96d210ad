# Static norm-vs-bound figures from a ledger
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from modules.log import logger

# (file stem, title, norm column(s), bound column)
PANELS = (
    ("K1", "energy vs K1", ("v_l2sq", "T_l2sq"), "K1"),
    ("K6", "||v~||_6^6 vs K6", ("vt_l6_6",), "K6"),
    ("K2", "||grad vbar||^2 vs K2", ("grad_vbar_sq",), "K2"),
    ("Kz", "||v_z||^2 vs Kz", ("vz_sq",), "Kz"),
    ("KV", "||grad v||^2 vs KV", ("grad_v_sq",), "KV"),
    ("Kt", "||T||_H1^2 vs Kt", ("T_h1sq",), "Kt"),
    ("KT6", "||T||_6 vs L6 bound", ("T_l6",), "KT6"),
)


def plot_ledger(records, certificates, out_dir):
    """One PNG per bound; infinite bound values are left out of the curve. Returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    t = np.array([r.t for r in records])
    written = []
    for stem, title, norms, bound in PANELS:
        fig, ax = plt.subplots(figsize=(6, 4))
        lhs = sum(np.array([getattr(r, n) for r in records]) for n in norms)
        rhs = np.array([getattr(c, bound) for c in certificates])
        ax.plot(t, lhs, label=" + ".join(norms))
        finite = np.isfinite(rhs)
        if finite.any():
            ax.plot(t[finite], rhs[finite], "--", label=bound)
        if (lhs > 0).any():
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}.png")
        fig.savefig(path, dpi=100)
        plt.close(fig)
        written.append(path)
    logger.info(f"System: wrote {len(written)} figures to {out_dir}")
    return written

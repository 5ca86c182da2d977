#!/usr/bin/env python3
"""Generate the mini-BE dataset bundle (deterministic).

Resource e_op/gwp_op, availabilities, renewable capacity limits, end-use
demands and the gas-CHP coefficients are published figures for Belgium in
2035. Construction energies, lifetimes, efficiencies, hourly profiles and
capacity factors are synthetic, chosen to be plausible and to keep the
whole-year LP small.

Usage: python3 scripts/gen_mini_be.py [OUT_DIR]   (default data/mini-be)
"""

import csv
import math
import random
import sys
from pathlib import Path

MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
HOURS = 24
TDS = [f"TD{m + 1:02d}" for m in range(12)]

# name, carrier, e_op [GWh/GWh], gwp_op [t/GWh], avail [GWh/y] or "", category
RESOURCES = [
    ("ELEC_IMPORT", "ELEC", 0.123, 206.0, 27570.0, "other"),
    ("NG", "GAS", 0.0608, 267.0, "", "fossil"),
    ("GAS_RE", "GAS", 0.269, 0.0, "", "RE-fuels"),
    ("WOOD", "WOOD", 0.0491, 11.8, 23400.0, "biomass"),
    ("URANIUM", "URANIUM", 0.0434, 3.9, "", "non-RE"),
    ("WIND", "WIND", 0.0, 0.0, "", "wind"),
    ("SOLAR", "SOLAR", 0.0, 0.0, "", "solar"),
]

# name, e_constr [GWh/GW], gwp_constr [t/GW], lifetime [y], f_min, f_max, conversion
TECHNOLOGIES = [
    ("CCGT", 1500.0, 184000.0, 25.0, 0.0, "inf", {"ELEC": 1.0, "GAS": -1.5873}),
    ("NUCLEAR", 2600.0, 708000.0, 60.0, 0.0, 0.0, {"ELEC": 1.0, "URANIUM": -2.7027}),
    ("WIND_ON", 3000.0, 622000.0, 20.0, 0.0, 10.0, {"ELEC": 1.0, "WIND": -1.0}),
    ("WIND_OFF", 4500.0, 1200000.0, 20.0, 0.0, 6.0, {"ELEC": 1.0, "WIND": -1.0}),
    ("PV", 6000.0, 2080000.0, 25.0, 0.0, 59.2, {"ELEC": 1.0, "SOLAR": -1.0}),
    ("CHP_GAS", 2000.0, 320000.0, 25.0, 0.0, "inf", {"HEAT_HT": 1.0, "ELEC": 0.9565, "GAS": -2.1739}),
    ("BOILER_GAS_HT", 50.0, 12000.0, 17.0, 0.0, "inf", {"HEAT_HT": 1.0, "GAS": -1.1111}),
    ("BOILER_WOOD_HT", 100.0, 25000.0, 17.0, 0.0, "inf", {"HEAT_HT": 1.0, "WOOD": -1.1628}),
    ("EHEATER_HT", 20.0, 5000.0, 15.0, 0.0, "inf", {"HEAT_HT": 1.0, "ELEC": -1.0}),
    ("BOILER_GAS_LT", 50.0, 12000.0, 17.0, 0.0, "inf", {"HEAT_LT": 1.0, "GAS": -1.0753}),
    ("HP_LT", 1200.0, 280000.0, 20.0, 0.0, "inf", {"HEAT_LT": 1.0, "ELEC": -0.3333}),
    ("CAR_GAS", 11700.0, 2900000.0, 15.0, 0.0, "inf", {"MOBILITY": 1.0, "GAS": -0.45}),
    ("CAR_ELEC", 17000.0, 4300000.0, 15.0, 0.0, "inf", {"MOBILITY": 1.0, "ELEC": -0.17}),
    ("TRAIN", 6000.0, 1100000.0, 40.0, 0.0, "inf", {"MOBILITY": 1.0, "ELEC": -0.09}),
]

# name, carrier, eff_in, eff_out, e_constr [GWh/GWh], gwp_constr [t/GWh], lifetime, f_max
STORAGE = [("BATTERY", "ELEC", 0.95, 0.95, 100.0, 61000.0, 15.0, "inf")]

# name, carrier, annual [GWh/y or Mpkm/y]
DEMANDS = [
    ("ELEC", "ELEC", 91900.0),
    ("HEAT_HT", "HEAT_HT", 50400.0),
    ("HEAT_LT", "HEAT_LT", 147300.0),
    ("MOBILITY", "MOBILITY", 194000.0),
]

SHARES = [
    ("PUBLIC_MOB_MAX", "MOBILITY", "<=", 0.5, "TRAIN"),
    ("PUBLIC_MOB_MIN", "MOBILITY", ">=", 0.199, "TRAIN"),
]

# path, kind, lo, hi
UNCERTAIN = [
    ("demand.ELEC.annual", "relative", -0.105, 0.059),
    ("demand.HEAT_HT.annual", "relative", -0.105, 0.059),
    ("demand.HEAT_LT.annual", "relative", -0.105, 0.059),
    ("demand.MOBILITY.annual", "relative", -0.034, 0.034),
    ("resource.WOOD.avail", "relative", -0.321, 0.321),
    ("tech.PV.f_max", "relative", -0.241, 0.241),
    ("tech.PV.cpt", "relative", -0.111, 0.111),
    ("tech.WIND_ON.cpt", "relative", -0.111, 0.111),
    ("tech.WIND_OFF.cpt", "relative", -0.111, 0.111),
    ("tech.CAR_GAS.e_constr", "relative", -0.25, 0.25),
    ("tech.CAR_ELEC.e_constr", "relative", -0.25, 0.25),
    ("tech.CCGT.e_constr", "relative", -0.25, 0.25),
    ("tech.CHP_GAS.e_constr", "relative", -0.25, 0.25),
    ("tech.HP_LT.e_constr", "relative", -0.25, 0.25),
    ("tech.WIND_ON.e_constr", "relative", -0.25, 0.25),
    ("tech.WIND_OFF.e_constr", "relative", -0.25, 0.25),
    ("tech.PV.e_constr", "relative", -0.25, 0.25),
    ("resource.NG.e_op", "relative", -0.25, 0.25),
    ("resource.GAS_RE.e_op", "relative", -0.25, 0.25),
    ("resource.ELEC_IMPORT.e_op", "relative", -0.25, 0.25),
    ("resource.WOOD.e_op", "relative", -0.25, 0.25),
    ("tech.NUCLEAR.f_max", "absolute", 0.0, 5.6),
    ("share.PUBLIC_MOB_MAX.fraction", "absolute", 0.45, 0.55),
]


def season(m):
    """+1 in mid-winter (January), -1 in mid-summer."""
    return math.cos(2.0 * math.pi * m / 12.0)


def normalized(raw):
    """Scale per-(day, hour) weights so the weighted sum over the year is 1."""
    total = sum(MONTH_DAYS[m] * raw[m][h] for m in range(12) for h in range(HOURS))
    return [[raw[m][h] / total for h in range(HOURS)] for m in range(12)]


def demand_profiles():
    elec = [[(1.0 + 0.12 * season(m)) * (0.75 + 0.25 * math.exp(-((h - 12.5) / 4.0) ** 2)
                                        + 0.2 * math.exp(-((h - 19.0) / 2.0) ** 2))
             for h in range(HOURS)] for m in range(12)]
    heat_lt = [[max(0.08, 1.0 + 0.9 * season(m)) * (0.7 + 0.4 * (6 <= h <= 22))
                for h in range(HOURS)] for m in range(12)]
    heat_ht = [[1.0 for _ in range(HOURS)] for _ in range(12)]
    mob = [[0.15 + math.exp(-((h - 8.0) / 1.5) ** 2) + math.exp(-((h - 17.5) / 2.0) ** 2)
            + 0.4 * (7 <= h <= 20) for h in range(HOURS)] for m in range(12)]
    return {
        "ELEC": normalized(elec),
        "HEAT_HT": normalized(heat_ht),
        "HEAT_LT": normalized(heat_lt),
        "MOBILITY": normalized(mob),
    }


def capacity_factors(rng):
    pv = []
    for m in range(12):
        length = 12.0 - 4.0 * season(m)
        rise, peak = 12.5 - length / 2.0, 0.25 + 0.25 * (1.0 - season(m)) / 2.0
        row = []
        for h in range(HOURS):
            t = (h + 0.5 - rise) / length
            row.append(round(peak * math.sin(math.pi * t), 6) if 0.0 < t < 1.0 else 0.0)
        pv.append(row)

    def wind(mean, amp):
        out = []
        for m in range(12):
            level = mean + amp * season(m)
            x, row = rng.uniform(-1.0, 1.0), []
            for _ in range(HOURS):
                x = 0.85 * x + 0.35 * rng.uniform(-1.0, 1.0)
                row.append(round(min(0.95, max(0.02, level * (1.0 + 0.6 * x))), 6))
            out.append(row)
        return out

    return {"PV": pv, "WIND_ON": wind(0.24, 0.08), "WIND_OFF": wind(0.40, 0.10)}


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/mini-be")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2035)

    write(out / "typical_days.csv", ["id", "weight"], zip(TDS, MONTH_DAYS))
    write(out / "resources.csv", ["name", "carrier", "e_op", "gwp_op", "avail"],
          [r[:5] for r in RESOURCES])
    write(out / "technologies.csv", ["name", "e_constr", "gwp_constr", "lifetime", "f_min", "f_max"],
          [t[:6] for t in TECHNOLOGIES])
    write(out / "conversion.csv", ["technology", "carrier", "coefficient"],
          [(t[0], c, v) for t in TECHNOLOGIES for c, v in t[6].items()])
    write(out / "storage.csv",
          ["name", "carrier", "eff_in", "eff_out", "e_constr", "gwp_constr", "lifetime", "f_max"], STORAGE)
    write(out / "demands.csv", ["name", "carrier", "annual"], DEMANDS)
    profiles = demand_profiles()
    write(out / "profiles.csv", ["demand", "td", "hour", "share"],
          [(d, TDS[m], h + 1, repr(profiles[d][m][h])) for d, _, _ in DEMANDS
           for m in range(12) for h in range(HOURS)])
    cpt = capacity_factors(rng)
    write(out / "cpt.csv", ["technology", "td", "hour", "cpt"],
          [(t, TDS[m], h + 1, cpt[t][m][h]) for t in ("PV", "WIND_ON", "WIND_OFF")
           for m in range(12) for h in range(HOURS)])
    write(out / "shares.csv", ["name", "carrier", "relation", "fraction", "technologies"], SHARES)
    write(out / "uncertain.csv", ["path", "kind", "lo", "hi"], UNCERTAIN)

    with open(out / "meta.toml", "w") as f:
        f.write('name = "mini-BE"\nt_op = 1.0\n\n[units]\n')
        f.write('energy = "GWh"\nemissions = "tCO2-eq"\npower = "GW"\nmobility = "Mpkm"\n\n[categories]\n')
        for name, *_, cat in RESOURCES:
            f.write(f'{name} = "{cat}"\n')


if __name__ == "__main__":
    main()

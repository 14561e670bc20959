#!/usr/bin/env python3
"""Regenerate tests/fixtures: one synthetic export per shipped vendor profile.

Output is deterministic. expected.json records, per file, the format that
should be detected and the rows and cycles of every channel.
"""
import argparse
import json
import math
import random
from datetime import datetime, timedelta
from pathlib import Path


def cell_rows(n_cycles, current, capacity_ah, dt, rng, fade=0.99, rest_samples=3):
    """Rest / CC charge / rest / CC discharge / rest per cycle.

    Yields dicts with t (s), i (A, charge positive), v, step, cycle (1-based).
    """
    t = 0.0
    rows = []

    def emit(i, v, step, cycle):
        rows.append({"t": t, "i": i, "v": v + rng.uniform(-2e-4, 2e-4), "step": step, "cycle": cycle})

    for c in range(1, n_cycles + 1):
        q_charge = capacity_ah * fade ** (c - 1)
        q_dis = 0.97 * q_charge
        for _ in range(rest_samples):
            emit(0.0, 3.0, 1, c)
            t += dt
        n = max(2, round(q_charge / current * 3600 / dt))
        for k in range(n):
            frac = k / (n - 1)
            emit(current, 3.3 + 0.8 * frac - 0.1 * math.exp(-8 * frac), 2, c)
            t += dt
        for k in range(rest_samples):
            emit(0.0, 4.1 - 0.02 * (k + 1) / rest_samples, 3, c)
            t += dt
        n = max(2, round(q_dis / current * 3600 / dt))
        for k in range(n):
            frac = k / (n - 1)
            emit(-current, 4.0 - 0.9 * frac - 0.1 * frac**6, 4, c)
            t += dt
        for k in range(rest_samples):
            emit(0.0, 3.0 + 0.05 * (k + 1) / rest_samples, 5, c)
            t += dt
    return rows


def capacity_energy(rows):
    """Per-half-cycle trapezoid integrals of |I| and |IV|, reset on sign change."""
    cap = en = 0.0
    sign = 0
    out = []
    for k, r in enumerate(rows):
        s = (r["i"] > 1e-9) - (r["i"] < -1e-9)
        if k == 0 or (s != 0 and s != sign) or r["cycle"] != rows[k - 1]["cycle"]:
            cap = en = 0.0
            sign = s
        else:
            q = rows[k - 1]
            dt = r["t"] - q["t"]
            cap += 0.5 * (abs(q["i"]) + abs(r["i"])) * dt / 3600
            en += 0.5 * (abs(q["i"] * q["v"]) + abs(r["i"] * r["v"])) * dt / 3600
        out.append((cap, en))
    return out


def arbin(rng):
    start = datetime(2024, 1, 2, 9, 0, 0)
    channels = {4: cell_rows(3, 0.5, 0.05, 5, rng), 7: cell_rows(2, 0.4, 0.04, 5, rng)}
    merged = []
    for ch, rows in channels.items():
        for r in rows:
            merged.append((r["t"], ch, r))
    merged.sort(key=lambda x: (x[0], x[1]))
    lines = ["Data_Point,Test_Time(s),Date_Time,Step_Index,Cycle_Index,Current(A),Voltage(V),"
             "Charge_Capacity(Ah),Discharge_Capacity(Ah),Charge_Energy(Wh),Discharge_Energy(Wh),"
             "Internal_Resistance(Ohm),Aux_Temperature_1(C),dV/dt(V/s),Channel"]
    for n, (t, ch, r) in enumerate(merged, 1):
        stamp = (start + timedelta(seconds=t)).strftime("%m/%d/%Y %H:%M:%S")
        lines.append(f"{n},{t:.3f},{stamp},{r['step']},{r['cycle']},{r['i']:.6f},{r['v']:.6f},"
                     f"0,0,0,0,0.0{40 + ch},{25 + 0.1 * ch:.2f},0,{ch}")
    expected = {str(ch): {"rows": len(rows), "cycles": rows[-1]["cycle"]} for ch, rows in channels.items()}
    return "\r\n".join(lines) + "\r\n", {"format_id": "arbin-csv", "channels": expected}


def maccor(rng):
    rows = cell_rows(3, 1.0, 0.1, 5, rng)
    start = datetime(2024, 1, 5, 14, 30, 0)
    lines = ["Today's Date 01/06/2024,,,,,,,,,,,",
             "Date of Test: 01/05/2024,Filename: cellA.017,,,,,,,,,,",
             "Rec#,Cyc#,Step,Test (Sec),Step (Sec),Amp-hr,Watt-hr,Amps,Volts,State,ES,DPt Time"]
    step_start = 0.0
    for n, r in enumerate(rows, 1):
        if n == 1 or r["step"] != rows[n - 2]["step"]:
            step_start = r["t"]
        state = "C" if r["i"] > 0 else "D" if r["i"] < 0 else "R"
        stamp = (start + timedelta(seconds=r["t"])).strftime("%m/%d/%Y %H:%M:%S")
        lines.append(f"{n},{r['cycle'] - 1},{r['step']},{r['t']:.1f},{r['t'] - step_start:.1f},0,0,"
                     f"{abs(r['i']):.4f},{r['v']:.5f},{state},0,{stamp}")
    return "\n".join(lines) + "\n", {"format_id": "maccor-csv",
                                     "channels": {"17": {"rows": len(rows), "cycles": 3}}}


def gitt_rows(rng, pulses=5, current=-0.2e-3, pulse_s=600, rest_s=1200):
    """Discharge pulses separated by long rests; returns rows with i in A."""
    rows = []
    t = 0.0
    ocv = 3.9
    for k in range(6):
        rows.append({"t": t, "i": 0.0, "v": ocv, "step": 1})
        t += 60
    for p in range(pulses):
        n = pulse_s // 10
        for k in range(n + 1):
            v = ocv - 0.012 - 0.03 * math.sqrt(k / n)
            rows.append({"t": t, "i": current, "v": v + rng.uniform(-5e-5, 5e-5), "step": 2 + 2 * p})
            t += 10
        ocv -= 0.008
        for k in range(rest_s // 60):
            v = ocv - 0.01 * math.exp(-(k + 1) / 3)
            rows.append({"t": t, "i": 0.0, "v": v, "step": 3 + 2 * p})
            t += 60
    return rows


def biologic(rng):
    rows = gitt_rows(rng)
    header = "\t".join(["mode", "ox/red", "error", "control changes", "Ns changes", "counter inc.", "Ns",
                        "time/s", "control/V/mA", "Ewe/V", "<I>/mA", "dq/mA.h", "(Q-Qo)/mA.h",
                        "cycle number"])
    pre = ["EC-Lab ASCII FILE", "Nb header lines : 7", "", "Galvanostatic Intermittent Titration Technique",
           "Run on channel : 3", "Acquisition started on : 01/08/2024 08:15:00", header]

    def fr(x, digits):
        return f"{x:.{digits}f}".replace(".", ",")

    lines = list(pre)
    prev_step = None
    for r in rows:
        changed = 1 if r["step"] != prev_step else 0
        prev_step = r["step"]
        lines.append("\t".join(["1", "0" if r["i"] < 0 else "1", "0", str(changed), str(changed), "0",
                                str(r["step"]), fr(r["t"], 4), fr(r["i"] * 1000, 6), fr(r["v"], 7),
                                fr(r["i"] * 1000, 6), "0", "0", fr(0.0, 15)]))
    return "\n".join(lines) + "\n", {"format_id": "biologic-mpt",
                                     "channels": {"1": {"rows": len(rows), "cycles": 1}}}


def novonix(rng):
    rows = cell_rows(2, 0.02, 0.002, 5, rng)
    start = datetime(2024, 1, 3, 9, 0, 0)
    step_type = {1: "Open circuit", 2: "CC Chg", 3: "Open circuit", 4: "CC DChg", 5: "Open circuit"}
    lines = ["[Summary]", "Cell: synthetic-nvx-01", "Protocol: CC 0.02 A", "Started: 2024-01-03 09:00:00",
             "[End Summary]", "[Data]",
             "Date and Time,Cycle Number,Step Type,Run Time (h),Step Time (h),Step Number,Current (A),"
             "Potential (V),Capacity (Ah),Temperature (°C),Energy (Wh),Circuit Voltage (V)"]
    step_start = 0.0
    for n, r in enumerate(rows):
        if n == 0 or r["step"] != rows[n - 1]["step"]:
            step_start = r["t"]
        stamp = (start + timedelta(seconds=r["t"])).strftime("%Y-%m-%d %H:%M:%S")
        lines.append(f"{stamp},{r['cycle'] - 1},{step_type[r['step']]},{r['t'] / 3600:.9f},"
                     f"{(r['t'] - step_start) / 3600:.9f},{r['step']},{r['i']:.6f},{r['v']:.6f},0,"
                     f"{30.0 + 0.01 * (n % 7):.2f},0,{r['v']:.6f}")
    return "\n".join(lines) + "\n", {"format_id": "novonix-csv",
                                     "channels": {"1": {"rows": len(rows), "cycles": 2}}}


def basytec(rng):
    rows = cell_rows(3, 0.25, 0.025, 6, rng)
    lines = ["~Resultfile from Basytec Battery Test System", "~Date of Test:\t04.01.2024 10:00:00",
             "~Battery:\tsynthetic-bt-01", "~Time[h]\tDataSet\tLine\tU[V]\tI[A]\tAh[Ah]\tT1[°C]"]
    for n, r in enumerate(rows, 1):
        lines.append(f"{r['t'] / 3600:.8f}\t{n}\t{r['step']}\t{r['v']:.5f}\t{r['i']:.5f}\t0\t{24.5:.1f}")
    # No cycle column: cycles come from segmentation.
    return "\n".join(lines) + "\n", {"format_id": "basytec-txt",
                                     "channels": {"1": {"rows": len(rows), "cycles": 3}}}


def admiral(rng):
    rows = cell_rows(2, 0.005, 0.0005, 5, rng)
    integ = capacity_energy(rows)
    start = datetime(2024, 1, 9, 16, 0, 0)
    lines = ["Elapsed Time (s),Timestamp,Cycle,Step,Working Electrode (V),Current (mA),Capacity (mAh),"
             "Energy (mWh),Counter Electrode (V)"]
    for r, (cap, en) in zip(rows, integ):
        stamp = (start + timedelta(seconds=r["t"])).strftime("%Y-%m-%dT%H:%M:%S.000Z")
        lines.append(f"{r['t']:.2f},{stamp},{r['cycle']},{r['step']},{r['v']:.6f},{r['i'] * 1000:.4f},"
                     f"{cap * 1000:.9f},{en * 1000:.9f},0")
    return "\n".join(lines) + "\n", {"format_id": "admiral-txt",
                                     "channels": {"1": {"rows": len(rows), "cycles": 2}}}


GENERATORS = {
    "arbin_multichannel.csv": arbin,
    "cellA.017": maccor,
    "gitt_pulses.mpt": biologic,
    "novonix_uhpc.csv": novonix,
    "basytec_result.txt": basytec,
    "squidstat_export.txt": admiral,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    expected = {}
    for name, gen in GENERATORS.items():
        text, meta = gen(random.Random(name))
        (args.out / name).write_bytes(text.encode("utf-8"))
        expected[name] = meta
    (args.out / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

"""Command line front end.

Verbs:

  simulate        run a scenario, export cubes + truth channels + manifest
  dataset-gen     same export driven by a built-in scene preset
  clutter-map     per-patch link-budget raster (CSV + PGM)
  los-map         per-patch visibility raster (CSV + PGM)
  range-doppler   beamformed range-Doppler maps and peak lists
  cofar-optimize  moment-based waveform optimization for one CPI
  mimo-sim        multi-transmitter run with per-code leakage report
  inspect         print the header of any data file or dataset manifest

Scenarios come from a file (--scenario) or a preset (--preset, sized by
--scale).  Simulation output is byte-identical for any --threads value.
"""

from __future__ import annotations

import argparse
import csv
import struct
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import challenge, cofar, dsp, mimo, pipeline
from .errors import ConfigurationError
from .scenario import (DESK_SCALE, Scenario, generate_scenario1,
                       generate_scenario2, load_scenario)
from .seeding import STREAM_MIMO_CODE, derive_seed
from .waveform import phase_code, read_waveform, write_waveform

_PRESETS = {
    "scenario1": generate_scenario1,
    "scenario2": generate_scenario2,
}


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario file path")
    p.add_argument("--preset", choices=sorted(_PRESETS),
                   help="built-in scene instead of --scenario")
    p.add_argument("--scale", type=float, default=DESK_SCALE,
                   help="preset size factor in (0, 1] (default %(default)s)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (never changes the output bytes)")


def _load(args) -> Scenario:
    if args.scenario and args.preset:
        raise ConfigurationError("give either --scenario or --preset, not both")
    if args.scenario:
        scn = load_scenario(args.scenario)
    elif args.preset:
        scn = _PRESETS[args.preset](scale=args.scale)
    else:
        raise ConfigurationError("need --scenario or --preset")
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    return scn


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    scn = _load(args)
    run = pipeline.simulate_scenario(scn, threads=args.threads)
    manifest = challenge.export_challenge(run, _out_dir(args))
    dims = scn.export_dims
    print(f"scenario {scn.name}: {dims[0]} CPIs x {dims[1]} channels x "
          f"{dims[2]} pulses x {dims[3]} range samples")
    print(f"wrote {manifest}")
    return 0


def cmd_dataset_gen(args) -> int:
    if not args.preset:
        raise ConfigurationError("dataset-gen needs --preset")
    args.scenario = None
    return cmd_simulate(args)


def _write_raster_outputs(out: Path, stem: str, values: np.ndarray,
                          clip_db: float) -> None:
    dsp.write_map_csv(out / f"{stem}.csv", values)
    dsp.write_pgm(out / f"{stem}.pgm", values, clip_db=clip_db)


def cmd_clutter_map(args) -> int:
    scn = _load(args)
    gm = pipeline.gain_map(scn, cpi=args.cpi)
    out = _out_dir(args)
    # normalize to the strongest patch for the image; CSV keeps raw dB
    dsp.write_map_csv(out / "clutter_map.csv", gm.gains_db)
    rel = gm.gains_db - gm.gains_db.max()
    dsp.write_pgm(out / "clutter_map.pgm", np.maximum(rel, -args.clip_db),
                  clip_db=args.clip_db)
    vis_pct = 100.0 * float(np.count_nonzero(gm.visible)) / gm.visible.size
    print(f"clutter map {gm.gains_db.shape[1]}x{gm.gains_db.shape[0]} patches "
          f"({gm.patch_size:.0f} m), {vis_pct:.1f}% visible")
    print(f"wrote {out / 'clutter_map.csv'} and .pgm")
    return 0


def cmd_los_map(args) -> int:
    scn = _load(args)
    gm = pipeline.gain_map(scn, cpi=args.cpi)
    out = _out_dir(args)
    vis = gm.visible.astype(np.float64)
    with open(out / "los_map.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["row", "col", "visible"])
        for r in range(vis.shape[0]):
            for c in range(vis.shape[1]):
                w.writerow([r, c, int(vis[r, c])])
    dsp.write_pgm(out / "los_map.pgm", np.where(gm.visible, 0.0, -args.clip_db),
                  clip_db=args.clip_db)
    vis_pct = 100.0 * float(vis.mean())
    print(f"visibility {vis_pct:.1f}% over {vis.shape[1]}x{vis.shape[0]} patches")
    print(f"wrote {out / 'los_map.csv'} and .pgm")
    return 0


def cmd_range_doppler(args) -> int:
    out = _out_dir(args)
    if args.cube:
        from .rxsim import read_cube
        cube = read_cube(args.cube)
        wf = read_waveform(args.waveform) if args.waveform else None
        if wf is None:
            raise ConfigurationError("--cube needs --waveform for compression")
        # a cube file holds exactly one CPI; --cpi only labels the output
        cubes = [(args.cpi, 0, cube)]
        weights = np.ones(cube.num_channels)
    else:
        scn = _load(args)
        run = pipeline.simulate_scenario(scn, threads=args.threads)
        wf = run.waveform
        cubes = [(r.cpi, 0, r.cube) for r in run.results]
        weights = np.ones(scn.num_channels)

    for cpi, cube_cpi, cube in cubes:
        map_db, peaks = dsp.range_doppler_map(
            cube, wf, weights, cpi=cube_cpi, window=args.window,
            clip_db=args.clip_db, peak_offset_db=args.peak_offset_db)
        stem = f"rd_cpi{cpi:03d}"
        _write_raster_outputs(out, stem, map_db, args.clip_db)
        dsp.write_peaks_csv(out / f"{stem}_peaks.csv", peaks)
        print(f"cpi {cpi}: map {map_db.shape[1]} range x {map_db.shape[0]} "
              f"doppler bins, {len(peaks)} peaks")
    print(f"wrote range-Doppler products under {out}")
    return 0


def cmd_cofar_optimize(args) -> int:
    scn = _load(args)
    scene = pipeline.build_scene(scn)
    moments = pipeline.channel_moments(scn, scene, cpi=args.cpi, pulse=args.pulse,
                                       channel=args.channel,
                                       realizations=args.realizations)
    probe = pipeline.default_waveform(scn)
    base = cofar.scnr(probe.samples, moments)
    s_opt, gain = cofar.optimal_waveform(moments)
    out = _out_dir(args)
    wf_path = out / "optimal_waveform.rfwav"
    from .waveform import Waveform
    write_waveform(wf_path, Waveform(samples=s_opt, sample_rate=scn.sample_rate,
                                     label="scnr-optimal"))
    with open(out / "cofar_report.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["quantity", "value"])
        w.writerow(["lfm_scnr", repr(base)])
        w.writerow(["optimal_scnr", repr(gain)])
        w.writerow(["improvement_db", repr(10.0 * np.log10(gain / base))])
        w.writerow(["max_gain_db", repr(cofar.max_gain_db(moments))])
    print(f"LFM SCNR {base:.4e}, optimal {gain:.4e} "
          f"(+{10.0 * np.log10(gain / base):.2f} dB)")
    print(f"wrote {wf_path} and cofar_report.csv")
    return 0


def cmd_mimo_sim(args) -> int:
    scn = _load(args)
    scene = pipeline.build_scene(scn)
    pair_irs = pipeline.mimo_pair_irs(scn, scene, cpi=args.cpi)
    num_tx = len(pair_irs)
    chips = scn.num_waveform_samples
    codes = [phase_code(chips, scn.sample_rate,
                        seed=derive_seed(scn.seed, STREAM_MIMO_CODE, t))
             for t in range(num_tx)]
    cubes = mimo.simulate_mimo_cube(pair_irs, codes, scn.noise_power, scn.seed,
                                    carrier_hz=scn.carrier_hz, cpi_index=args.cpi)
    out = _out_dir(args)
    from .rxsim import write_cube
    for r, cube in enumerate(cubes):
        write_cube(out / f"mimo_rx{r}.rfcube", cube)

    singles = []
    for t in range(num_tx):
        one = [[pair_irs[t][0]]]
        singles.append(mimo.simulate_mimo_cube(one, [codes[t]], 0.0, scn.seed,
                                               carrier_hz=scn.carrier_hz,
                                               cpi_index=args.cpi)[0])
    leak = mimo.cross_channel_leakage(singles, codes)
    with open(out / "mimo_leakage.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["probe_tx", "reference_tx", "leakage_db"])
        for a in range(num_tx):
            for b in range(num_tx):
                w.writerow([a, b, repr(float(leak[a, b]))])
    worst = float(leak[~np.eye(num_tx, dtype=bool)].max()) if num_tx > 1 else float("-inf")
    print(f"{num_tx} transmitters, worst cross-code leakage {worst:.1f} dB")
    print(f"wrote per-receiver cubes and mimo_leakage.csv under {out}")
    return 0


_MAGIC_NAMES = {
    b"RFWAV001": "waveform",
    b"RFGIR001": "impulse response",
    b"RFCUBE01": "data cube",
    b"RFCOV001": "covariance",
}


def cmd_inspect(args) -> int:
    p = Path(args.path)
    if p.is_dir() or p.name == challenge.MANIFEST_NAME:
        data = challenge.read_challenge(p)
        print(f"dataset: scenario {data.manifest.get('scenario')}, "
              f"{data.num_cpis} CPIs, seed {data.seed}")
        print(f"scenario hash {data.manifest.get('scenario_hash', '')[:16]}...")
        print(f"{len(data.files)} files verified")
        return 0
    with open(p, "rb") as f:
        magic = f.read(8)
        kind = _MAGIC_NAMES.get(magic)
        if kind is None:
            raise ConfigurationError(f"unrecognized file magic {magic!r}")
        print(f"{p.name}: {kind}")
        if magic == b"RFWAV001":
            n, fs = struct.unpack("<Id", f.read(12))
            print(f"  {n} samples at {fs:.0f} Hz")
        elif magic == b"RFGIR001":
            n, m, l, fs, origin, prf = struct.unpack("<IIIddd", f.read(36))
            print(f"  {n} channels x {m} pulses x {l} taps, "
                  f"fs {fs:.0f} Hz, PRF {prf:.1f} Hz, delay origin {origin:.3e} s")
        elif magic == b"RFCUBE01":
            c, n, m, r, fs, prf, npow, carrier = struct.unpack("<IIIIdddd", f.read(48))
            print(f"  {c} CPIs x {n} channels x {m} pulses x {r} range samples")
            print(f"  fs {fs:.0f} Hz, PRF {prf:.1f} Hz, carrier {carrier:.3e} Hz, "
                  f"noise power {npow:.3e}")
        elif magic == b"RFCOV001":
            (dim,) = struct.unpack("<I", f.read(4))
            print(f"  {dim} x {dim} Hermitian matrix")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rfclutter",
                                 description="site-specific radar clutter and "
                                             "target channel simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and export a dataset")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dataset-gen", help="export a dataset from a preset scene")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_dataset_gen)

    p = sub.add_parser("clutter-map", help="per-patch gain raster")
    _add_scenario_args(p)
    p.add_argument("--cpi", type=int, default=0)
    p.add_argument("--clip-db", type=float, default=dsp.DEFAULT_CLIP_DB)
    p.set_defaults(func=cmd_clutter_map)

    p = sub.add_parser("los-map", help="per-patch visibility raster")
    _add_scenario_args(p)
    p.add_argument("--cpi", type=int, default=0)
    p.add_argument("--clip-db", type=float, default=dsp.DEFAULT_CLIP_DB)
    p.set_defaults(func=cmd_los_map)

    p = sub.add_parser("range-doppler", help="beamformed range-Doppler maps")
    _add_scenario_args(p)
    p.add_argument("--cube", help="process an existing cube file instead")
    p.add_argument("--waveform", help="waveform file for --cube")
    p.add_argument("--cpi", type=int, default=0, help="CPI index within --cube")
    p.add_argument("--window", choices=["hann"], default=None)
    p.add_argument("--clip-db", type=float, default=dsp.DEFAULT_CLIP_DB)
    p.add_argument("--peak-offset-db", type=float, default=dsp.DEFAULT_PEAK_OFFSET_DB)
    p.set_defaults(func=cmd_range_doppler)

    p = sub.add_parser("cofar-optimize", help="SCNR-optimal waveform design")
    _add_scenario_args(p)
    p.add_argument("--cpi", type=int, default=0)
    p.add_argument("--pulse", type=int, default=0)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--realizations", type=int, default=64)
    p.set_defaults(func=cmd_cofar_optimize)

    p = sub.add_parser("mimo-sim", help="multi-transmitter simulation")
    _add_scenario_args(p)
    p.add_argument("--cpi", type=int, default=0)
    p.set_defaults(func=cmd_mimo_sim)

    p = sub.add_parser("inspect", help="describe a data file or dataset")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

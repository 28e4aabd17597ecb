"""Command-line entry point: simulate, process, validate.

Exit codes: 0 success, 1 usage error, 2 validation/config failure,
3 I/O error. Every run writes a run_manifest.json sufficient to
reproduce it; identical (scenario, seed, version) inputs reproduce
byte-identical session data and CSV reports.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import arrays as ar
from . import channel as ch
from . import record, rxproc, sweep
from .scenario import PRESETS, Scene, ScenarioError, load_scenario, preset_text, sample_track
from .waveform import generate_zc, validate_cazac

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3

GOLDEN_NAME = "frame_golden.bin"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; this tool reserves 2
    # for validation failures, so remap.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="v2vsounder",
                     description="Simulated 28 GHz V2V directional channel sounder")
    parser.add_argument("--version", action="version", version=f"v2vsounder {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and record a capture session")
    sim.add_argument("--scenario", required=True,
                     help=f"scenario config path or preset name {sorted(PRESETS)}")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--duration-s", type=float, default=1.0)
    sim.add_argument("--sweep-rate-hz", type=float, default=None,
                     help="override the scenario sweep repetition rate")
    sim.add_argument("--capture-mode", choices=["cir", "full-dwell"], default=None,
                     help="override the scenario capture mode")
    sim.add_argument("--out", required=True, help="session output directory")

    proc = sub.add_parser("process", help="turn a session into CSV reports")
    proc.add_argument("--session", required=True, help="session directory from simulate")
    proc.add_argument("--out", required=True, help="report output directory")

    val = sub.add_parser("validate", help="run the built-in self checks")
    val.add_argument("--tolerance", type=float, default=1e-9,
                     help="CAZAC tolerance (default 1e-9)")
    val.add_argument("--golden", type=Path, default=None,
                     help="override the frame-codec golden file")
    return parser


def _resolve_scenario(arg: str) -> tuple[str, str]:
    """Return (display name, config text) for a preset name or file path."""
    if arg in PRESETS:
        return arg, preset_text(arg)
    path = Path(arg)
    try:
        return str(path), path.read_text()
    except OSError as exc:
        raise exc


def _write_run_manifest(out_dir: Path, payload: dict) -> None:
    (out_dir / "run_manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# simulate


def _ground_truth_rows(scene: Scene, schedule, tx_chains, rx_chains, n_sweeps):
    rows = []
    for m in range(n_sweeps):
        offset_ns = schedule.slot_capture_offset_ns(m, 0, 0, 0)
        t_s = (schedule.epoch_gps_seconds + (schedule.epoch_gps_fraction_ns + offset_ns) * 1e-9)
        for tx_chain in tx_chains:
            tx_pose = ch.pose_array(tx_chain.placement,
                                    sample_track(scene.tx_vehicle.track, t_s),
                                    scene.tx_vehicle_id)
            for rx_chain in rx_chains:
                rx_pose = ch.pose_array(rx_chain.placement,
                                        sample_track(scene.rx_vehicle.track, t_s),
                                        scene.rx_vehicle_id)
                pathset = ch.trace_paths(scene, tx_pose, rx_pose, t_s)
                for p in pathset.paths:
                    rows.append((m, t_s, tx_chain.chain_id, rx_chain.placement.name,
                                 p.kind, p.via, p.delay_s * 1e9, p.gain_db,
                                 p.aod_az_deg, p.aod_el_deg, p.aoa_az_deg, p.aoa_el_deg,
                                 p.doppler_hz))
    return rows


def _cmd_simulate(args) -> int:
    name, text = _resolve_scenario(args.scenario)
    scene = load_scenario(text)
    overrides = {}
    if args.sweep_rate_hz is not None:
        overrides["sweep_rate_hz"] = args.sweep_rate_hz
    if args.capture_mode is not None:
        overrides["capture_mode"] = args.capture_mode
    if overrides:
        scene = dataclasses.replace(scene,
                                    sounder=dataclasses.replace(scene.sounder, **overrides))
    sounder = scene.sounder
    if args.duration_s < 0:
        raise ScenarioError("duration must be >= 0")

    tx_chains, rx_chains = sweep.build_chains(scene)
    codebooks = [r.codebook for r in rx_chains]
    span = scene.time_span()
    epoch = (int(span[0]), 0)
    schedule = sweep.build_schedule(
        codebooks, dwell_ns=sounder.dwell_ns, epoch=epoch,
        repetition_rate_hz=sounder.sweep_rate_hz, guard_ns=sounder.guard_ns,
        cir_window_ns=int(round(sounder.zc_length * sounder.symbol_period_ns)),
        captures_per_dwell=sounder.captures_per_dwell)
    n_sweeps = int(args.duration_s * sounder.sweep_rate_hz)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sample_count = sounder.zc_length if sounder.capture_mode == "cir" else sounder.dwell_samples
    manifest = record.SessionManifest(
        scenario_name=scene.name, scenario_hash=scene.config_hash, seed=args.seed,
        n_sweeps=n_sweeps, n_slots=schedule.n_slots, n_channels=len(rx_chains),
        captures_per_dwell=schedule.captures_per_dwell, dwell_ns=schedule.dwell_ns,
        guard_ns=schedule.guard_ns, sweep_period_ns=schedule.repetition_period_ns,
        epoch_gps_seconds=schedule.epoch_gps_seconds,
        epoch_gps_fraction_ns=schedule.epoch_gps_fraction_ns,
        capture_mode=sounder.capture_mode, sample_count=sample_count,
        calibration_dbm_fs=sounder.calibration_dbm_fs,
        bandwidth_hz=sounder.bandwidth_hz, carrier_hz=scene.channel.carrier_hz,
        zc_root=sounder.zc_root, zc_length=sounder.zc_length,
        tx_shifts=tuple(sounder.tx_shifts),
        rx_array_names=tuple(r.placement.name for r in rx_chains),
        rx_boresights_deg=tuple(r.placement.boresight_heading_deg for r in rx_chains),
        beam_azimuths_deg=tuple(b.azimuth_deg for b in codebooks[0].beams),
        beam_elevations_deg=tuple(b.elevation_deg for b in codebooks[0].beams),
        rx_beamwidth_deg=sounder.rx_beamwidth_deg)

    started = time.time()
    waveforms = sweep.make_tx_waveforms(sounder)
    with record.SessionWriter(out_dir, manifest) as writer:
        for m in range(n_sweeps):
            for frame in sweep.execute_sweep(schedule, scene, waveforms, args.seed,
                                             sweep_index=m):
                writer.add_frame(frame)

    with open(out_dir / "paths.csv", "w") as fh:
        fh.write("sweep,gps_time,tx,rx_array,kind,via,delay_ns,gain_db,"
                 "aod_az,aod_el,aoa_az,aoa_el,doppler_hz\n")
        for row in _ground_truth_rows(scene, schedule, tx_chains, rx_chains, n_sweeps):
            fh.write(f"{row[0]},{row[1]:.9f},{row[2]},{row[3]},{row[4]},{row[5]},"
                     f"{row[6]:.6f},{row[7]:.6f},{row[8]:.6f},{row[9]:.6f},"
                     f"{row[10]:.6f},{row[11]:.6f},{row[12]:.6f}\n")

    _write_run_manifest(out_dir, {
        "subcommand": "simulate", "scenario": name,
        "scenario_sha256": scene.config_hash, "seed": args.seed,
        "duration_s": args.duration_s, "tool_version": __version__,
        "outputs": [record.DATA_NAME, record.MANIFEST_NAME, "paths.csv"],
        "wall_time_s": round(time.time() - started, 3),
    })
    print(f"wrote {n_sweeps} sweeps "
          f"({n_sweeps * sweep.frames_per_sweep(schedule, len(rx_chains))} frames) "
          f"to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# process


def _cmd_process(args) -> int:
    session_dir = Path(args.session)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    session = record.read_session(session_dir)
    manifest = session.manifest

    reference = generate_zc(manifest.zc_root, manifest.zc_length,
                            symbol_period_ns=1e9 / manifest.bandwidth_hz)
    if manifest.beam_azimuths_deg:
        codebook = ar.BeamCodebook(beams=tuple(
            ar.Beam(azimuth_deg=az, elevation_deg=el,
                    beamwidth_3db_deg=manifest.rx_beamwidth_deg, index=i)
            for i, (az, el) in enumerate(zip(manifest.beam_azimuths_deg,
                                             manifest.beam_elevations_deg))))
    else:
        codebook = ar.build_rx_codebook(ar.rx_array_spec())
    names = manifest.rx_array_names

    estimates = []
    failed = 0
    for frame in session.frames:
        try:
            if manifest.capture_mode == "full-dwell":
                frame = rxproc.extract_capture_window(frame, manifest.zc_length)
            for est in rxproc.estimate_cir(frame, reference, manifest.tx_shifts):
                estimates.append(dataclasses.replace(
                    est, rx_array_id=names[frame.rx_channel]))
        except ValueError:
            failed += 1

    with open(out_dir / "rss.csv", "w") as fh:
        rxproc.write_rss_csv(
            rxproc.rss_per_beam(estimates, codebook) if estimates
            else rxproc.BeamRssTable(entries=()), fh)
    with open(out_dir / "rss_el0.csv", "w") as fh:
        rxproc.write_rss_csv(
            rxproc.rss_per_beam(estimates, codebook, elevation_filter_deg=0.0)
            if estimates else rxproc.BeamRssTable(entries=()), fh)

    # Stacked CIRs and delay spreads: best beam per (tx, rx array) over
    # the first sweep, all curves normalized to one global peak.
    first_sweep = [e for e in estimates
                   if e.timestamp_s < (manifest.epoch_gps_seconds
                                       + manifest.epoch_gps_fraction_ns * 1e-9
                                       + manifest.sweep_period_ns * 1e-9)]
    selection = []
    spread_rows = []
    if first_sweep:
        table = rxproc.rss_per_beam(first_sweep, codebook)
        for tx_id in sorted({e.tx_id for e in first_sweep}):
            for channel in sorted({e.rx_channel for e in first_sweep}):
                best = table.best(tx_id=tx_id, rx_channel=channel)
                est = next(e for e in first_sweep
                           if e.tx_id == tx_id and e.rx_channel == channel
                           and e.beam_index == best.beam_index)
                selection.append(est)
                try:
                    spread = rxproc.delay_spread(est, rxproc.DETECTION_THRESHOLD_DB)
                    spread_rows.append((est.timestamp_s, est.tx_id, est.rx_array_id,
                                        est.beam_index, spread))
                except ValueError:
                    pass
    with open(out_dir / "stacked_cir.csv", "w") as fh:
        rxproc.write_stacked_csv(
            rxproc.normalize_and_stack(selection) if selection else [], fh)
    with open(out_dir / "delay_spread.csv", "w") as fh:
        rxproc.write_delay_spread_csv(spread_rows, fh)

    report = {
        "frames_read": len(session.frames),
        "frames_corrupt": session.corrupt_count,
        "frames_failed": failed,
        "estimates": len(estimates),
    }
    (out_dir / "process_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_run_manifest(out_dir, {
        "subcommand": "process", "session": str(session_dir),
        "tool_version": __version__,
        "outputs": ["rss.csv", "rss_el0.csv", "stacked_cir.csv", "delay_spread.csv",
                    "process_report.json"],
        "wall_time_s": round(time.time() - started, 3),
    })
    if session.corrupt_count:
        print(f"note: {session.corrupt_count} corrupt frame(s) skipped")
    print(f"processed {len(session.frames)} frames -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def _golden_frame() -> record.CaptureFrame:
    iq = ((np.arange(128, dtype=np.int64) * 37 + 11) % 4001 - 2000).astype(np.int16)
    return record.CaptureFrame(gps_seconds=1234567890,
                               gps_fraction_q64=record.ns_to_q64(123456789),
                               rx_channel=2, slot_index=7, beam_index=17,
                               calibration_dbm_fs=0.0, iq=iq)


def _cmd_validate(args) -> int:
    checks = []

    def check(name, ok, detail):
        checks.append(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    tol = args.tolerance
    for root in (1, 3):
        report = validate_cazac(generate_zc(root, 2048), tol)
        check(f"cazac root {root}", report.passed,
              f"modulus err {report.max_modulus_error:.2e}, "
              f"offpeak {report.max_offpeak_ratio:.2e}, tol {tol:.1e}")

    # Link budget closure on a single on-grid path.
    distance = 334e-9 * ch.SPEED_OF_LIGHT
    fspl = ch.free_space_path_loss(distance, 28e9)
    pathset = ch.PathSet(timestamp_s=0.0, tx_array_id="tx", rx_array_id="rx", paths=(
        ch.Path(delay_s=334e-9, gain_db=-fspl, aod_az_deg=0, aod_el_deg=0,
                aoa_az_deg=180, aoa_el_deg=0, doppler_hz=0.0, kind=ch.LOS),))
    taps = ch.synthesize_cir(pathset, [30.0], [47.0], 1e9, 2048e-9, carrier_hz=28e9)
    peak_dbm = 10 * np.log10(np.max(np.abs(taps)) ** 2)
    expected = 30.0 + 47.0 - fspl
    closure_err = abs(peak_dbm - expected)
    check("link budget closure", closure_err <= 0.1,
          f"peak {peak_dbm:.3f} dBm vs {expected:.3f} dBm (err {closure_err:.4f} dB)")

    codebook = ar.build_rx_codebook(ar.rx_array_spec())
    schedule = sweep.build_schedule([codebook] * 4, dwell_ns=40_000)
    check("sweep timing", schedule.span_ns == 1_160_000
          and sweep.frames_per_sweep(schedule) == 116,
          f"span {schedule.span_ns} ns, {sweep.frames_per_sweep(schedule)} frames/sweep")

    golden_path = args.golden or Path(__file__).parent / "data" / GOLDEN_NAME
    try:
        golden = golden_path.read_bytes()
        encoded = record.encode_frame(_golden_frame())
        check("frame codec golden", encoded == golden,
              f"{golden_path} ({len(golden)} bytes)")
    except OSError as exc:
        check("frame codec golden", False, f"cannot read {golden_path}: {exc}")

    block = record.encode_frame(_golden_frame())
    packets = record.packetize(block, 64, session_id=1, frame_id=9)
    result = record.reassemble(reversed(packets))
    check("packetize round trip", result.frames.get(9) == block and not result.lost_frames,
          f"{len(packets)} fragments")

    return EXIT_OK if all(checks) else EXIT_VALIDATION


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "process":
            return _cmd_process(args)
        return _cmd_validate(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

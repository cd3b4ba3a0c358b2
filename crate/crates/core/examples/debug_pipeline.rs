//! Scratch diagnostic (not part of the API).

use punwrap_core::*;

fn main() {
    let spec = SynthSpec::new(40, 40, 1000);
    let inst = synthesize(&spec).unwrap();
    let mut cfg = SolverConfig::new(500);
    cfg.num_sweeps = 800;
    cfg.beta_ladder = Some((0..16).map(|i| 0.02 * (4.0f64 / 0.02).powf(i as f64 / 15.0)).collect());
    let report = unwrap_superpixel(
        &inst.wrapped,
        &WeightPolicy::default(),
        5,
        10,
        10,
        SolverKind::Pt,
        &cfg,
    )
    .unwrap();

    let m = match_labels(&report.labels, &inst.labels).unwrap();
    println!(
        "final: raw {:.2}% aligned {:.2}% shift {} | energy {:?} | decode_clamped {} stitch_clamped {}",
        m.raw_match_pct, m.shift_aligned_match_pct, m.best_shift, report.energy, report.decode_clamped, report.stitch_clamped
    );
    println!("offsets (normalized): {:?}", report.offsets);

    // Tile-level diagnosis.
    let tiling = make_tiling(40, 40, 10, 10).unwrap();
    for (i, tile) in tiling.tiles().iter().enumerate().take(8) {
        let mut truth_tile = Vec::new();
        for row in tile.y0..tile.y0 + tile.height {
            for col in tile.x0..tile.x0 + tile.width {
                truth_tile.push(inst.labels.get(row, col));
            }
        }
        let truth_grid =
            LabelGrid::new(tile.width, tile.height, truth_tile.clone(), inst.labels.domain_size())
                .unwrap();
        let tm = match_labels(&report.tile_labels[i], &truth_grid).unwrap();
        let min_truth = truth_tile.iter().min().unwrap();
        println!(
            "tile {i}: raw {:6.2}% aligned {:6.2}% shift {:+} | truth min {} | solver tile best E {:.4} trace_end {:.4}",
            tm.raw_match_pct,
            tm.shift_aligned_match_pct,
            tm.best_shift,
            min_truth,
            report.tile_reports[i].best_energy,
            report.tile_reports[i].energy_trace.last().unwrap(),
        );
    }

    // What does the truth labeling cost under the parent problem vs ours?
    let parent = build_problem(&inst.wrapped, &WeightPolicy::default(), 5).unwrap();
    let e_truth = energy_l2(&parent, &inst.labels).unwrap();
    println!("parent energy of truth: {e_truth:?}");
    println!("parent energy of pipeline: {:?}", report.energy);
}

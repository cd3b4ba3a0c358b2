//! Scratch diagnostic (not part of the API).

use punwrap_core::*;

fn median_abs_linear(q: &QuboProblem) -> f64 {
    let mut v: Vec<f64> = q.linear().values().map(|x| x.abs()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    let spec = SynthSpec::new(100, 100, 2000);
    let inst = synthesize(&spec).unwrap();
    let parent = build_problem(&inst.wrapped, &WeightPolicy::default(), 5).unwrap();
    let tiling = make_tiling(100, 100, 10, 10).unwrap();
    for i in [0usize, 5, 42] {
        let sub = restrict_problem(&parent, &tiling, i).unwrap();
        let (qubo, _) = build_qubo(&sub).unwrap();
        println!(
            "tile {i}: vars {}, max|coef| {:8.2}, median|lin| {:8.3}",
            qubo.num_vars(),
            qubo.max_abs_coef(),
            median_abs_linear(&qubo)
        );
    }

    // Offset problem built from truth-consistent tile labels.
    let tile_labels: Vec<LabelGrid> = (0..tiling.num_tiles())
        .map(|i| {
            let tile = tiling.tiles()[i];
            let mut v = Vec::new();
            for row in tile.y0..tile.y0 + tile.height {
                for col in tile.x0..tile.x0 + tile.width {
                    v.push(inst.labels.get(row, col));
                }
            }
            let min = *v.iter().min().unwrap();
            LabelGrid::new(tile.width, tile.height, v.iter().map(|k| k - min).collect(), 5)
                .unwrap()
        })
        .collect();
    let sp = build_superpixel_problem(&parent, &tiling, &tile_labels).unwrap();
    let (oq, _, _) = build_offset_qubo(&sp).unwrap();
    println!(
        "offset qubo: vars {}, max|coef| {:8.2}, median|lin| {:8.3}",
        oq.num_vars(),
        oq.max_abs_coef(),
        median_abs_linear(&oq)
    );

    // Random 6-var QUBO scale reference.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut q = QuboProblem::new(6);
    for i in 0..6 {
        q.add_linear(i, rng.gen_range(-2.0..2.0));
        for j in i + 1..6 {
            q.add_quadratic(i, j, rng.gen_range(-2.0..2.0));
        }
    }
    q.prune_zeros();
    println!(
        "random 6-var: max|coef| {:8.2}, median|lin| {:8.3}",
        q.max_abs_coef(),
        median_abs_linear(&q)
    );
}

use mot_core::transport::{sliced_w1, solve_transport, w1_exact_1d, DiscreteMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cloud(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DiscreteMeasure {
    let pts = (0..n).map(|_| [rng.gen::<f64>() + shift, rng.gen::<f64>()]).collect();
    DiscreteMeasure::uniform(pts).unwrap()
}

fn main() -> mot_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = cloud(&mut rng, 60, 0.0);
    let b = cloud(&mut rng, 80, 0.5);
    let exact = solve_transport(&a, &b)?;
    println!("exact W1 {:.6} (duality gap {:.1e})", exact.value, exact.gap());
    let s = sliced_w1(&a, &b, 256, 3)?;
    println!("sliced W1 {:.6} +- {:.6}", s.estimate, s.stderr);
    println!("translation by (0.3, 0.4): {:.12}", solve_transport(&a, &a.translated([0.3, 0.4]))?.value);
    let xs: Vec<f64> = (0..5).map(|k| k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x + 2.0).collect();
    println!("1D shift by 2: {}", w1_exact_1d(&xs, &ys)?);
    Ok(())
}

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use psl2trop::certifier::rigid_lines_d3;
use psl2trop::surfaces::{Parity, Poly4, SurfaceFamily};

fn perturb(p: &Poly4, size: f64, rng: &mut ChaCha8Rng) -> Poly4 {
    let mut noise = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * size;
    Poly4::new(p.monomials().iter().map(|(m, c)| (*m, c + noise()))).unwrap()
}

#[test]
fn rigid_candidates_survive_small_perturbations() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let s = SurfaceFamily::random(Parity::Odd, 1, &mut rng).unwrap();
        let (base, cands) = rigid_lines_d3(&s).unwrap();
        assert_eq!((base.total, cands.len()), (6, 12));

        let f: Vec<Poly4> = s.f.iter().map(|p| perturb(p, 1e-8, &mut rng)).collect();
        let moved = SurfaceFamily::build(Parity::Odd, 1, f).unwrap();
        let (set, moved_cands) = rigid_lines_d3(&moved).unwrap();
        assert_eq!((set.total, moved_cands.len()), (6, 12));
        for p in &base.points {
            let best = set
                .points
                .iter()
                .map(|q| p.x.chordal(&q.x).max(p.y.chordal(&q.y)))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-5, "seed {seed}: intersection point moved by {best:e}");
        }
        for (a, b) in cands.iter().zip(&moved_cands) {
            assert_eq!(a.side, b.side);
            assert!(a.fixed.chordal(&b.fixed) < 1e-5);
            assert_eq!(a.admissible, b.admissible);
        }
    }
}

//! Sparse kernels checked against brute-force dense oracles.
#![allow(clippy::needless_range_loop)] // oracles use plain index loops

use combigcn_core::dense::DenseMatrix;
use combigcn_core::rng::Rng;
use combigcn_core::sparse::CsrMatrix;
use proptest::prelude::*;
use std::collections::BTreeSet;

/// Triple-loop dense matmul, independent of the CSR path.
fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for t in 0..k {
            for j in 0..m {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

fn random_sparse(rng: &mut Rng, n_rows: usize, n_cols: usize, density: f64) -> CsrMatrix {
    let mut entries = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.next_f64() < density {
                entries.push((r, c, rng.next_f64() * 4.0 - 2.0));
            }
        }
    }
    CsrMatrix::from_entries(n_rows, n_cols, &entries).unwrap()
}

fn random_binary(rng: &mut Rng, n_rows: usize, n_cols: usize, density: f64) -> CsrMatrix {
    let mut entries = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.next_f64() < density {
                entries.push((r, c, 1.0));
            }
        }
    }
    CsrMatrix::from_entries(n_rows, n_cols, &entries).unwrap()
}

fn to_rows(m: &CsrMatrix) -> Vec<Vec<f64>> {
    (0..m.n_rows())
        .map(|r| (0..m.n_cols()).map(|c| m.get(r, c)).collect())
        .collect()
}

#[test]
fn spmm_matches_dense_oracle_on_named_instance() {
    let mut rng = Rng::new(2024);
    let a = random_sparse(&mut rng, 6, 4, 0.4);
    let x_rows: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..3).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let x = DenseMatrix::from_vec(4, 3, x_rows.concat()).unwrap();
    let got = a.spmm(&x).unwrap();
    let want = dense_matmul(&to_rows(&a), &x_rows);
    for i in 0..6 {
        for j in 0..3 {
            assert!((got.get(i, j) - want[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn spmm_matches_dense_oracle_up_to_50x50() {
    let mut rng = Rng::new(7);
    for case in 0..10 {
        let n = 5 + (case * 5) % 46;
        let k = 3 + (case * 7) % 48;
        let cols = 1 + case % 6;
        let a = random_sparse(&mut rng, n, k, 0.3);
        let x_rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..cols).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
            .collect();
        let x = DenseMatrix::from_vec(k, cols, x_rows.concat()).unwrap();
        let got = a.spmm(&x).unwrap();
        let want = dense_matmul(&to_rows(&a), &x_rows);
        for i in 0..n {
            for j in 0..cols {
                let w = want[i][j];
                let rel = (got.get(i, j) - w).abs() / w.abs().max(1.0);
                assert!(rel < 1e-12, "case {case} entry ({i},{j})");
            }
        }
    }
}

#[test]
fn gram_matches_set_intersection_oracle() {
    let mut rng = Rng::new(99);
    let r = random_binary(&mut rng, 20, 15, 0.35);
    let sets: Vec<BTreeSet<usize>> = (0..20)
        .map(|u| r.row(u).0.iter().copied().collect())
        .collect();
    let g = r.gram().unwrap();
    for i in 0..20 {
        for j in 0..20 {
            let want = sets[i].intersection(&sets[j]).count() as f64;
            assert_eq!(g.get(i, j), if want == 0.0 { 0.0 } else { want });
        }
    }
    // diagonal carries row degrees
    for i in 0..20 {
        assert_eq!(g.get(i, i), sets[i].len() as f64);
    }
}

#[test]
fn gram_is_exactly_symmetric() {
    let mut rng = Rng::new(123);
    for seed in 0..5 {
        let r = random_binary(&mut rng, 12 + seed, 9, 0.4);
        let g = r.gram().unwrap();
        for (i, j, v) in g.iter() {
            assert_eq!(g.get(j, i), v);
        }
    }
}

proptest! {
    #[test]
    fn transpose_round_trips(seed in 0u64..500) {
        let mut rng = Rng::new(seed);
        let a = random_sparse(&mut rng, 5, 7, 0.35);
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn csr_invariants_hold_after_kernels(seed in 0u64..200) {
        let mut rng = Rng::new(seed.wrapping_mul(31).wrapping_add(5));
        let r = random_binary(&mut rng, 10, 8, 0.4);
        // Rebuilding through the validating constructor asserts the invariants.
        for m in [r.transpose(), r.gram().unwrap(),
                  r.sym_normalize(&r.row_sums(), &r.col_sums()).unwrap()] {
            let entries: Vec<(usize, usize, f64)> = m.iter().collect();
            let rebuilt = CsrMatrix::from_entries(m.n_rows(), m.n_cols(), &entries).unwrap();
            prop_assert_eq!(rebuilt, m);
        }
    }
}

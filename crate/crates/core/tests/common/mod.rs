//! Dense complex-matrix reference for Pauli words.

#![allow(dead_code)]

use num_complex::Complex64;

pub type Matrix = Vec<Vec<Complex64>>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn symbol_matrix(name: &str) -> Matrix {
    match name {
        "I" => vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]],
        "X" => vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]],
        // i·Y = i·[[0, −i], [i, 0]]
        "iY" => vec![vec![c(0.0), c(1.0)], vec![c(-1.0), c(0.0)]],
        "Z" => vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)]],
        other => panic!("unknown symbol {other}"),
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn word_matrix(word: &str) -> Matrix {
    word.split('.')
        .map(symbol_matrix)
        .reduce(|acc, m| kron(&acc, &m))
        .expect("non-empty word")
}

/// Operator on `qubits` qubits acting with `word` on `targets`, identity elsewhere.
pub fn embedded(word: &str, targets: &[usize], qubits: usize) -> Matrix {
    let symbols: Vec<&str> = word.split('.').collect();
    (0..qubits)
        .map(|q| match targets.iter().position(|&t| t == q) {
            Some(i) => symbol_matrix(symbols[i]),
            None => symbol_matrix("I"),
        })
        .reduce(|acc, m| kron(&acc, &m))
        .expect("at least one qubit")
}

pub fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn equal_up_to_phase(a: &Matrix, b: &Matrix) -> bool {
    let flat_a: Vec<Complex64> = a.iter().flatten().copied().collect();
    let flat_b: Vec<Complex64> = b.iter().flatten().copied().collect();
    let Some(k) = flat_b.iter().position(|z| z.norm() > 1e-12) else {
        return false;
    };
    let phase = flat_a[k] / flat_b[k];
    (phase.norm() - 1.0).abs() < 1e-12
        && flat_a
            .iter()
            .zip(&flat_b)
            .all(|(x, y)| (x - phase * y).norm() < 1e-12)
}
